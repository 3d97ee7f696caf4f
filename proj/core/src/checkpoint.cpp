#include "kgeeg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json_io.hpp"
#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'K', 'G', 'C', 'K'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw FormatError(std::string("checkpoint truncated in ") + what);
  }
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model, const CheckpointMeta& meta,
                     const Adam* optimizer) {
  json index = json::array();
  std::vector<const Tensor*> blobs;
  std::size_t offset = 0;
  auto add = [&](const std::string& name, const Tensor& t, bool discardable) {
    index.push_back({{"name", name},
                     {"shape", t.shape()},
                     {"offset", offset},
                     {"discardable", discardable}});
    blobs.push_back(&t);
    offset += t.size() * sizeof(double);
  };
  for (auto& g : model.groups()) {
    for (const Parameter* p : g.params) add(p->name, p->value, Model::discardable(g.part));
  }
  json opt = nullptr;
  if (optimizer) {
    const Adam& adam = *optimizer;
    const auto& params = adam.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
      add("m/" + params[k]->name, adam.first_moments()[k], false);
      add("v/" + params[k]->name, adam.second_moments()[k], false);
    }
    opt = {{"steps", adam.steps()}, {"lr", adam.config().lr}};
  }
  json header = {{"format", "kgeeg-checkpoint"},
                 {"model", detail::model_to_json(model.config())},
                 {"model_seed", model.seed()},
                 {"meta",
                  {{"label", meta.label},
                   {"seed", meta.seed},
                   {"iteration", meta.iteration},
                   {"lambda", meta.lambda}}},
                 {"tensors", index},
                 {"optimizer", opt}};
  if (model.has_head()) header["head"] = detail::head_to_json(model.head().config());
  const std::string text = header.dump();

  std::filesystem::create_directories(path.has_parent_path() ? path.parent_path() : ".");
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kMagic, 4);
    write_pod<std::uint32_t>(out, kCheckpointMajor);
    write_pod<std::uint32_t>(out, kCheckpointMinor);
    write_pod<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const Tensor* t : blobs) {
      out.write(reinterpret_cast<const char*>(t->data()),
                static_cast<std::streamsize>(t->size() * sizeof(double)));
    }
    if (!out) throw DataError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + " is not a checkpoint");
  }
  const auto major = read_pod<std::uint32_t>(in, "version");
  read_pod<std::uint32_t>(in, "version");
  if (major > kCheckpointMajor) {
    throw FormatError("checkpoint format " + std::to_string(major) + " is newer than supported " +
                      std::to_string(kCheckpointMajor));
  }
  const auto length = read_pod<std::uint64_t>(in, "header length");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (in.gcount() != static_cast<std::streamsize>(length)) {
    throw FormatError("checkpoint header truncated");
  }
  const auto payload_start = in.tellg();

  Checkpoint ck;
  try {
    const json header = json::parse(text);
    ck.config = detail::model_from_json(header.at("model"), "/model");
    if (header.contains("head") && !header["head"].is_null()) {
      ck.head = detail::head_from_json(header["head"], "/head");
    }
    const json& m = header.at("meta");
    ck.meta.label = m.at("label").get<std::string>();
    ck.meta.seed = m.at("seed").get<std::uint64_t>();
    ck.meta.iteration = m.at("iteration").get<std::size_t>();
    ck.meta.lambda = m.at("lambda").get<double>();
    ck.model_seed = header.value("model_seed", ck.meta.seed);
    if (header.contains("optimizer") && header["optimizer"].is_object()) {
      ck.optimizer_steps = header["optimizer"].at("steps").get<std::size_t>();
    }
    for (const json& entry : header.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      Tensor t(entry.at("shape").get<std::vector<std::size_t>>());
      in.seekg(payload_start + static_cast<std::streamoff>(entry.at("offset").get<std::size_t>()));
      in.read(reinterpret_cast<char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
      if (!in || in.gcount() != static_cast<std::streamsize>(t.size() * sizeof(double))) {
        throw IntegrityError("checkpoint payload truncated at tensor " + name);
      }
      if (name.rfind("m/", 0) == 0 || name.rfind("v/", 0) == 0) {
        ck.optimizer.emplace(name, std::move(t));
      } else {
        ck.tensors.emplace(name, std::move(t));
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed checkpoint config: ") + e.what());
  }
  return ck;
}

void load_parameters(Model& model, const std::map<std::string, Tensor>& tensors) {
  for (Parameter* p : model.parameters()) {
    auto it = tensors.find(p->name);
    if (it == tensors.end()) throw FormatError("checkpoint lacks parameter " + p->name);
    it->second.require_shape(p->value.shape(), p->name.c_str());
    p->value = it->second;
  }
}

Model Checkpoint::restore() const {
  Model model(config, model_seed);
  if (head) model.attach_head(*head, model_seed);
  load_parameters(model, tensors);
  return model;
}

void Checkpoint::restore_optimizer(Adam& optimizer) const {
  const auto& params = optimizer.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto m = this->optimizer.find("m/" + params[k]->name);
    auto v = this->optimizer.find("v/" + params[k]->name);
    if (m == this->optimizer.end() || v == this->optimizer.end()) {
      throw FormatError("checkpoint lacks optimizer state for " + params[k]->name);
    }
    optimizer.first_moments()[k] = m->second;
    optimizer.second_moments()[k] = v->second;
  }
  optimizer.set_steps(optimizer_steps);
}

}  // namespace kgeeg
