#include "kgeeg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"
#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

using nlohmann::json;

// Reads fields of one JSON object, tracking which keys were consumed so the
// rest can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(at(key), "expected a number");
      out = v->get<double>();
    }
  }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        throw ConfigError(at(key), "expected a non-negative integer");
      }
      out = v->get<std::size_t>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
        throw ConfigError(at(key), "expected a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }

  void flag(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(at(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) {
          throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
        }
        out.push_back((*v)[i].get<double>());
      }
    }
  }

  void texts(const std::string& key, std::vector<std::string>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(at(key), "expected an array of strings");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) {
          throw ConfigError(at(key) + "/" + std::to_string(i), "expected a string");
        }
        out.push_back((*v)[i].get<std::string>());
      }
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
void checked(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

void read_chunk_options(Fields& f, BandChunkOptions& o) {
  f.count("n_channels", o.n_channels);
  f.count("n_samples", o.n_samples);
  f.number("fs", o.fs);
  f.count("tones_per_channel", o.tones_per_channel);
  f.number("background_amplitude", o.background_amplitude);
  f.number("noise_std", o.noise_std);
}

json chunk_options_json(const BandChunkOptions& o) {
  return {{"n_channels", o.n_channels},
          {"n_samples", o.n_samples},
          {"fs", o.fs},
          {"tones_per_channel", o.tones_per_channel},
          {"background_amplitude", o.background_amplitude},
          {"noise_std", o.noise_std}};
}

}  // namespace

namespace detail {

json model_to_json(const ModelConfig& cfg) {
  json enc = json::array();
  for (const auto& e : cfg.encoder) {
    enc.push_back({{"out_channels", e.out_channels}, {"kernel", e.kernel}, {"stride", e.stride}});
  }
  return {{"n_channels", cfg.n_channels}, {"n_time_steps", cfg.n_time_steps},
          {"encoder", enc},               {"n_s4_layers", cfg.n_s4_layers},
          {"n_state", cfg.n_state},       {"dropout", cfg.dropout},
          {"n_bands", cfg.n_bands},       {"pool_group", cfg.pool_group}};
}

ModelConfig model_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  std::string preset;
  f.text("preset", preset);
  ModelConfig cfg = ModelConfig::desk();
  if (!preset.empty()) checked(f.at("preset"), [&] { cfg = model_preset(preset); });
  f.count("n_channels", cfg.n_channels);
  f.count("n_time_steps", cfg.n_time_steps);
  if (const json* enc = f.take("encoder")) {
    if (!enc->is_array()) throw ConfigError(f.at("encoder"), "expected an array of modules");
    cfg.encoder.clear();
    for (std::size_t i = 0; i < enc->size(); ++i) {
      Fields m((*enc)[i], f.at("encoder") + "/" + std::to_string(i));
      ConvSpec spec;
      m.count("out_channels", spec.out_channels);
      m.count("kernel", spec.kernel);
      m.count("stride", spec.stride);
      m.finish();
      cfg.encoder.push_back(spec);
    }
  }
  f.count("n_s4_layers", cfg.n_s4_layers);
  f.count("n_state", cfg.n_state);
  f.number("dropout", cfg.dropout);
  f.count("n_bands", cfg.n_bands);
  f.count("pool_group", cfg.pool_group);
  f.finish();
  checked(path.empty() ? "/" : path, [&] { cfg.validate(); });
  return cfg;
}

json head_to_json(const HeadConfig& cfg) {
  return {{"n_fc", cfg.n_fc}, {"hidden", cfg.hidden}, {"n_classes", cfg.n_classes}};
}

HeadConfig head_from_json(const json& j, const std::string& path) {
  Fields f(j, path);
  HeadConfig cfg;
  f.count("n_fc", cfg.n_fc);
  f.count("hidden", cfg.hidden);
  f.count("n_classes", cfg.n_classes);
  f.finish();
  checked(path, [&] { cfg.validate(); });
  return cfg;
}

}  // namespace detail

ModelConfig model_preset(const std::string& name) {
  if (name == "full") return ModelConfig::full();
  if (name == "desk") return ModelConfig::desk();
  if (name == "mini") return ModelConfig::mini();
  if (name == "tiny") return ModelConfig::tiny();
  throw ParameterError("unknown model preset '" + name + "' (full, desk, mini, tiny)");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  Fields top(root, "");
  top.seed("seed", cfg.seed);

  if (const json* m = top.take("model")) {
    cfg.model = detail::model_from_json(*m, "/model");
    if (m->contains("preset")) cfg.model_preset = (*m)["preset"].get<std::string>();
  }

  if (const json* p = top.take("preprocess")) {
    Fields f(*p, "/preprocess");
    PreprocessConfig& pc = cfg.preprocess;
    f.number("notch_hz", pc.notch_hz);
    f.number("notch_q", pc.notch_q);
    std::vector<double> band = {pc.band_low_hz, pc.band_high_hz};
    f.numbers("band", band);
    if (band.size() != 2) throw ConfigError("/preprocess/band", "expected [low_hz, high_hz]");
    pc.band_low_hz = band[0];
    pc.band_high_hz = band[1];
    f.number("target_fs", pc.target_fs);
    f.integer("highpass_order", pc.highpass_order);
    f.integer("lowpass_order", pc.lowpass_order);
    f.finish();
    checked("/preprocess", [&] { pc.validate(); });
  }

  cfg.train.seed = cfg.seed;
  if (const json* t = top.take("train")) {
    Fields f(*t, "/train");
    TrainConfig& tc = cfg.train;
    std::string text;
    f.text("mode", text);
    if (!text.empty()) checked(f.at("mode"), [&] { tc.mode = parse_train_mode(text); });
    text.clear();
    f.text("objective", text);
    if (!text.empty()) {
      if (text == "vanilla") {
        tc.lambda = 0.0;
      } else if (text == "knowledge") {
        tc.lambda = kDefaultKnowledgeWeight;
      } else {
        throw ConfigError(f.at("objective"), "expected 'vanilla' or 'knowledge'");
      }
    }
    f.number("lambda", tc.lambda);
    f.count("iterations", tc.iterations);
    f.count("pretrain_batch_size", tc.pretrain_batch_size);
    f.count("finetune_batch_size", tc.finetune_batch_size);
    f.number("lr", tc.lr);
    f.numbers("lr_grid", tc.lr_grid);
    text.clear();
    f.text("freeze_policy", text);
    if (!text.empty()) {
      checked(f.at("freeze_policy"), [&] { tc.freeze_policy = parse_freeze_policy(text); });
    }
    f.number("pretrain_fraction", tc.pretrain_fraction);
    f.number("finetune_fraction", tc.finetune_fraction);
    f.count("epochs", tc.epochs);
    f.count("patience", tc.patience);
    f.number("validation_fraction", tc.validation_fraction);
    f.count("checkpoint_every", tc.checkpoint_every);
    if (const json* h = f.take("head")) tc.head = detail::head_from_json(*h, "/train/head");
    f.finish();
    checked("/train", [&] { tc.validate(); });
  }

  if (const json* s = top.take("split")) {
    Fields f(*s, "/split");
    std::string scheme;
    f.text("scheme", scheme);
    if (!scheme.empty()) {
      checked(f.at("scheme"), [&] { cfg.split.scheme = parse_split_scheme(scheme); });
    }
    f.count("k", cfg.split.k);
    f.finish();
    if (cfg.split.scheme == SplitScheme::kfold && cfg.split.k < 2) {
      throw ConfigError("/split/k", "kfold needs k >= 2");
    }
  }

  // Synthetic chunks follow the model's input shape unless overridden.
  for (BandChunkOptions* o : {&cfg.corpus.chunk, &cfg.task.chunk}) {
    o->n_channels = cfg.model.n_channels;
    o->n_samples = cfg.model.n_time_steps;
  }
  if (const json* s = top.take("synth")) {
    Fields f(*s, "/synth");
    if (const json* c = f.take("corpus")) {
      Fields g(*c, "/synth/corpus");
      g.count("n_subjects", cfg.corpus.n_subjects);
      g.count("chunks_per_subject", cfg.corpus.chunks_per_subject);
      g.seed("seed", cfg.corpus.seed);
      if (const json* o = g.take("chunk")) {
        Fields h(*o, "/synth/corpus/chunk");
        read_chunk_options(h, cfg.corpus.chunk);
        h.finish();
      }
      g.finish();
    }
    if (const json* t = f.take("task")) {
      Fields g(*t, "/synth/task");
      g.count("n_subjects", cfg.task.n_subjects);
      g.count("trials_per_subject", cfg.task.trials_per_subject);
      g.texts("class_bands", cfg.task.class_bands);
      g.flag("shuffle_labels", cfg.task.shuffle_labels);
      g.seed("seed", cfg.task.seed);
      if (const json* o = g.take("chunk")) {
        Fields h(*o, "/synth/task/chunk");
        read_chunk_options(h, cfg.task.chunk);
        h.finish();
      }
      g.finish();
      if (cfg.task.class_bands.size() < 2) {
        throw ConfigError("/synth/task/class_bands", "need at least two classes");
      }
    }
    f.finish();
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  json model = detail::model_to_json(cfg.model);
  model["preset"] = cfg.model_preset;
  json root = {
      {"seed", cfg.seed},
      {"model", model},
      {"preprocess",
       {{"notch_hz", cfg.preprocess.notch_hz},
        {"notch_q", cfg.preprocess.notch_q},
        {"band", {cfg.preprocess.band_low_hz, cfg.preprocess.band_high_hz}},
        {"target_fs", cfg.preprocess.target_fs},
        {"highpass_order", cfg.preprocess.highpass_order},
        {"lowpass_order", cfg.preprocess.lowpass_order}}},
      {"train",
       {{"mode", to_string(t.mode)},
        {"lambda", t.lambda},
        {"iterations", t.iterations},
        {"pretrain_batch_size", t.pretrain_batch_size},
        {"finetune_batch_size", t.finetune_batch_size},
        {"lr", t.lr},
        {"lr_grid", t.lr_grid},
        {"freeze_policy", to_string(t.freeze_policy)},
        {"pretrain_fraction", t.pretrain_fraction},
        {"finetune_fraction", t.finetune_fraction},
        {"epochs", t.epochs},
        {"patience", t.patience},
        {"validation_fraction", t.validation_fraction},
        {"checkpoint_every", t.checkpoint_every},
        {"head", detail::head_to_json(t.head)}}},
      {"split", {{"scheme", to_string(cfg.split.scheme)}, {"k", cfg.split.k}}},
      {"synth",
       {{"corpus",
         {{"n_subjects", cfg.corpus.n_subjects},
          {"chunks_per_subject", cfg.corpus.chunks_per_subject},
          {"seed", cfg.corpus.seed},
          {"chunk", chunk_options_json(cfg.corpus.chunk)}}},
        {"task",
         {{"n_subjects", cfg.task.n_subjects},
          {"trials_per_subject", cfg.task.trials_per_subject},
          {"class_bands", cfg.task.class_bands},
          {"shuffle_labels", cfg.task.shuffle_labels},
          {"seed", cfg.task.seed},
          {"chunk", chunk_options_json(cfg.task.chunk)}}}}}};
  return root.dump(2);
}

}  // namespace kgeeg
