#include "kgeeg/recording.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

constexpr char kMagic[4] = {'E', 'R', 'F', '1'};

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
           (v >> 24);
  }
  return v;
}

void swap_floats_if_big_endian(std::span<float> values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& f : values) {
      auto bits = std::bit_cast<std::uint32_t>(f);
      f = std::bit_cast<float>(to_le(bits));
    }
  }
}

}  // namespace

void Recording::validate() const {
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw ParameterError("sampling rate must be positive, got " + std::to_string(fs));
  }
  if (data.size() != channels.size() * n_samples) {
    throw IntegrityError("data holds " + std::to_string(data.size()) +
                         " values, expected " +
                         std::to_string(channels.size() * n_samples));
  }
  std::set<std::string> seen;
  for (const auto& c : channels) {
    if (!seen.insert(c).second) throw IntegrityError("duplicate channel label " + c);
  }
}

void write_recording(const Recording& rec, const std::filesystem::path& path) {
  rec.validate();
  nlohmann::json header;
  header["channels"] = rec.channels;
  header["fs"] = rec.fs;
  header["subject_id"] = rec.subject_id;
  header["n_samples"] = rec.n_samples;
  auto annotations = nlohmann::json::array();
  for (const auto& a : rec.annotations) {
    annotations.push_back({{"onset_s", a.onset_s}, {"duration_s", a.duration_s},
                           {"label", a.label}});
  }
  header["annotations"] = std::move(annotations);
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  const std::uint32_t len = to_le(static_cast<std::uint32_t>(text.size()));
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<float> payload = rec.data;
  swap_floats_if_big_endian(payload);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw DataError("write failed for " + path.string());
}

Recording load_recording(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + ": bad magic, expected ERF1");
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  if (in.gcount() != 4) throw FormatError(path.string() + ": truncated header length");
  len = to_le(len);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (static_cast<std::uint32_t>(in.gcount()) != len) {
    throw FormatError(path.string() + ": truncated header");
  }

  Recording rec;
  try {
    const auto header = nlohmann::json::parse(text);
    rec.channels = header.at("channels").get<std::vector<std::string>>();
    rec.fs = header.at("fs").get<double>();
    rec.n_samples = header.at("n_samples").get<std::size_t>();
    rec.subject_id = header.value("subject_id", std::string{});
    if (header.contains("annotations")) {
      for (const auto& a : header.at("annotations")) {
        rec.annotations.push_back({a.at("onset_s").get<double>(),
                                   a.at("duration_s").get<double>(),
                                   a.at("label").get<std::string>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed header: " + e.what());
  }
  if (!(rec.fs > 0.0)) throw FormatError(path.string() + ": fs must be positive");

  rec.data.resize(rec.channels.size() * rec.n_samples);
  const auto bytes = static_cast<std::streamsize>(rec.data.size() * sizeof(float));
  in.read(reinterpret_cast<char*>(rec.data.data()), bytes);
  if (in.gcount() != bytes) {
    throw IntegrityError(path.string() + ": payload holds " +
                         std::to_string(in.gcount()) + " bytes, header declares " +
                         std::to_string(bytes));
  }
  in.peek();
  if (!in.eof()) throw IntegrityError(path.string() + ": trailing bytes after payload");
  swap_floats_if_big_endian(rec.data);
  rec.validate();
  return rec;
}

std::vector<std::vector<float>> chunk(const Recording& rec, std::size_t length,
                                      bool drop_last) {
  if (std::abs(rec.fs - kModelFs) > 1e-9) {
    throw ParameterError("chunking expects 250 Hz input, got " + std::to_string(rec.fs));
  }
  if (length == 0) throw ParameterError("chunk length must be positive");
  std::vector<std::vector<float>> out;
  if (rec.n_samples < length) return out;
  std::size_t n_chunks = rec.n_samples / length;
  if (!drop_last && rec.n_samples % length != 0) ++n_chunks;
  const std::size_t nc = rec.n_channels();
  for (std::size_t k = 0; k < n_chunks; ++k) {
    std::vector<float> block(nc * length, 0.0f);
    const std::size_t start = k * length;
    const std::size_t take = std::min(length, rec.n_samples - start);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto src = rec.row(c);
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(start), take,
                  block.begin() + static_cast<std::ptrdiff_t>(c * length));
    }
    out.push_back(std::move(block));
  }
  return out;
}

}  // namespace kgeeg
