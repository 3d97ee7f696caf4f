#include <cstring>
#include <fstream>

#include <doctest.h>

#include "helpers.hpp"
#include "kgeeg/error.hpp"
#include "kgeeg/recording.hpp"

using namespace kgeeg;

namespace {

Recording ramp(std::size_t channels, std::size_t n, double fs = 250.0) {
  Recording rec;
  for (std::size_t c = 0; c < channels; ++c) rec.channels.push_back("E" + std::to_string(c));
  rec.fs = fs;
  rec.n_samples = n;
  rec.data.resize(channels * n);
  for (std::size_t i = 0; i < rec.data.size(); ++i) rec.data[i] = static_cast<float>(i) * 0.25f;
  return rec;
}

void write_raw(const std::filesystem::path& path, const std::string& header,
               const std::vector<float>& payload) {
  std::ofstream out(path, std::ios::binary);
  out.write("ERF1", 4);
  const auto len = static_cast<std::uint32_t>(header.size());
  unsigned char le[4] = {static_cast<unsigned char>(len), static_cast<unsigned char>(len >> 8),
                         static_cast<unsigned char>(len >> 16),
                         static_cast<unsigned char>(len >> 24)};
  out.write(reinterpret_cast<const char*>(le), 4);
  out << header;
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
}

}  // namespace

TEST_SUITE("recording") {
  TEST_CASE("hand-written single-channel file loads as 1 x 250") {
    testing::TempDir dir("erf");
    std::vector<float> payload(250);
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<float>(i) - 100.5f;
    write_raw(dir / "cz.erf", R"({"channels":["Cz"],"fs":250,"n_samples":250})", payload);
    const Recording rec = load_recording(dir / "cz.erf");
    CHECK(rec.channels == std::vector<std::string>{"Cz"});
    CHECK(rec.fs == 250.0);
    CHECK(rec.n_samples == 250);
    REQUIRE(rec.data.size() == 250);
    CHECK(std::memcmp(rec.data.data(), payload.data(), payload.size() * sizeof(float)) == 0);
  }

  TEST_CASE("write then load is bitwise identical") {
    testing::TempDir dir("erf");
    Recording rec = ramp(3, 1000, 160.0);
    rec.data[5] = -0.0f;
    rec.data[7] = 1e-42f;  // subnormal survives
    rec.subject_id = "S007";
    rec.annotations = {{1.5, 4.0, "T1"}, {6.0, 4.0, "T2"}};
    write_recording(rec, dir / "r.erf");
    const Recording back = load_recording(dir / "r.erf");
    CHECK(back.channels == rec.channels);
    CHECK(back.fs == rec.fs);
    CHECK(back.subject_id == rec.subject_id);
    CHECK(back.annotations == rec.annotations);
    REQUIRE(back.data.size() == rec.data.size());
    CHECK(std::memcmp(back.data.data(), rec.data.data(), rec.data.size() * sizeof(float)) == 0);
  }

  TEST_CASE("truncated payload is an integrity error") {
    testing::TempDir dir("erf");
    write_recording(ramp(2, 500), dir / "r.erf");
    const auto size = std::filesystem::file_size(dir / "r.erf");
    std::filesystem::resize_file(dir / "r.erf", size - 100);
    CHECK_THROWS_AS(load_recording(dir / "r.erf"), IntegrityError);
  }

  TEST_CASE("bad magic and malformed header are format errors") {
    testing::TempDir dir("erf");
    std::ofstream(dir / "junk.erf") << "NOPE and more bytes";
    CHECK_THROWS_AS(load_recording(dir / "junk.erf"), FormatError);
    write_raw(dir / "hdr.erf", "{not json", {});
    CHECK_THROWS_AS(load_recording(dir / "hdr.erf"), FormatError);
  }

  TEST_CASE("trailing bytes are an integrity error") {
    testing::TempDir dir("erf");
    write_raw(dir / "t.erf", R"({"channels":["Cz"],"fs":250,"n_samples":2})", {1.f, 2.f, 3.f});
    CHECK_THROWS_AS(load_recording(dir / "t.erf"), IntegrityError);
  }

  TEST_CASE("validate rejects inconsistent recordings") {
    Recording rec = ramp(2, 10);
    rec.data.pop_back();
    CHECK_THROWS_AS(rec.validate(), IntegrityError);
    rec = ramp(2, 10);
    rec.channels[1] = rec.channels[0];
    CHECK_THROWS_AS(rec.validate(), IntegrityError);
    rec = ramp(2, 10);
    rec.fs = 0.0;
    CHECK_THROWS_AS(rec.validate(), ParameterError);
  }

  TEST_CASE("chunk counts") {
    CHECK(chunk(ramp(1, 46080), kChunkSamples).size() == 3);
    CHECK(chunk(ramp(1, 46100), kChunkSamples, true).size() == 3);
    CHECK(chunk(ramp(1, 15359), kChunkSamples).empty());
    CHECK(chunk(ramp(1, 46100), kChunkSamples, false).size() == 4);
  }

  TEST_CASE("chunks are consecutive channel-major windows; the tail is zero padded") {
    const Recording rec = ramp(2, 25);
    const auto blocks = chunk(rec, 10, false);
    REQUIRE(blocks.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t t = 0; t < 10; ++t) {
          const std::size_t src = k * 10 + t;
          const float expected = src < 25 ? rec.data[c * 25 + src] : 0.0f;
          CHECK(blocks[k][c * 10 + t] == expected);
        }
      }
    }
  }

  TEST_CASE("chunking needs 250 Hz") {
    CHECK_THROWS_AS(chunk(ramp(1, 1000, 160.0), 100), ParameterError);
  }
}
