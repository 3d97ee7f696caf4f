#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "kgeeg/dataset.hpp"
#include "kgeeg/error.hpp"

using namespace kgeeg;

TEST_SUITE("dataset") {
  TEST_CASE("fnv1a matches the published 64-bit test vectors") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  }

  TEST_CASE("chunk_recordings keeps subject ids and drops partial windows") {
    Recording a;
    a.channels = {"Cz"};
    a.n_samples = 25;
    a.data.assign(25, 1.0f);
    a.subject_id = "A";
    Recording b = a;
    b.n_samples = 9;
    b.data.assign(9, 2.0f);
    b.subject_id = "B";
    const auto chunks = chunk_recordings({a, b}, 10);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].subject_id == "A");
    CHECK(chunks[1].subject_id == "A");
  }

  TEST_CASE("extract_trials cuts one window per annotation and pads past the end") {
    Recording rec;
    rec.channels = {"C3", "C4"};
    rec.n_samples = 500;
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t t = 0; t < 500; ++t) rec.data.push_back(static_cast<float>(c * 1000 + t));
    }
    rec.subject_id = "S1";
    rec.annotations = {{0.4, 1.0, "right"}, {1.8, 1.0, "left"}};
    const TrialSet set = extract_trials({rec}, 100);
    CHECK(set.class_names == std::vector<std::string>{"left", "right"});
    CHECK(set.n_channels == 2);
    REQUIRE(set.trials.size() == 2);
    CHECK(set.trials[0].label == 1);
    CHECK(set.trials[1].label == 0);
    CHECK(set.trials[0].data[0] == 100.0f);           // onset 0.4 s * 250 Hz
    CHECK(set.trials[0].data[100] == 1100.0f);        // second channel
    CHECK(set.trials[1].data[0] == 450.0f);
    CHECK(set.trials[1].data[49] == 499.0f);
    CHECK(set.trials[1].data[50] == 0.0f);            // past the end
    CHECK(set.subjects() == std::vector<std::string>{"S1"});
  }

  TEST_CASE("list_recordings is sorted and only returns .erf files") {
    testing::TempDir dir("list");
    std::ofstream(dir / "b.erf") << "x";
    std::ofstream(dir / "a.erf") << "x";
    std::ofstream(dir / "c.txt") << "x";
    const auto files = list_recordings(dir.path());
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "a.erf");
    CHECK(files[1].filename() == "b.erf");
    CHECK_THROWS_AS(list_recordings(dir / "missing"), DataError);
  }
}
