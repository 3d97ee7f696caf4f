#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include "helpers.hpp"
#include "kgeeg/bandpower.hpp"
#include "kgeeg/error.hpp"
#include "kgeeg/synth.hpp"

using namespace kgeeg;

namespace {

// Magnitude of the plain DFT of x at frequency bin k.
double dft_magnitude(std::span<const float> x, std::size_t k) {
  std::complex<double> s = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    s += static_cast<double>(x[t]) *
         std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) / n);
  }
  return std::abs(s);
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("single 10 Hz tone concentrates its energy at the 10 Hz bin") {
    const Recording rec = synth_recording({{"Cz", {{10.0, 1.0}}}}, 0.0, 4.0, 250.0, 1);
    REQUIRE(rec.n_samples == 1000);
    // 4 s at 250 Hz: bin k is k / 4 Hz, so 10 Hz is bin 40.
    const double peak = dft_magnitude(rec.row(0), 40);
    double total = 0.0;
    for (std::size_t k = 0; k <= 500; ++k) {
      const double m = dft_magnitude(rec.row(0), k);
      total += m * m;
    }
    CHECK(peak * peak / total > 0.999);
    CHECK(peak == doctest::Approx(500.0).epsilon(1e-4));
  }

  TEST_CASE("no tones and no noise gives silence") {
    const Recording rec = synth_recording({{"Cz", {}}, {"Pz", {}}}, 0.0, 1.0, 250.0, 1);
    for (float v : rec.data) CHECK(v == 0.0f);
  }

  TEST_CASE("same seed, same signal") {
    const std::vector<ChannelSpec> spec = {{"Cz", {{7.0, 1.0}, {21.0, 0.5}}}};
    CHECK(synth_recording(spec, 0.3, 2.0, 250.0, 9).data ==
          synth_recording(spec, 0.3, 2.0, 250.0, 9).data);
    CHECK(synth_recording(spec, 0.3, 2.0, 250.0, 9).data !=
          synth_recording(spec, 0.3, 2.0, 250.0, 10).data);
  }

  TEST_CASE("tones at or above Nyquist are rejected") {
    CHECK_THROWS_AS(synth_recording({{"Cz", {{125.0, 1.0}}}}, 0.0, 1.0, 250.0, 1),
                    ParameterError);
  }

  TEST_CASE("band chunks are standardized and dominated by their band") {
    BandChunkOptions opt;
    opt.n_channels = 4;
    const auto chunk = synth_band_chunk("beta", opt, 5);
    REQUIRE(chunk.size() == 4 * kChunkSamples);
    for (std::size_t c = 0; c < 4; ++c) {
      double m = 0.0, v = 0.0;
      for (std::size_t t = 0; t < kChunkSamples; ++t) m += chunk[c * kChunkSamples + t];
      m /= kChunkSamples;
      for (std::size_t t = 0; t < kChunkSamples; ++t) {
        const double d = chunk[c * kChunkSamples + t] - m;
        v += d * d;
      }
      CHECK(std::abs(m) < 1e-5);
      CHECK(std::sqrt(v / kChunkSamples) == doctest::Approx(1.0).epsilon(1e-4));
    }
    const Tensor p = band_power(chunk, 4);
    const std::size_t beta = BandDefinition::standard().index_of("beta");
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t w = 0; w < p.dim(2); ++w) {
        for (std::size_t b = 0; b < p.dim(1); ++b) {
          if (b != beta) CHECK(p.at({c, beta, w}) > p.at({c, b, w}));
        }
      }
    }
  }

  TEST_CASE("pretraining corpus layout") {
    CorpusSpec spec;
    spec.n_subjects = 3;
    spec.chunks_per_subject = 2;
    spec.chunk.n_samples = 2048;
    spec.chunk.n_channels = 2;
    const auto corpus = synth_pretraining_corpus(spec);
    REQUIRE(corpus.size() == 6);
    std::map<std::string, int> per;
    for (const auto& c : corpus) {
      CHECK(c.data.size() == 2 * 2048);
      ++per[c.subject_id];
    }
    CHECK(per.size() == 3);
    for (const auto& [s, n] : per) CHECK(n == 2);
    CHECK(synth_pretraining_corpus(spec)[4].data == corpus[4].data);
  }

  TEST_CASE("task labels are balanced and shuffling keeps the balance") {
    TaskSpec spec;
    spec.n_subjects = 4;
    spec.trials_per_subject = 6;
    spec.chunk.n_channels = 2;
    spec.chunk.n_samples = 1024;
    spec.class_bands = {"alpha", "beta", "theta"};
    for (bool shuffle : {false, true}) {
      spec.shuffle_labels = shuffle;
      const TrialSet set = synth_task(spec);
      CHECK(set.n_classes() == 3);
      CHECK(set.trials.size() == 24);
      std::vector<int> counts(3, 0);
      for (const auto& t : set.trials) ++counts[t.label];
      CHECK(counts == std::vector<int>{8, 8, 8});
      CHECK(set.subjects().size() == 4);
    }
  }
}
