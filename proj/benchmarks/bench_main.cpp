#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "kgeeg/bandpower.hpp"
#include "kgeeg/layers.hpp"
#include "kgeeg/network.hpp"
#include "kgeeg/optimizer.hpp"
#include "kgeeg/ssm.hpp"
#include "kgeeg/synth.hpp"
#include "kgeeg/training.hpp"

namespace {

kgeeg::Tensor noise(std::vector<std::size_t> shape, std::uint64_t seed) {
  kgeeg::Tensor t(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  for (auto& v : t.values()) v = n(rng);
  return t;
}

void BM_SsmKernel(benchmark::State& state) {
  const auto p = kgeeg::init_ssm(64, 64, 1);
  const auto length = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kgeeg::ssm_kernel(p, length));
  state.SetItemsProcessed(state.iterations() * 64 * state.range(0));
}
BENCHMARK(BM_SsmKernel)->Arg(240)->Arg(960)->Unit(benchmark::kMicrosecond);

void BM_SsmApply(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const auto p = kgeeg::init_ssm(64, 64, 2);
  const auto u = noise({4, 64, length}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kgeeg::ssm_apply(p, u));
}
BENCHMARK(BM_SsmApply)->Arg(240)->Arg(960)->Unit(benchmark::kMicrosecond);

void BM_SsmRecurrence(benchmark::State& state) {
  const auto length = static_cast<std::size_t>(state.range(0));
  const auto p = kgeeg::init_ssm(64, 64, 2);
  const auto u = noise({4, 64, length}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kgeeg::ssm_recurrence(p, u));
}
BENCHMARK(BM_SsmRecurrence)->Arg(240)->Unit(benchmark::kMicrosecond);

void BM_ConvForward(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto out = static_cast<std::size_t>(state.range(0));
  kgeeg::Conv1d conv("conv", 19, out, 7, 2, 3, rng);
  const auto x = noise({2, 19, 15360}, 5);
  const kgeeg::Context ctx;
  for (auto _ : state) benchmark::DoNotOptimize(conv.forward(x, ctx));
}
BENCHMARK(BM_ConvForward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ConvBackward(benchmark::State& state) {
  std::mt19937_64 rng(4);
  kgeeg::Conv1d conv("conv", 19, 32, 7, 2, 3, rng);
  const auto x = noise({2, 19, 15360}, 5);
  const kgeeg::Context ctx;
  const auto y = conv.forward(x, ctx);
  const auto g = noise(y.shape(), 6);
  for (auto _ : state) benchmark::DoNotOptimize(conv.backward(g));
}
BENCHMARK(BM_ConvBackward)->Unit(benchmark::kMillisecond);

void BM_BandPower(benchmark::State& state) {
  const auto chunk = kgeeg::synth_band_chunk("alpha", {}, 7);
  for (auto _ : state) benchmark::DoNotOptimize(kgeeg::band_power(chunk, 19));
  state.SetItemsProcessed(state.iterations() * 19 * 15);
}
BENCHMARK(BM_BandPower)->Unit(benchmark::kMillisecond);

void BM_PretrainStep(benchmark::State& state) {
  kgeeg::Model model(kgeeg::ModelConfig::desk(), 8);
  const auto batch_size = static_cast<std::size_t>(state.range(0));
  const auto x = noise({batch_size, 19, kgeeg::kChunkSamples}, 9);
  const auto target = noise({batch_size, 19, 5, 15}, 10);
  kgeeg::Adam opt(model.parameters());
  std::mt19937_64 rng(11);
  const kgeeg::Context ctx{kgeeg::Mode::train, &rng};
  for (auto _ : state) {
    opt.zero_grad();
    benchmark::DoNotOptimize(kgeeg::pretrain_gradients(model, x, target, 5.0, ctx));
    opt.step();
  }
}
BENCHMARK(BM_PretrainStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
