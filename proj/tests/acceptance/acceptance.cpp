// End-to-end acceptance checks. Prints one line per criterion and exits
// nonzero when any of them fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "../unit/helpers.hpp"
#include "kgeeg/bandpower.hpp"
#include "kgeeg/checkpoint.hpp"
#include "kgeeg/network.hpp"
#include "kgeeg/objectives.hpp"
#include "kgeeg/plot.hpp"
#include "kgeeg/preprocess.hpp"
#include "kgeeg/recording.hpp"
#include "kgeeg/report.hpp"
#include "kgeeg/ssm.hpp"
#include "kgeeg/synth.hpp"
#include "kgeeg/training.hpp"

using namespace kgeeg;
using clk = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int n, double limit_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = clk::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(clk::now() - t0).count();
  v.require(secs <= limit_s, "time limit " + std::to_string(limit_s) + " s");
  std::printf("criterion %d: %s %s (%.1f s)\n", n, v.pass ? "PASS" : "FAIL",
              v.detail.str().c_str(), secs);
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

double tone_amplitude(const std::vector<double>& x, double f, double fs, std::size_t skip) {
  double s = 0.0, c = 0.0, ss = 0.0, cc = 0.0;
  for (std::size_t i = skip; i + skip < x.size(); ++i) {
    const double w = 2.0 * std::numbers::pi * f * static_cast<double>(i) / fs;
    s += x[i] * std::sin(w);
    c += x[i] * std::cos(w);
    ss += std::sin(w) * std::sin(w);
    cc += std::cos(w) * std::cos(w);
  }
  return std::hypot(s / ss, c / cc);
}

Tensor stack(const std::vector<const std::vector<float>*>& items, std::size_t channels,
             std::size_t samples) {
  Tensor t({items.size(), channels, samples});
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::copy(items[i]->begin(), items[i]->end(), t.data() + i * channels * samples);
  }
  return t;
}

double mean_accuracy(const std::vector<FoldResult>& folds) {
  double s = 0.0;
  for (const auto& f : folds) s += f.accuracy;
  return s / static_cast<double>(folds.size());
}

double window_mean(const std::vector<LossRecord>& log, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t i = a; i < b; ++i) s += log[i].loss.knowledge_loss;
  return s / static_cast<double>(b - a);
}

TrainConfig probe_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.mode = TrainMode::finetune;
  cfg.freeze_policy = FreezePolicy::linear_probe;
  cfg.head.n_fc = 1;
  cfg.seed = seed;
  return cfg;
}

// ------------------------------------------------------------- criteria

void band_power_check(Verdict& v) {
  const auto tone = testing::sine(10.0, 250.0, kChunkSamples);
  std::vector<float> chunk;
  for (int c = 0; c < 19; ++c) chunk.insert(chunk.end(), tone.begin(), tone.end());
  const Tensor bp = band_power(chunk, 19);
  const std::size_t alpha = BandDefinition::standard().index_of("alpha");
  std::size_t dominant = 0;
  for (std::size_t c = 0; c < 19; ++c)
    for (std::size_t w = 0; w < 15; ++w) {
      bool top = true;
      for (std::size_t b = 0; b < 5; ++b) top = top && (b == alpha || bp.at({c, alpha, w}) > bp.at({c, b, w}));
      dominant += top;
    }
  v.detail << "alpha strictly greatest in " << dominant << "/285 windows";
  v.require(dominant == 285, "alpha dominance");

  const auto lo = testing::sine(2.0, 250.0, kChunkSamples);
  const auto hi = testing::sine(20.0, 250.0, kChunkSamples);
  std::vector<float> mix(lo.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = static_cast<float>(lo[i] + hi[i]);
  const Tensor two = band_power(mix, 1);
  double worst = 0.0;
  for (std::size_t w = 0; w < 15; ++w) {
    const double d = std::exp(two.at({0, 0, w})), b = std::exp(two.at({0, 3, w}));
    worst = std::max(worst, std::abs(d - b) / std::max(d, b));
  }
  v.detail << "; delta/beta max relative gap " << worst;
  v.require(worst <= 0.10, "delta/beta within 10%");
}

void filter_check(Verdict& v) {
  const PreprocessConfig cfg;
  const auto hum = testing::sine(60.0, 500.0, 500 * 20);
  const auto y = testing::row(notch(testing::recording({hum}, {"Cz"}, 500.0), cfg), 0);
  const double notch_db = testing::db(testing::rms(y) / testing::rms(hum));

  const auto drift = testing::sine(0.05, 250.0, 250 * 200);
  const auto yd = testing::row(bandpass(testing::recording({drift}, {"Cz"}, 250.0), cfg), 0);
  const double drift_db = testing::db(testing::rms(yd) / testing::rms(drift));

  // Full pipeline on a unit-variance tone, and the same stages without the
  // standardization step so the filters' own gain is visible.
  const auto tone = testing::sine(10.0, 500.0, 500 * 20, std::numbers::sqrt2);
  const Recording rec = testing::recording({tone}, {"Cz"}, 500.0);
  const auto full = testing::row(preprocess_pipeline(rec, cfg), 0);
  const double full_db = testing::db(tone_amplitude(full, 10.0, 250.0, 250) / std::numbers::sqrt2);
  const auto raw = testing::row(resample(detrend_linear(bandpass(notch(rec, cfg), cfg))), 0);
  const double raw_db = testing::db(tone_amplitude(raw, 10.0, 250.0, 250) / std::numbers::sqrt2);

  v.detail << "notch 60 Hz " << notch_db << " dB; 0.05 Hz drift " << drift_db
           << " dB; 10 Hz through pipeline " << full_db << " dB (filters alone " << raw_db << " dB)";
  v.require(notch_db <= -20.0, "notch attenuation");
  v.require(drift_db <= -20.0, "drift attenuation");
  v.require(std::abs(full_db) <= 1.0 && std::abs(raw_db) <= 1.0, "10 Hz passband");
}

void ssm_check(Verdict& v) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> half_state(1, 16), len(1, 256), dm(1, 8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const std::size_t d = dm(rng), l = len(rng);
    SSMParams p = init_ssm(d, 2 * half_state(rng), rng());
    for (auto& x : p.rho) x = std::log(0.05 + 2.0 * u(rng));
    for (auto& x : p.a_imag) x = 20.0 * (u(rng) - 0.5);
    for (auto& x : p.b) x = {n(rng), n(rng)};
    for (auto& x : p.c) x = {n(rng), n(rng)};
    const Tensor in = testing::random_tensor({2, d, l}, rng());
    const Tensor a = ssm_apply(p, in), b = ssm_recurrence(p, in);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      num = std::max(num, std::abs(a[i] - b[i]));
      den = std::max(den, std::abs(b[i]));
    }
    worst = std::max(worst, num / den);
  }

  SSMParams s;
  s.d_model = 1;
  s.n_modes = 1;
  s.conjugate_pairs = false;
  s.log_dt = {0.0};
  s.rho = {std::log(std::log(2.0))};
  s.a_imag = {0.0};
  s.b = {{std::log(2.0), 0.0}};
  s.c = {{1.0, 0.0}};
  s.skip = {0.0};
  const Tensor k = ssm_kernel(s, 4);
  double scalar = 0.0;
  for (std::size_t i = 0; i < 4; ++i) scalar = std::max(scalar, std::abs(k[i] - std::ldexp(1.0, -static_cast<int>(i + 1))));

  v.detail << "convolution vs recurrence max relative error " << worst << " over 50 draws; scalar kernel error "
           << scalar;
  v.require(worst < 1e-4, "convolution/recurrence agreement");
  v.require(scalar <= 1e-12, "scalar kernel");
}

void gradient_check(Verdict& v) {
  Model model(ModelConfig::tiny(), 5);
  const ModelConfig& mc = model.config();
  const Tensor x = testing::random_tensor({2, mc.n_channels, mc.n_time_steps}, 6);
  const Tensor target = testing::random_tensor({2, mc.n_channels, mc.n_bands, mc.n_windows()}, 7, 3.0);
  const Context ctx;
  const double lambda = 5.0;

  model.zero_grad();
  pretrain_gradients(model, x, target, lambda, ctx);
  auto params = model.parameters();
  std::vector<Tensor> analytic;
  for (const Parameter* p : params) analytic.push_back(p->grad);
  auto loss = [&] {
    Tensor e = model.temporal_block(model.encode(x, ctx), ctx);
    return combined_loss(x, model.decode(e, ctx), target, model.project_bandpower(e, ctx), lambda)
        .combined;
  };
  // Error floor at the rounding noise of a central difference on this loss.
  const double h = 1e-6;
  const double floor = std::max(1e-5, 1e3 * std::numeric_limits<double>::epsilon() * std::abs(loss()) / h);
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& value = params[k]->value;
    const std::size_t step = std::max<std::size_t>(1, value.size() / 4);
    for (std::size_t i = 0; i < value.size(); i += step) {
      const double numeric = testing::central_difference(loss, &value[i], h);
      worst = std::max(worst, testing::rel_error(analytic[k][i], numeric, floor));
      ++checked;
    }
  }
  v.detail << checked << " entries across " << params.size()
           << " parameter tensors, max relative error " << worst << " (floor " << floor << ")";
  v.require(worst < 1e-3, "gradient agreement");
}

void shape_and_loss_check(Verdict& v) {
  Model model(ModelConfig::full(), 8);
  const Context ctx;
  const Tensor x = testing::random_tensor({2, 19, kChunkSamples}, 9);
  const Tensor c = model.encode(x, ctx);
  const Tensor e = model.temporal_block(c, ctx);
  const Tensor recon = model.decode(e, ctx);
  const Tensor p = model.project_bandpower(e, ctx);
  using S = std::vector<std::size_t>;
  v.require(c.shape() == S{2, 512, 240}, "C shape " + c.shape_string());
  v.require(e.shape() == S{2, 512, 240}, "E shape " + e.shape_string());
  v.require(recon.shape() == S{2, 19, kChunkSamples}, "recon shape " + recon.shape_string());
  v.require(p.shape() == S{2, 19, 5, 15}, "P shape " + p.shape_string());
  v.detail << "C " << c.shape_string() << " E " << e.shape_string() << " recon "
           << recon.shape_string() << " P " << p.shape_string();

  const Tensor t = testing::random_tensor({1, 19, 5, 15}, 10);
  Tensor off = t;
  for (auto& val : off.values()) val += 1.0;
  const double k_equal = knowledge_loss(t, t), k_off = knowledge_loss(t, off);
  const Tensor a = testing::random_tensor({1, 19, 100}, 11);
  Tensor neg = a;
  neg.scale(-1.0);
  const double cos_same = cosine_reconstruction_loss(a, a);
  const double cos_anti = cosine_reconstruction_loss(a, neg);

  // Orthogonal signals cost 1, two unit band-power errors cost 2.
  Tensor sin_wave({1, 1, 250}), cos_wave({1, 1, 250});
  const auto s = testing::sine(5.0, 250.0, 250);
  const auto cs = testing::sine(5.0, 250.0, 250, 1.0, std::numbers::pi / 2.0);
  std::copy(s.begin(), s.end(), sin_wave.data());
  std::copy(cs.begin(), cs.end(), cos_wave.data());
  const Tensor zero({1, 1, 1, 2});
  Tensor unit = zero;
  unit[0] = 1.0;
  unit[1] = 1.0;
  const LossReport r = combined_loss(sin_wave, cos_wave, zero, unit, 5.0);
  v.detail << "; losses " << cos_same << ", " << cos_anti << ", " << k_off << ", " << r.combined;
  v.require(std::abs(cos_same) < 1e-12 && k_equal == 0.0, "zero losses");
  v.require(std::abs(cos_anti - 2.0) < 1e-12, "antipodal cosine");
  v.require(std::abs(k_off - 1425.0) < 1e-9, "knowledge offset");
  v.require(std::abs(r.combined - 11.0) < 1e-9, "combined");
}

void parameter_count_check(Verdict& v) {
  Model model(ModelConfig::full(), 12);
  const ParameterCount count = count_parameters(model);
  const std::size_t n = backbone_parameters(count);
  v.detail << n << " backbone parameters (";
  bool first = true;
  for (const auto& [part, size] : count.by_part) {
    v.detail << (first ? "" : ", ") << part << " " << size;
    first = false;
  }
  v.detail << ")";
  v.require(n >= 10'000'000 && n <= 16'000'000, "count in [10M, 16M]");
}

void freeze_check(Verdict& v) {
  Model base(ModelConfig::full(), 13);
  base.attach_head(HeadConfig{.n_fc = 1, .n_classes = 2}, 14);
  TaskSpec ts;
  ts.n_subjects = 2;
  ts.trials_per_subject = 2;
  ts.seed = 15;
  const TrialSet task = synth_task(ts);
  std::vector<const std::vector<float>*> items;
  std::vector<std::size_t> labels;
  for (const auto& t : task.trials) {
    items.push_back(&t.data);
    labels.push_back(t.label);
  }
  const Tensor x = stack(items, 19, kChunkSamples);
  const Context eval;
  const Tensor c = base.encode(x, eval);  // the encoder is frozen under every policy below

  for (FreezePolicy policy : {FreezePolicy::linear_probe, FreezePolicy::last_s4, FreezePolicy::all_s4}) {
    Model model = base;
    const auto trainable = apply_freeze_policy(model, policy);
    std::set<std::string> expected, actual;
    const std::size_t last = model.config().n_s4_layers - 1;
    for (auto& g : model.groups()) {
      const bool on = g.part == Part::head ||
                      (policy == FreezePolicy::last_s4 && g.part == Part::s4 && g.index == last) ||
                      (policy == FreezePolicy::all_s4 && (g.part == Part::s4 || g.part == Part::temporal_in));
      for (const Parameter* p : g.params) {
        if (on) expected.insert(p->name);
      }
    }
    for (const Parameter* p : trainable) actual.insert(p->name);
    std::map<std::string, Tensor> before;
    for (const Parameter* p : model.parameters()) before.emplace(p->name, p->value);

    // Frozen stages run once in eval mode; the trainable suffix trains.
    const std::size_t first = policy == FreezePolicy::linear_probe ? model.n_temporal_stages()
                              : policy == FreezePolicy::last_s4    ? model.n_temporal_stages() - 1
                                                                   : 0;
    const Tensor prefix = model.temporal_block(c, eval, 0, first);
    Adam opt(trainable, AdamConfig{.lr = 1e-3});
    std::mt19937_64 rng(16);
    const Context train{Mode::train, &rng};
    for (int step = 0; step < 100; ++step) {
      opt.zero_grad();
      const Tensor e = first < model.n_temporal_stages() ? model.temporal_block(prefix, train, first)
                                                         : prefix;
      Tensor grad;
      cross_entropy(model.classify(e, train), labels, &grad);
      const Tensor ge = model.classify_backward(grad);
      if (first < model.n_temporal_stages()) model.temporal_block_backward(ge);
      opt.step();
    }

    std::size_t frozen_changed = 0, trainable_moved = 0, frozen_total = 0;
    for (const Parameter* p : model.parameters()) {
      const bool same = p->value == before.at(p->name);
      if (expected.count(p->name)) {
        trainable_moved += !same;
      } else {
        ++frozen_total;
        frozen_changed += !same;
      }
    }
    v.detail << to_string(policy) << ": " << actual.size() << " trainable tensors, " << frozen_total
             << " frozen unchanged=" << (frozen_changed == 0 ? "yes" : "no") << "; ";
    v.require(actual == expected, to_string(policy) + " trainable set");
    v.require(frozen_changed == 0, to_string(policy) + " frozen parameters changed");
    v.require(trainable_moved == expected.size(), to_string(policy) + " trainable parameters idle");
  }
}

struct EndToEnd {
  std::optional<Model> model;
  std::vector<Chunk> corpus;
  TrialSet task;
  SplitPlan split;
};

void end_to_end_check(Verdict& v, EndToEnd& out) {
  CorpusSpec cs;  // 10 subjects x 20 chunks
  cs.seed = 11;
  out.corpus = synth_pretraining_corpus(cs);
  TaskSpec ts;
  ts.seed = 21;
  out.task = synth_task(ts);
  out.split = make_split(out.task.subjects(), SplitScheme::kfold, 5, 4);

  auto run = [&](double lambda, Model& model, double& drop, double& probe) {
    TrainConfig tc;
    tc.lambda = lambda;
    tc.iterations = 500;
    tc.pretrain_batch_size = 4;
    tc.seed = 3;
    BandPowerCache cache(19);
    const PretrainResult r = pretrain(model, out.corpus, tc, {}, &cache);
    const std::size_t n = r.log.size();
    drop = 1.0 - window_mean(r.log, n - 25, n) / window_mean(r.log, 0, 25);
    probe = mean_accuracy(finetune(&model, model.config(), out.task, out.split, probe_config(5)));
  };

  out.model.emplace(ModelConfig::desk(), 7);
  double drop = 0.0, probe = 0.0;
  const auto t0 = clk::now();
  run(5.0, *out.model, drop, probe);
  const double knowledge_secs = std::chrono::duration<double>(clk::now() - t0).count();

  Model vanilla(ModelConfig::desk(), 7);
  double vanilla_drop = 0.0, vanilla_probe = 0.0;
  run(0.0, vanilla, vanilla_drop, vanilla_probe);

  v.detail << out.corpus.size() << " chunks, 500 iterations: knowledge loss fell "
           << 100.0 * drop << "%, probe accuracy " << probe << " (" << knowledge_secs
           << " s); lambda 0: knowledge loss change " << 100.0 * vanilla_drop
           << "%, probe accuracy " << vanilla_probe;
  v.require(drop >= 0.5, "knowledge loss drop");
  v.require(probe >= 0.9, "probe accuracy");
  v.require(knowledge_secs <= 20 * 60, "knowledge run time");
}

void sweep_check(Verdict& v, const EndToEnd& e2e) {
  if (!e2e.model) throw std::runtime_error("no pre-trained model from the end-to-end run");
  testing::TempDir dir("sweep");
  SweepInputs in;
  in.model = e2e.model->config();
  in.train = probe_config(5);
  in.task = &e2e.task;
  in.split = e2e.split;
  in.pretrained = &*e2e.model;
  in.experiment_id = "knowledge-s4/linear_probe";
  const SweepResult ft = sweep(SweepAxis::finetune_fraction, {1.0, 0.5, 0.3, 0.1}, in);
  write_results_csv(dir / "results.csv", ft.rows);
  {
    std::ofstream csv(dir / "summary.csv");
    csv << "fraction,mean_accuracy,std_accuracy,n_folds\n";
    for (const auto& s : ft.summary) csv << s.fraction << ',' << s.mean << ',' << s.std << ',' << s.n_folds << '\n';
  }
  write_svg(dir / "accuracy_vs_fraction.svg",
            PlotSpec{"Accuracy vs fine-tuning data", "fine-tuning data (%)", "accuracy (%)", true, false},
            fraction_series(ft.rows, SweepAxis::finetune_fraction));
  std::size_t csv_rows = 0;
  {
    std::ifstream in_csv(dir / "summary.csv");
    std::string line;
    std::getline(in_csv, line);
    while (std::getline(in_csv, line)) csv_rows += !line.empty();
  }
  std::map<double, double> acc;
  for (const auto& s : ft.summary) acc[s.fraction] = s.mean;
  v.detail << "finetune_fraction:";
  for (const auto& s : ft.summary) v.detail << " " << s.fraction << "->" << s.mean;
  v.require(csv_rows == 4, "4-row summary CSV");
  v.require(std::filesystem::file_size(dir / "accuracy_vs_fraction.svg") > 0, "plot written");
  v.require(acc.size() == 4 && acc[1.0] >= acc[0.1] - 0.05, "acc(1.0) >= acc(0.1) - 0.05");

  SweepInputs pre = in;
  pre.pretrained = nullptr;
  pre.corpus = &e2e.corpus;
  pre.train.lambda = 5.0;
  pre.train.iterations = 200;
  pre.train.pretrain_batch_size = 4;
  pre.train.seed = 3;
  pre.experiment_id = "knowledge-s4/linear_probe";
  const SweepResult pt = sweep(SweepAxis::pretrain_fraction, {1.0, 0.01}, pre);
  const double chance = 1.0 / static_cast<double>(e2e.task.n_classes());
  v.detail << "; pretrain_fraction (200 iterations per cell):";
  for (const auto& s : pt.summary) {
    v.detail << " " << s.fraction << "->" << s.mean;
    v.require(s.mean > chance, "pretrain fraction " + std::to_string(s.fraction) + " above chance");
  }
  v.require(pt.summary.size() == 2, "two pretrain cells");
}

void determinism_check(Verdict& v, const EndToEnd& e2e) {
  if (!e2e.model) throw std::runtime_error("no pre-trained model from the end-to-end run");
  auto trajectory = [&] {
    Model m(ModelConfig::desk(), 31);
    TrainConfig tc;
    tc.iterations = 10;
    tc.pretrain_batch_size = 4;
    tc.seed = 32;
    return pretrain(m, e2e.corpus, tc).log;
  };
  const auto a = trajectory(), b = trajectory();
  bool same_losses = a.size() == b.size();
  for (std::size_t i = 0; same_losses && i < a.size(); ++i) {
    same_losses = a[i].loss.cos_sim_loss == b[i].loss.cos_sim_loss &&
                  a[i].loss.knowledge_loss == b[i].loss.knowledge_loss &&
                  a[i].loss.combined == b[i].loss.combined;
  }

  testing::TempDir dir("determinism");
  Model original = *e2e.model;
  save_checkpoint(dir / "model.ckpt", original, {"knowledge-s4", 3, 500, 5.0});
  Model restored = load_checkpoint(dir / "model.ckpt").restore();
  const Tensor x = stack({&e2e.corpus[0].data, &e2e.corpus[1].data}, 19, kChunkSamples);
  const Context ctx;
  const Tensor e1 = original.temporal_block(original.encode(x, ctx), ctx);
  const Tensor e2 = restored.temporal_block(restored.encode(x, ctx), ctx);
  const bool same_eval = e1 == e2 && original.decode(e1, ctx) == restored.decode(e2, ctx) &&
                         original.project_bandpower(e1, ctx) == restored.project_bandpower(e2, ctx);

  const Recording rec = synth_recording({{"Cz", {{10.0, 20.0}}}, {"Pz", {{6.0, 5.0}}}}, 2.0, 8.0, 250.0, 33);
  Recording annotated = rec;
  annotated.subject_id = "sub-7";
  annotated.annotations.push_back({1.0, 2.5, "left"});
  write_recording(annotated, dir / "a.erf");
  const Recording back = load_recording(dir / "a.erf");
  write_recording(back, dir / "b.erf");
  auto bytes = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const bool same_erf = back.data == annotated.data && back.channels == annotated.channels &&
                        back.fs == annotated.fs && back.subject_id == annotated.subject_id &&
                        back.annotations == annotated.annotations &&
                        bytes(dir / "a.erf") == bytes(dir / "b.erf");

  v.detail << "loss trajectories identical: " << (same_losses ? "yes" : "no")
           << "; checkpoint eval outputs identical: " << (same_eval ? "yes" : "no")
           << "; ERF round trip identical: " << (same_erf ? "yes" : "no");
  v.require(same_losses, "loss trajectories");
  v.require(same_eval, "checkpoint round trip");
  v.require(same_erf, "ERF round trip");
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  EndToEnd e2e;
  criterion(1, 10, band_power_check);
  criterion(2, 30, filter_check);
  criterion(3, 60, ssm_check);
  criterion(4, 300, gradient_check);
  criterion(5, 600, shape_and_loss_check);
  criterion(6, 600, parameter_count_check);
  criterion(7, 1800, freeze_check);
  criterion(8, 2400, [&](Verdict& v) { end_to_end_check(v, e2e); });
  criterion(9, 2400, [&](Verdict& v) { sweep_check(v, e2e); });
  criterion(10, 600, [&](Verdict& v) { determinism_check(v, e2e); });
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
