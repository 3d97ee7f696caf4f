#include "kgeeg/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <thread>

#include "kgeeg/bandpower.hpp"
#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Tensor stack_rows(const std::vector<const std::vector<float>*>& rows, std::size_t channels,
                  std::size_t samples) {
  const std::size_t per = channels * samples;
  Tensor out({rows.size(), channels, samples});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]->size() != per) {
      throw ShapeError("input of " + std::to_string(rows[i]->size()) + " values, expected " +
                       std::to_string(channels) + " x " + std::to_string(samples));
    }
    std::copy(rows[i]->begin(), rows[i]->end(), out.data() + i * per);
  }
  return out;
}

// The given rows of a tensor along axis 0.
Tensor slice_rows(const Tensor& t, const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> shape = t.shape();
  const std::size_t per = t.size() / shape[0];
  shape[0] = idx.size();
  Tensor out(shape);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy(t.data() + idx[i] * per, t.data() + (idx[i] + 1) * per, out.data() + i * per);
  }
  return out;
}

std::vector<std::size_t> argmax_rows(const Tensor& logits) {
  const std::size_t classes = logits.dim(1);
  std::vector<std::size_t> out(logits.dim(0));
  for (std::size_t b = 0; b < out.size(); ++b) {
    const double* z = logits.data() + b * classes;
    out[b] = static_cast<std::size_t>(std::max_element(z, z + classes) - z);
  }
  return out;
}

constexpr std::size_t kInferenceBatch = 8;

}  // namespace

// ------------------------------------------------------------ TrainConfig

void TrainConfig::validate() const {
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be non-negative");
  if (pretrain_batch_size == 0 || finetune_batch_size == 0) {
    throw ParameterError("batch sizes must be positive");
  }
  if (!(lr > 0.0)) throw ParameterError("lr must be positive");
  if (lr_grid.empty()) throw ParameterError("lr_grid must not be empty");
  for (double v : lr_grid) {
    if (!(v > 0.0)) throw ParameterError("lr_grid entries must be positive");
  }
  for (double f : {pretrain_fraction, finetune_fraction}) {
    if (!(f > 0.0) || f > 1.0) throw ParameterError("fractions must lie in (0, 1]");
  }
  if (epochs == 0) throw ParameterError("epochs must be positive");
  if (!(validation_fraction > 0.0) || validation_fraction >= 1.0) {
    throw ParameterError("validation_fraction must lie in (0, 1)");
  }
  head.validate();
}

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::pretrain: return "pretrain";
    case TrainMode::finetune: return "finetune";
    case TrainMode::scratch: return "scratch";
  }
  return "unknown";
}

std::string to_string(FreezePolicy policy) {
  switch (policy) {
    case FreezePolicy::linear_probe: return "linear_probe";
    case FreezePolicy::last_s4: return "last_s4";
    case FreezePolicy::all_s4: return "all_s4";
    case FreezePolicy::fully_trainable: return "fully_trainable";
  }
  return "unknown";
}

TrainMode parse_train_mode(const std::string& text) {
  for (auto m : {TrainMode::pretrain, TrainMode::finetune, TrainMode::scratch}) {
    if (to_string(m) == text) return m;
  }
  throw ParameterError("unknown training mode '" + text + "'");
}

FreezePolicy parse_freeze_policy(const std::string& text) {
  for (auto p : {FreezePolicy::linear_probe, FreezePolicy::last_s4, FreezePolicy::all_s4,
                 FreezePolicy::fully_trainable}) {
    if (to_string(p) == text) return p;
  }
  throw ParameterError("unknown freeze policy '" + text + "'");
}

std::string run_label(double lambda) { return lambda == 0.0 ? "vanilla-s4" : "knowledge-s4"; }

// --------------------------------------------------------- BandPowerCache

BandPowerCache::BandPowerCache(std::size_t n_channels, std::optional<std::filesystem::path> dir)
    : n_channels_(n_channels), dir_(std::move(dir)) {
  if (dir_) std::filesystem::create_directories(*dir_);
}

const Tensor& BandPowerCache::get(const Chunk& chunk) {
  const std::uint64_t key = fnv1a(chunk.data.data(), chunk.data.size() * sizeof(float),
                                  fnv1a(std::to_string(n_channels_)));
  if (auto it = memory_.find(key); it != memory_.end()) {
    ++hits_;
    return it->second;
  }
  const std::size_t windows = chunk.data.size() / n_channels_ / kPowerWindow;
  const std::vector<std::size_t> shape = {n_channels_, BandDefinition::standard().size(), windows};
  if (dir_) {
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx.bp", static_cast<unsigned long long>(key));
    const auto path = *dir_ / name;
    std::ifstream in(path, std::ios::binary);
    if (in) {
      Tensor t(shape);
      in.read(reinterpret_cast<char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
      if (in.gcount() == static_cast<std::streamsize>(t.size() * sizeof(double))) {
        ++hits_;
        return memory_.emplace(key, std::move(t)).first->second;
      }
    }
    Tensor t = band_power(chunk.data, n_channels_);
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    ++computed_;
    return memory_.emplace(key, std::move(t)).first->second;
  }
  ++computed_;
  return memory_.emplace(key, band_power(chunk.data, n_channels_)).first->second;
}

// --------------------------------------------------------------- pretrain

LossReport pretrain_gradients(Model& model, const Tensor& batch, const Tensor& target,
                              double lambda, const Context& ctx) {
  const Tensor c = model.encode(batch, ctx);
  const Tensor e = model.temporal_block(c, ctx);
  const Tensor recon = model.decode(e, ctx);
  const Tensor estimate = model.project_bandpower(e, ctx);
  LossGrads grads;
  const LossReport report = combined_loss(batch, recon, target, estimate, lambda, &grads);
  Tensor g_e = model.decode_backward(grads.recon);
  g_e.add(model.project_bandpower_backward(grads.estimate));
  model.encode_backward(model.temporal_block_backward(g_e));
  return report;
}

PretrainResult pretrain(Model& model, const std::vector<Chunk>& corpus, const TrainConfig& cfg,
                        const PretrainHooks& hooks, BandPowerCache* cache) {
  cfg.validate();
  if (corpus.empty()) throw DataError("pre-training corpus is empty");
  const ModelConfig& mc = model.config();
  if (mc.window_samples() != kPowerWindow) {
    throw ParameterError("pooled window covers " + std::to_string(mc.window_samples()) +
                         " samples; band-power targets need " + std::to_string(kPowerWindow));
  }
  BandPowerCache local(mc.n_channels);
  BandPowerCache& targets = cache ? *cache : local;

  for (auto& g : model.groups()) {
    for (Parameter* p : g.params) p->trainable = g.part != Part::head;
  }
  Adam opt(model.parameters(), AdamConfig{cfg.lr});
  std::mt19937_64 order_rng(mix(cfg.seed, 1));
  std::mt19937_64 dropout_rng(mix(cfg.seed, 2));
  const Context ctx{Mode::train, &dropout_rng};

  std::vector<std::size_t> order(corpus.size());
  std::size_t cursor = order.size();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t bands = BandDefinition::standard().size();
  const std::size_t windows = mc.n_windows();

  PretrainResult result;
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    std::vector<const std::vector<float>*> rows;
    Tensor target({cfg.pretrain_batch_size, mc.n_channels, bands, windows});
    for (std::size_t b = 0; b < cfg.pretrain_batch_size; ++b) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      const Chunk& chunk = corpus[order[cursor++]];
      rows.push_back(&chunk.data);
      const Tensor& gt = targets.get(chunk);
      if (gt.size() * cfg.pretrain_batch_size != target.size()) {
        throw ShapeError("chunk does not match the model input " +
                         std::to_string(mc.n_channels) + " x " + std::to_string(mc.n_time_steps));
      }
      std::copy(gt.data(), gt.data() + gt.size(), target.data() + b * gt.size());
    }
    const Tensor batch = stack_rows(rows, mc.n_channels, mc.n_time_steps);
    opt.zero_grad();
    const LossReport report = pretrain_gradients(model, batch, target, cfg.lambda, ctx);
    if (!std::isfinite(report.combined)) throw DivergenceError(it);
    opt.step();
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back({it, report, wall});
    if (hooks.on_step) hooks.on_step(result.log.back());
    const bool due = cfg.checkpoint_every > 0 && it % cfg.checkpoint_every == 0;
    if (hooks.on_checkpoint && (due || it == cfg.iterations)) hooks.on_checkpoint(model, opt, it);
  }
  return result;
}

// ------------------------------------------------------------- fine-tune

std::vector<Parameter*> apply_freeze_policy(Model& model, FreezePolicy policy) {
  if (!model.has_head()) throw ParameterError("freeze policies need a classification head");
  const std::size_t last = model.config().n_s4_layers - 1;
  std::vector<Parameter*> trainable;
  for (auto& g : model.groups()) {
    bool on = false;
    switch (g.part) {
      case Part::head: on = true; break;
      case Part::s4:
        on = policy == FreezePolicy::all_s4 || policy == FreezePolicy::fully_trainable ||
             (policy == FreezePolicy::last_s4 && g.index == last);
        break;
      case Part::temporal_in:
        on = policy == FreezePolicy::all_s4 || policy == FreezePolicy::fully_trainable;
        break;
      case Part::encoder: on = policy == FreezePolicy::fully_trainable; break;
      case Part::decoder:
      case Part::projector: on = false; break;
    }
    for (Parameter* p : g.params) {
      p->trainable = on;
      if (on) trainable.push_back(p);
    }
  }
  return trainable;
}

EvalResult score_predictions(const std::vector<std::size_t>& predicted,
                             const std::vector<std::size_t>& labels, std::size_t n_classes) {
  if (labels.empty()) throw DataError("evaluation set is empty");
  if (predicted.size() != labels.size()) throw ShapeError("prediction/label count mismatch");
  EvalResult r;
  r.n = labels.size();
  r.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes || predicted[i] >= n_classes) {
      throw ParameterError("class index out of range");
    }
    ++r.confusion[labels[i]][predicted[i]];
    if (labels[i] == predicted[i]) ++correct;
  }
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n);
  return r;
}

EvalResult evaluate(Model& model, const std::vector<Trial>& trials, std::size_t n_classes) {
  if (trials.empty()) throw DataError("evaluation set is empty");
  const ModelConfig& mc = model.config();
  const Context ctx{Mode::eval, nullptr};
  std::vector<std::size_t> predicted, labels;
  for (std::size_t begin = 0; begin < trials.size(); begin += kInferenceBatch) {
    const std::size_t end = std::min(trials.size(), begin + kInferenceBatch);
    std::vector<const std::vector<float>*> rows;
    for (std::size_t i = begin; i < end; ++i) {
      rows.push_back(&trials[i].data);
      labels.push_back(trials[i].label);
    }
    const Tensor x = stack_rows(rows, mc.n_channels, mc.n_time_steps);
    const Tensor logits = model.classify(model.temporal_block(model.encode(x, ctx), ctx), ctx);
    for (std::size_t p : argmax_rows(logits)) predicted.push_back(p);
  }
  return score_predictions(predicted, labels, n_classes);
}

namespace {

// What the frozen prefix produces for each policy, so training only runs the
// trainable suffix:
//   linear_probe:    time-averaged E [N x d]
//   last_s4:         input of the last S4 module [N x d x T]
//   all_s4:          encoder output C [N x d x T]
//   fully_trainable: nothing cached; inputs are read from the trials.
class FeatureStore {
 public:
  FeatureStore(Model& model, FreezePolicy policy, const std::vector<Trial>& trials)
      : policy_(policy), trials_(&trials), mc_(model.config()) {
    if (policy == FreezePolicy::fully_trainable) return;
    const Context ctx{Mode::eval, nullptr};
    const std::size_t last = model.n_temporal_stages() - 1;
    for (std::size_t begin = 0; begin < trials.size(); begin += kInferenceBatch) {
      const std::size_t end = std::min(trials.size(), begin + kInferenceBatch);
      std::vector<const std::vector<float>*> rows;
      for (std::size_t i = begin; i < end; ++i) rows.push_back(&trials[i].data);
      Tensor f = model.encode(stack_rows(rows, mc_.n_channels, mc_.n_time_steps), ctx);
      if (policy == FreezePolicy::linear_probe) {
        f = ClassifierHead::mean_over_time(model.temporal_block(f, ctx));
      } else if (policy == FreezePolicy::last_s4) {
        f = model.temporal_block(f, ctx, 0, last);
      }
      if (features_.empty()) {
        std::vector<std::size_t> shape = f.shape();
        shape[0] = trials.size();
        features_ = Tensor(shape);
      }
      std::copy(f.data(), f.data() + f.size(), features_.data() + begin * (f.size() / f.dim(0)));
    }
  }

  Tensor batch(const std::vector<std::size_t>& idx) const {
    if (policy_ != FreezePolicy::fully_trainable) return slice_rows(features_, idx);
    std::vector<const std::vector<float>*> rows;
    for (std::size_t i : idx) rows.push_back(&(*trials_)[i].data);
    return stack_rows(rows, mc_.n_channels, mc_.n_time_steps);
  }

 private:
  FreezePolicy policy_;
  const std::vector<Trial>* trials_;
  ModelConfig mc_;
  Tensor features_;
};

// Frozen stages always run in eval mode; `ctx` applies to the trainable part.
Tensor suffix_forward(Model& model, FreezePolicy policy, const Tensor& f, const Context& ctx) {
  const std::size_t last = model.n_temporal_stages() - 1;
  switch (policy) {
    case FreezePolicy::linear_probe: return model.head().forward_pooled(f, ctx);
    case FreezePolicy::last_s4: return model.classify(model.temporal_block(f, ctx, last), ctx);
    case FreezePolicy::all_s4: return model.classify(model.temporal_block(f, ctx), ctx);
    case FreezePolicy::fully_trainable:
      return model.classify(model.temporal_block(model.encode(f, ctx), ctx), ctx);
  }
  throw ParameterError("unknown freeze policy");
}

void suffix_backward(Model& model, FreezePolicy policy, const Tensor& grad_logits) {
  if (policy == FreezePolicy::linear_probe) {
    model.head().backward_pooled(grad_logits);
    return;
  }
  const Tensor g = model.temporal_block_backward(model.classify_backward(grad_logits));
  if (policy == FreezePolicy::fully_trainable) model.encode_backward(g);
}

std::vector<std::size_t> predict(Model& model, FreezePolicy policy, const FeatureStore& store,
                                 const std::vector<std::size_t>& idx) {
  const Context ctx{Mode::eval, nullptr};
  std::vector<std::size_t> out;
  for (std::size_t begin = 0; begin < idx.size(); begin += kInferenceBatch) {
    const std::vector<std::size_t> part(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                        idx.begin() + static_cast<std::ptrdiff_t>(
                                                          std::min(idx.size(), begin + kInferenceBatch)));
    for (std::size_t p : argmax_rows(suffix_forward(model, policy, store.batch(part), ctx))) {
      out.push_back(p);
    }
  }
  return out;
}

double accuracy_on(Model& model, FreezePolicy policy, const FeatureStore& store,
                   const std::vector<std::size_t>& idx, const std::vector<Trial>& trials,
                   std::size_t n_classes) {
  std::vector<std::size_t> labels;
  for (std::size_t i : idx) labels.push_back(trials[i].label);
  return score_predictions(predict(model, policy, store, idx), labels, n_classes).accuracy;
}

struct Candidate {
  double lr = 0.0;
  double best_val = -1.0;
  std::vector<double> curve;
  std::vector<Tensor> best_values;  // trainable parameter values at best_val
};

// Trains the trainable suffix with early stopping on validation accuracy and
// leaves the model at its best-validation state.
Candidate train_candidate(Model& model, FreezePolicy policy, const FeatureStore& store,
                          const std::vector<Trial>& trials, std::size_t n_classes,
                          const std::vector<std::size_t>& train_idx,
                          const std::vector<std::size_t>& val_idx, double lr,
                          const TrainConfig& cfg, std::uint64_t seed) {
  const std::vector<Parameter*> params = apply_freeze_policy(model, policy);
  Adam opt(params, AdamConfig{lr});
  std::mt19937_64 order_rng(mix(seed, 11));
  std::mt19937_64 dropout_rng(mix(seed, 12));
  const Context ctx{Mode::train, &dropout_rng};
  Candidate c;
  c.lr = lr;
  std::size_t stale = 0;
  std::vector<std::size_t> order = train_idx;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.finetune_batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.finetune_batch_size);
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<std::size_t> labels;
      for (std::size_t i : idx) labels.push_back(trials[i].label);
      opt.zero_grad();
      const Tensor logits = suffix_forward(model, policy, store.batch(idx), ctx);
      Tensor grad;
      const double loss = cross_entropy(logits, labels, &grad);
      if (!std::isfinite(loss)) throw DivergenceError(epoch + 1);
      suffix_backward(model, policy, grad);
      opt.step();
    }
    const double val = accuracy_on(model, policy, store, val_idx, trials, n_classes);
    c.curve.push_back(val);
    if (val > c.best_val) {
      c.best_val = val;
      c.best_values.clear();
      for (Parameter* p : params) c.best_values.push_back(p->value);
      stale = 0;
    } else if (++stale >= cfg.patience && cfg.patience > 0) {
      break;
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = c.best_values[k];
  return c;
}

// Inner validation split of `idx`: subject-wise when at least two subjects
// are present, trial-wise otherwise. A lone trial both trains and validates.
void inner_split(const std::vector<Trial>& trials, const std::vector<std::size_t>& idx,
                 double val_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                 std::vector<std::size_t>& val) {
  if (idx.empty()) throw DataError("no training trials left for validation");
  if (idx.size() == 1) {
    train = idx;
    val = idx;
    return;
  }
  std::set<std::string> subject_set;
  for (std::size_t i : idx) subject_set.insert(trials[i].subject_id);
  std::mt19937_64 rng(seed);
  train.clear();
  val.clear();
  if (subject_set.size() >= 2) {
    std::vector<std::string> subjects(subject_set.begin(), subject_set.end());
    std::shuffle(subjects.begin(), subjects.end(), rng);
    const std::size_t n_val = std::min(subjects.size() - 1, fraction_count(subjects.size(),
                                                                          val_fraction));
    const std::set<std::string> held(subjects.begin(),
                                     subjects.begin() + static_cast<std::ptrdiff_t>(n_val));
    for (std::size_t i : idx) (held.count(trials[i].subject_id) ? val : train).push_back(i);
    return;
  }
  std::vector<std::size_t> shuffled = idx;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const std::size_t n_val = std::min(shuffled.size() - 1, fraction_count(idx.size(), val_fraction));
  val.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_val));
  train.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_val), shuffled.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
}

void check_disjoint(const std::vector<std::string>& train, const std::vector<std::string>& eval,
                    std::size_t fold) {
  std::set<std::uint64_t> hashes;
  for (const auto& s : train) hashes.insert(fnv1a(s));
  for (const auto& s : eval) {
    if (hashes.count(fnv1a(s))) {
      throw SplitError("subject '" + s + "' is in both train and eval of fold " +
                       std::to_string(fold));
    }
  }
}

}  // namespace

std::vector<FoldResult> finetune(const Model* pretrained, const ModelConfig& model_cfg,
                                 const TrialSet& task, const SplitPlan& split,
                                 const TrainConfig& cfg) {
  cfg.validate();
  if (!pretrained && cfg.freeze_policy != FreezePolicy::fully_trainable) {
    throw ParameterError("freeze policy " + to_string(cfg.freeze_policy) +
                         " needs a pre-trained checkpoint");
  }
  if (task.trials.empty()) throw DataError("task has no trials");
  if (task.n_classes() < 2) throw DataError("task needs at least two classes");
  const ModelConfig& mc = pretrained ? pretrained->config() : model_cfg;
  if (task.n_channels != mc.n_channels || task.n_samples != mc.n_time_steps) {
    throw ShapeError("task trials are " + std::to_string(task.n_channels) + " x " +
                     std::to_string(task.n_samples) + " but the model expects " +
                     std::to_string(mc.n_channels) + " x " + std::to_string(mc.n_time_steps));
  }
  HeadConfig head = cfg.head;
  head.n_classes = task.n_classes();

  // The frozen prefix is shared by every fold and learning rate.
  Model base = pretrained ? *pretrained : Model(model_cfg, mix(cfg.seed, 21));
  base.attach_head(head, mix(cfg.seed, 22));
  const FeatureStore store(base, cfg.freeze_policy, task.trials);

  std::vector<FoldResult> results;
  for (std::size_t fold = 0; fold < split.n_folds; ++fold) {
    const auto train_subjects = split.train_subjects(fold);
    const auto eval_subjects = split.eval_subjects(fold);
    check_disjoint(train_subjects, eval_subjects, fold);
    const std::set<std::string> train_set(train_subjects.begin(), train_subjects.end());
    const std::set<std::string> eval_set(eval_subjects.begin(), eval_subjects.end());
    std::vector<std::size_t> train_idx, eval_idx;
    for (std::size_t i = 0; i < task.trials.size(); ++i) {
      if (train_set.count(task.trials[i].subject_id)) train_idx.push_back(i);
      if (eval_set.count(task.trials[i].subject_id)) eval_idx.push_back(i);
    }
    if (eval_idx.empty()) throw DataError("fold " + std::to_string(fold) + " has no eval trials");
    std::vector<bool> seen(task.n_classes(), false);
    for (std::size_t i : train_idx) seen[task.trials[i].label] = true;
    for (std::size_t k = 0; k < seen.size(); ++k) {
      if (!seen[k]) {
        throw SplitError("class '" + task.class_names[k] + "' is absent from the training set of fold " +
                         std::to_string(fold));
      }
    }
    const std::vector<std::size_t> kept =
        subset_fraction(train_idx, cfg.finetune_fraction, mix(cfg.seed, 31, fold));
    std::vector<std::size_t> inner_train, inner_val;
    inner_split(task.trials, kept, cfg.validation_fraction, mix(cfg.seed, 32, fold), inner_train,
                inner_val);

    std::optional<Model> best_model;
    Candidate best;
    for (std::size_t k = 0; k < cfg.lr_grid.size(); ++k) {
      Model model = base;
      model.attach_head(head, mix(cfg.seed, 33, fold));
      Candidate c = train_candidate(model, cfg.freeze_policy, store, task.trials,
                                    task.n_classes(), inner_train, inner_val, cfg.lr_grid[k], cfg,
                                    mix(cfg.seed, 34, fold));
      if (c.best_val > best.best_val) {
        best = std::move(c);
        best_model.emplace(std::move(model));
      }
    }
    std::vector<std::size_t> labels;
    for (std::size_t i : eval_idx) labels.push_back(task.trials[i].label);
    FoldResult r;
    r.fold = fold;
    r.lr = best.lr;
    r.validation_curve = best.curve;
    r.eval = score_predictions(predict(*best_model, cfg.freeze_policy, store, eval_idx), labels,
                               task.n_classes());
    r.accuracy = r.eval.accuracy;
    r.n_eval = eval_idx.size();
    results.push_back(std::move(r));
  }
  return results;
}

// ----------------------------------------------------------------- sweep

std::string to_string(SweepAxis axis) {
  return axis == SweepAxis::pretrain_fraction ? "pretrain_fraction" : "finetune_fraction";
}

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "pretrain_fraction") return SweepAxis::pretrain_fraction;
  if (text == "finetune_fraction") return SweepAxis::finetune_fraction;
  throw ParameterError("unknown sweep axis '" + text + "'");
}

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows) {
  std::vector<SweepSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const SweepSummary& s) { return s.fraction == row.fraction; });
    if (it == out.end()) {
      out.push_back({row.fraction, 0.0, 0.0, 0});
      it = out.end() - 1;
    }
    it->mean += row.accuracy;
    ++it->n_folds;
  }
  for (auto& s : out) {
    s.mean /= static_cast<double>(s.n_folds);
    double ss = 0.0;
    for (const auto& row : rows) {
      if (row.fraction == s.fraction) ss += (row.accuracy - s.mean) * (row.accuracy - s.mean);
    }
    s.std = s.n_folds > 1 ? std::sqrt(ss / static_cast<double>(s.n_folds - 1)) : 0.0;
  }
  return out;
}

SweepResult sweep(SweepAxis axis, const std::vector<double>& values, const SweepInputs& in) {
  if (values.empty()) throw ParameterError("sweep needs at least one value");
  if (!in.task) throw DataError("sweep needs a labeled task");
  for (double v : values) {
    if (!(v > 0.0) || v > 1.0) throw ParameterError("sweep fractions must lie in (0, 1]");
  }
  if (axis == SweepAxis::pretrain_fraction && !in.corpus) {
    throw DataError("pretrain_fraction sweep needs a pre-training corpus");
  }
  if (axis == SweepAxis::finetune_fraction && !in.pretrained &&
      in.train.freeze_policy != FreezePolicy::fully_trainable) {
    throw ParameterError("finetune_fraction sweep needs a pre-trained model");
  }
  std::vector<std::vector<FoldResult>> cells(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  auto run_cell = [&](std::size_t k) {
    try {
      TrainConfig cfg = in.train;
      if (axis == SweepAxis::finetune_fraction) {
        cfg.finetune_fraction = values[k];
        cells[k] = finetune(in.pretrained, in.model, *in.task, in.split, cfg);
        return;
      }
      cfg.pretrain_fraction = values[k];
      const std::vector<Chunk> subset = subset_fraction(*in.corpus, values[k], mix(cfg.seed, 41));
      Model model(in.model, cfg.seed);
      pretrain(model, subset, cfg);
      cells[k] = finetune(&model, in.model, *in.task, in.split, cfg);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(in.workers, values.size()));
  if (workers == 1) {
    for (std::size_t k = 0; k < values.size(); ++k) run_cell(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < values.size(); k = next++) run_cell(k);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  SweepResult result;
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (const FoldResult& f : cells[k]) {
      result.rows.push_back({in.experiment_id, axis, values[k], f.fold, f.accuracy, f.lr,
                             in.train.seed});
    }
  }
  result.summary = summarize(result.rows);
  return result;
}

}  // namespace kgeeg
