#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kgeeg/dataset.hpp"
#include "kgeeg/network.hpp"
#include "kgeeg/objectives.hpp"
#include "kgeeg/optimizer.hpp"
#include "kgeeg/split.hpp"

namespace kgeeg {

enum class TrainMode { pretrain, finetune, scratch };
enum class FreezePolicy { linear_probe, last_s4, all_s4, fully_trainable };

struct TrainConfig {
  TrainMode mode = TrainMode::pretrain;
  double lambda = kDefaultKnowledgeWeight;  // 0 gives the vanilla objective
  std::size_t iterations = 500;
  std::size_t pretrain_batch_size = 32;
  std::size_t finetune_batch_size = 64;
  double lr = 1e-3;  // pre-training
  std::vector<double> lr_grid = {1e-3, 1e-4};  // fine-tuning candidates
  std::uint64_t seed = 0;
  FreezePolicy freeze_policy = FreezePolicy::linear_probe;
  double pretrain_fraction = 1.0;
  double finetune_fraction = 1.0;
  std::size_t epochs = 50;
  std::size_t patience = 10;
  double validation_fraction = 0.2;
  std::size_t checkpoint_every = 0;  // 0: only at the end
  HeadConfig head;

  void validate() const;
};

std::string to_string(TrainMode mode);
std::string to_string(FreezePolicy policy);
TrainMode parse_train_mode(const std::string& text);
FreezePolicy parse_freeze_policy(const std::string& text);
// "vanilla-s4" for lambda == 0, "knowledge-s4" otherwise.
std::string run_label(double lambda);

// --------------------------------------------------------------- pretrain

struct LossRecord {
  std::size_t iteration = 0;  // 1-based
  LossReport loss;
  double wall_time_s = 0.0;
};

struct PretrainHooks {
  std::function<void(const LossRecord&)> on_step;
  // Called every cfg.checkpoint_every iterations and after the last one.
  std::function<void(Model&, const Adam&, std::size_t iteration)> on_checkpoint;
};

// Ground-truth band power per chunk, computed once and optionally persisted
// under `cache_dir` keyed by a content hash of the chunk.
class BandPowerCache {
 public:
  explicit BandPowerCache(std::size_t n_channels, std::optional<std::filesystem::path> dir = {});
  const Tensor& get(const Chunk& chunk);
  std::size_t hits() const { return hits_; }
  std::size_t computed() const { return computed_; }

 private:
  std::size_t n_channels_;
  std::optional<std::filesystem::path> dir_;
  std::unordered_map<std::uint64_t, Tensor> memory_;
  std::size_t hits_ = 0, computed_ = 0;
};

struct PretrainResult {
  std::vector<LossRecord> log;
};

// Runs cfg.iterations Adam steps of the combined objective over minibatches
// drawn from `corpus` (reshuffled every pass). Throws DataError for an empty
// corpus and DivergenceError on a non-finite loss.
PretrainResult pretrain(Model& model, const std::vector<Chunk>& corpus, const TrainConfig& cfg,
                        const PretrainHooks& hooks = {}, BandPowerCache* cache = nullptr);

// One forward/backward pass of the pre-training objective on a batch
// [B x channels x time], leaving gradients in the model parameters.
LossReport pretrain_gradients(Model& model, const Tensor& batch, const Tensor& target,
                              double lambda, const Context& ctx);

// ------------------------------------------------------------- fine-tune

// Marks parameters trainable according to `policy` and returns them. The
// decoder and projector are never trainable here. Requires a head.
std::vector<Parameter*> apply_freeze_policy(Model& model, FreezePolicy policy);

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t n = 0;
};

EvalResult score_predictions(const std::vector<std::size_t>& predicted,
                             const std::vector<std::size_t>& labels, std::size_t n_classes);

// Eval-mode argmax accuracy of `model` (with head) over `trials`. Throws
// DataError for an empty set.
EvalResult evaluate(Model& model, const std::vector<Trial>& trials, std::size_t n_classes);

struct FoldResult {
  std::size_t fold = 0;
  double accuracy = 0.0;
  std::size_t n_eval = 0;
  double lr = 0.0;
  std::vector<double> validation_curve;  // inner-validation accuracy per epoch for `lr`
  EvalResult eval;
};

// Per fold: subset training trials by cfg.finetune_fraction, pick the
// learning rate on an inner subject-wise validation split, train the head
// (plus whatever the freeze policy unfreezes) and score the held-out
// subjects. `pretrained` may be null only for fully_trainable.
std::vector<FoldResult> finetune(const Model* pretrained, const ModelConfig& model_cfg,
                                 const TrialSet& task, const SplitPlan& split,
                                 const TrainConfig& cfg);

// ----------------------------------------------------------------- sweep

enum class SweepAxis { pretrain_fraction, finetune_fraction };
std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

struct SweepRow {
  std::string experiment_id;
  SweepAxis axis = SweepAxis::finetune_fraction;
  double fraction = 1.0;
  std::size_t fold = 0;
  double accuracy = 0.0;
  double lr = 0.0;
  std::uint64_t seed = 0;
};

struct SweepSummary {
  double fraction = 1.0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n_folds = 0;
};

struct SweepInputs {
  ModelConfig model;
  TrainConfig train;
  const TrialSet* task = nullptr;
  SplitPlan split;
  const Model* pretrained = nullptr;         // finetune_fraction axis
  const std::vector<Chunk>* corpus = nullptr;  // pretrain_fraction axis
  std::string experiment_id = "sweep";
  std::size_t workers = 1;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummary> summary;
};

// One cell per value. finetune_fraction cells fine-tune `pretrained`;
// pretrain_fraction cells pre-train a fresh model on a subset of `corpus`
// first. Cells run on up to `workers` threads; results do not depend on it.
SweepResult sweep(SweepAxis axis, const std::vector<double>& values, const SweepInputs& in);

std::vector<SweepSummary> summarize(const std::vector<SweepRow>& rows);

}  // namespace kgeeg
