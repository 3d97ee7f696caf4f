#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgeeg/plot.hpp"
#include "kgeeg/training.hpp"

namespace kgeeg {

// Results CSV: experiment_id,axis,fraction,fold,accuracy,lr,seed
void write_results_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_results_csv(const std::filesystem::path& path);

// Training log CSV: iteration,cos_sim_loss,knowledge_loss,combined,wall_time_s
void write_training_log(const std::filesystem::path& path, const std::vector<LossRecord>& log);
std::vector<LossRecord> read_training_log(const std::filesystem::path& path);

// Markdown summary of every results row: a per-experiment accuracy table at
// full data, a pre-training-fraction table and a fine-tuning-fraction table.
std::string render_report(const std::vector<SweepRow>& rows);

// Accuracy vs. fraction for one axis, one line per experiment (empty when no
// row uses the axis).
std::vector<Series> fraction_series(const std::vector<SweepRow>& rows, SweepAxis axis);

}  // namespace kgeeg
