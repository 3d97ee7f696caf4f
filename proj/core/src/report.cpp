#include "kgeeg/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "kgeeg/error.hpp"

namespace kgeeg {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string pct(double mean, double sd) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", 100.0 * mean, 100.0 * sd);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, const std::filesystem::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw DataError(path.string() + ": expected header '" + header + "'");
  }
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

constexpr const char* kResultsHeader = "experiment_id,axis,fraction,fold,accuracy,lr,seed";
constexpr const char* kLogHeader = "iteration,cos_sim_loss,knowledge_loss,combined,wall_time_s";

}  // namespace

void write_results_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << kResultsHeader << "\n";
  for (const auto& r : rows) {
    if (r.experiment_id.find(',') != std::string::npos) {
      throw ParameterError("experiment id must not contain commas");
    }
    out << r.experiment_id << "," << to_string(r.axis) << "," << num(r.fraction) << "," << r.fold
        << "," << num(r.accuracy) << "," << num(r.lr) << "," << r.seed << "\n";
  }
}

std::vector<SweepRow> read_results_csv(const std::filesystem::path& path) {
  std::vector<SweepRow> rows;
  std::size_t n = 1;
  for (const auto& line : read_lines(path, kResultsHeader)) {
    ++n;
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw DataError(path.string() + ":" + std::to_string(n) + ": expected 7 columns");
    SweepRow r;
    r.experiment_id = cells[0];
    try {
      r.axis = parse_sweep_axis(cells[1]);
    } catch (const ParameterError& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
    r.fraction = to_double(cells[2], path, n);
    r.fold = static_cast<std::size_t>(to_double(cells[3], path, n));
    r.accuracy = to_double(cells[4], path, n);
    r.lr = to_double(cells[5], path, n);
    r.seed = static_cast<std::uint64_t>(std::stoull(cells[6]));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_training_log(const std::filesystem::path& path, const std::vector<LossRecord>& log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << kLogHeader << "\n";
  for (const auto& r : log) {
    out << r.iteration << "," << num(r.loss.cos_sim_loss) << "," << num(r.loss.knowledge_loss)
        << "," << num(r.loss.combined) << "," << num(r.wall_time_s) << "\n";
  }
}

std::vector<LossRecord> read_training_log(const std::filesystem::path& path) {
  std::vector<LossRecord> log;
  std::size_t n = 1;
  for (const auto& line : read_lines(path, kLogHeader)) {
    ++n;
    const auto cells = split_csv(line);
    if (cells.size() != 5) throw DataError(path.string() + ":" + std::to_string(n) + ": expected 5 columns");
    LossRecord r;
    r.iteration = static_cast<std::size_t>(to_double(cells[0], path, n));
    r.loss.cos_sim_loss = to_double(cells[1], path, n);
    r.loss.knowledge_loss = to_double(cells[2], path, n);
    r.loss.combined = to_double(cells[3], path, n);
    r.wall_time_s = to_double(cells[4], path, n);
    log.push_back(r);
  }
  return log;
}

std::vector<Series> fraction_series(const std::vector<SweepRow>& rows, SweepAxis axis) {
  std::map<std::string, std::vector<SweepRow>> by_experiment;
  for (const auto& r : rows) {
    if (r.axis == axis) by_experiment[r.experiment_id].push_back(r);
  }
  std::vector<Series> out;
  for (const auto& [id, group] : by_experiment) {
    Series s;
    s.name = id;
    for (const auto& summary : summarize(group)) {
      s.x.push_back(100.0 * summary.fraction);
      s.y.push_back(100.0 * summary.mean);
      s.err.push_back(100.0 * summary.std);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_report(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw DataError("no results to report");
  std::ostringstream o;
  std::map<std::string, std::vector<SweepRow>> full;
  for (const auto& r : rows) {
    if (r.fraction == 1.0) full[r.experiment_id].push_back(r);
  }
  o << "## Evaluation accuracy (full data)\n\n";
  o << "| Experiment | Folds | Accuracy (%) |\n|---|---|---|\n";
  for (const auto& [id, group] : full) {
    std::vector<SweepRow> pooled = group;
    for (auto& r : pooled) r.axis = SweepAxis::finetune_fraction;
    const auto s = summarize(pooled);
    o << "| " << id << " | " << s.front().n_folds << " | " << pct(s.front().mean, s.front().std)
      << " |\n";
  }
  for (SweepAxis axis : {SweepAxis::pretrain_fraction, SweepAxis::finetune_fraction}) {
    std::map<std::string, std::vector<SweepRow>> by_experiment;
    for (const auto& r : rows) {
      if (r.axis == axis) by_experiment[r.experiment_id].push_back(r);
    }
    if (by_experiment.empty()) continue;
    o << "\n## Accuracy vs. " << (axis == SweepAxis::pretrain_fraction ? "pre-training" : "fine-tuning")
      << " data fraction\n\n";
    o << "| Experiment | Fraction (%) | Folds | Accuracy (%) |\n|---|---|---|---|\n";
    for (const auto& [id, group] : by_experiment) {
      for (const auto& s : summarize(group)) {
        char frac[32];
        std::snprintf(frac, sizeof(frac), "%g", 100.0 * s.fraction);
        o << "| " << id << " | " << frac << " | " << s.n_folds << " | " << pct(s.mean, s.std)
          << " |\n";
      }
    }
  }
  return o.str();
}

}  // namespace kgeeg
