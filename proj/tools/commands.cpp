#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kgeeg/bandpower.hpp"
#include "kgeeg/checkpoint.hpp"
#include "kgeeg/dataset.hpp"
#include "kgeeg/error.hpp"
#include "kgeeg/montage.hpp"
#include "kgeeg/plot.hpp"
#include "kgeeg/preprocess.hpp"
#include "kgeeg/recording.hpp"
#include "kgeeg/report.hpp"
#include "kgeeg/synth.hpp"
#include "kgeeg/training.hpp"

namespace kgeeg::cli {

namespace fs = std::filesystem;

namespace {

std::vector<Recording> load_all(const std::string& dir) {
  const auto files = list_recordings(dir);
  if (files.empty()) throw DataError("no input: no .erf files in " + dir);
  std::vector<Recording> recs;
  for (const auto& f : files) {
    try {
      recs.push_back(load_recording(f));
    } catch (const Error& e) {
      throw DataError(f.filename().string() + ": " + e.what());
    }
  }
  return recs;
}

std::vector<std::string> channel_names(std::size_t n) {
  if (n == pretraining_channels().size()) return pretraining_channels();
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("CH" + std::to_string(i + 1));
  return names;
}

Recording as_recording(std::vector<float> data, std::size_t n_channels, double fs,
                       const std::string& subject) {
  Recording rec;
  rec.channels = channel_names(n_channels);
  rec.fs = fs;
  rec.n_samples = data.size() / n_channels;
  rec.data = std::move(data);
  rec.subject_id = subject;
  return rec;
}

std::string numbered(const std::string& stem, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu.erf", stem.c_str(), i);
  return buf;
}

// Recordings that already carry every model channel keep exactly those;
// other montages are mapped onto them by electrode proximity.
Recording to_model_channels(const Recording& rec, std::string& note) {
  const auto& wanted = pretraining_channels();
  std::set<std::string> have;
  for (const auto& c : rec.channels) have.insert(canonical_label(c));
  const bool complete = std::all_of(wanted.begin(), wanted.end(), [&](const std::string& w) {
    return have.count(canonical_label(w)) > 0;
  });
  if (complete) return select_channels(rec, wanted);
  MappedRecording mapped = map_channels_by_proximity(rec, wanted, MontageTable::standard());
  std::size_t moved = 0;
  for (const auto& m : mapped.mapping) moved += m.distance > 0.0;
  note = ", " + std::to_string(moved) + " mapped by proximity";
  return std::move(mapped.recording);
}

void check_model_input(const ModelConfig& model, std::size_t n_channels, double fs) {
  if (n_channels != model.n_channels) {
    throw DataError("recordings have " + std::to_string(n_channels) + " channels; the model expects " +
                    std::to_string(model.n_channels));
  }
  if (fs != kModelFs) {
    throw DataError("recordings must be preprocessed to " + std::to_string(kModelFs) + " Hz");
  }
}

std::vector<Chunk> load_corpus(const std::string& dir, const ExperimentConfig& cfg) {
  if (dir.empty()) return synth_pretraining_corpus(cfg.corpus);
  const auto recs = load_all(dir);
  for (const auto& r : recs) check_model_input(cfg.model, r.n_channels(), r.fs);
  auto chunks = chunk_recordings(recs, cfg.model.n_time_steps);
  if (chunks.empty()) throw DataError("no recording in " + dir + " fills one chunk");
  return chunks;
}

TrialSet load_task(const std::string& dir, const ExperimentConfig& cfg, const ModelConfig& model) {
  if (dir.empty()) return synth_task(cfg.task);
  const auto recs = load_all(dir);
  for (const auto& r : recs) check_model_input(model, r.n_channels(), r.fs);
  TrialSet task = extract_trials(recs, model.n_time_steps);
  if (task.trials.empty()) throw DataError("no annotated trials in " + dir);
  return task;
}

std::optional<Checkpoint> read_checkpoint(const std::string& path) {
  if (path.empty()) return std::nullopt;
  if (!fs::exists(path)) throw DataError("checkpoint not found: " + path);
  return load_checkpoint(path);
}

// Results rows are grouped by the backbone they start from and the policy.
std::string experiment_label(const std::optional<Checkpoint>& ckpt, const TrainConfig& train) {
  const std::string model = ckpt ? ckpt->meta.label : "scratch";
  return model + "/" + to_string(train.freeze_policy);
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ParameterError("bad sweep value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParameterError("no sweep values given");
  return out;
}

void write_fold_details(const fs::path& path, const std::vector<FoldResult>& folds,
                        const TrialSet& task) {
  nlohmann::ordered_json j;
  j["classes"] = task.class_names;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : folds) {
    j["folds"].push_back({{"fold", f.fold},
                          {"accuracy", f.accuracy},
                          {"n_eval", f.n_eval},
                          {"lr", f.lr},
                          {"validation_curve", f.validation_curve},
                          {"confusion", f.eval.confusion}});
  }
  std::ofstream(path) << j.dump(2) << '\n';
}

void print_summary(const std::vector<SweepSummary>& summary) {
  for (const auto& s : summary) {
    std::printf("fraction %-6g accuracy %.4f +- %.4f over %zu folds\n", s.fraction, s.mean, s.std,
                s.n_folds);
  }
}

void write_summary_csv(const fs::path& path, SweepAxis axis,
                       const std::vector<SweepSummary>& summary) {
  std::ofstream out(path);
  out << "axis,fraction,mean_accuracy,std_accuracy,n_folds\n";
  char buf[128];
  for (const auto& s : summary) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%zu\n", to_string(axis).c_str(),
                  s.fraction, s.mean, s.std, s.n_folds);
    out << buf;
  }
}

void plot_fractions(const fs::path& path, const std::vector<SweepRow>& rows, SweepAxis axis) {
  const auto series = fraction_series(rows, axis);
  if (series.empty()) return;
  PlotSpec spec;
  spec.title = axis == SweepAxis::pretrain_fraction ? "Accuracy vs. pre-training data"
                                                    : "Accuracy vs. fine-tuning data";
  spec.x_label = axis == SweepAxis::pretrain_fraction ? "pre-training data (%)"
                                                      : "fine-tuning data (%)";
  spec.y_label = "accuracy";
  spec.log_x = axis == SweepAxis::pretrain_fraction;
  write_svg(path, spec, series);
}

}  // namespace

// ------------------------------------------------------------ preprocess

int cmd_preprocess(const GlobalOptions& g, const PreprocessArgs& a) {
  const ExperimentConfig cfg = resolve_config(g);
  const auto files = list_recordings(a.in_dir);
  if (files.empty()) throw DataError("no input: no .erf files in " + a.in_dir);
  if (!g.out.empty() && fs::exists(g.out) && fs::equivalent(g.out, a.in_dir)) {
    throw ParameterError("output directory must differ from the input directory");
  }
  Run run("preprocess", g, cfg, a.in_dir + (a.keep_channels ? "|keep" : ""));
  return run.guard([&] {
    std::ofstream summary(run.out() / "preprocess_summary.csv");
    summary << "file,status,channels,duration_s,fs,detail\n";
    std::vector<std::string> errors;
    for (const auto& file : files) {
      const std::string name = file.filename().string();
      try {
        Recording rec = load_recording(file);
        std::string note;
        if (!a.keep_channels) rec = to_model_channels(rec, note);
        const Recording out = preprocess_pipeline(rec, cfg.preprocess);
        write_recording(out, run.out() / name);
        std::printf("%s: %zu channels%s, %.2f s at %g Hz\n", name.c_str(), out.n_channels(),
                    note.c_str(), out.duration_s(), out.fs);
        summary << name << ",ok," << out.n_channels() << ',' << out.duration_s() << ',' << out.fs
                << ",\n";
      } catch (const Error& e) {
        const std::string what = e.what();
        errors.push_back(what.find(name) == std::string::npos ? name + ": " + what : what);
        summary << name << ",error,,,,\"" << e.what() << "\"\n";
      }
    }
    if (errors.empty()) return 0;
    std::fprintf(stderr, "%zu of %zu files failed:\n", errors.size(), files.size());
    for (const auto& e : errors) std::fprintf(stderr, "  %s\n", e.c_str());
    return 2;
  });
}

// ----------------------------------------------------------------- synth

int cmd_synth(const GlobalOptions& g, const SynthArgs& a) {
  if (a.kind != "corpus" && a.kind != "task") {
    throw ParameterError("synth kind must be 'corpus' or 'task'");
  }
  ExperimentConfig cfg = resolve_config(g);
  if (a.shuffle_labels) cfg.task.shuffle_labels = true;
  Run run("synth", g, cfg, a.kind);
  return run.guard([&] {
    std::size_t written = 0;
    if (a.kind == "corpus") {
      const auto corpus = synth_pretraining_corpus(cfg.corpus);
      for (const auto& c : corpus) {
        const Recording rec =
            as_recording(c.data, cfg.corpus.chunk.n_channels, cfg.corpus.chunk.fs, c.subject_id);
        write_recording(rec, run.out() / numbered("chunk", written++));
      }
    } else {
      const TrialSet task = synth_task(cfg.task);
      for (const auto& t : task.trials) {
        Recording rec = as_recording(t.data, task.n_channels, cfg.task.chunk.fs, t.subject_id);
        rec.annotations.push_back({0.0, rec.duration_s(), task.class_names[t.label]});
        write_recording(rec, run.out() / numbered("trial", written++));
      }
    }
    std::printf("wrote %zu %s recordings to %s\n", written, a.kind.c_str(),
                run.out().string().c_str());
    return 0;
  });
}

// ------------------------------------------------------------- bandpower

int cmd_bandpower(const GlobalOptions& g, const BandpowerArgs& a) {
  const ExperimentConfig cfg = resolve_config(g);
  const std::size_t length = cfg.model.n_time_steps;
  if (length % kPowerWindow != 0) {
    throw ParameterError("chunk length " + std::to_string(length) + " is not a multiple of " +
                         std::to_string(kPowerWindow));
  }
  const auto files = list_recordings(a.in_dir);
  if (files.empty()) throw DataError("no input: no .erf files in " + a.in_dir);
  Run run("bandpower", g, cfg, a.in_dir);
  return run.guard([&] {
    const BandDefinition& bands = BandDefinition::standard();
    std::ofstream csv(run.out() / "bandpower.csv");
    std::ofstream index(run.out() / "chunks.csv");
    csv << "chunk,channel,band,window,log_power\n";
    index << "chunk,file,start_sample\n";
    std::size_t n_chunks = 0;
    char buf[256];
    for (const auto& file : files) {
      const Recording rec = load_recording(file);
      const auto blocks = chunk(rec, length);
      for (std::size_t k = 0; k < blocks.size(); ++k, ++n_chunks) {
        index << n_chunks << ',' << file.filename().string() << ',' << k * length << '\n';
        const Tensor p = band_power(blocks[k], rec.n_channels(), bands, rec.fs);
        const std::size_t n_windows = p.dim(2);
        for (std::size_t c = 0; c < rec.n_channels(); ++c) {
          for (std::size_t b = 0; b < bands.size(); ++b) {
            for (std::size_t w = 0; w < n_windows; ++w) {
              std::snprintf(buf, sizeof buf, "%zu,%s,%s,%zu,%.17g\n", n_chunks,
                            rec.channels[c].c_str(), bands[b].name.c_str(), w,
                            p.at({c, b, w}));
              csv << buf;
            }
          }
        }
      }
    }
    std::printf("%zu chunks from %zu files\n", n_chunks, files.size());
    return 0;
  });
}

// -------------------------------------------------------------- pretrain

int cmd_pretrain(const GlobalOptions& g, const PretrainArgs& a) {
  ExperimentConfig cfg = resolve_config(g);
  if (a.lambda) cfg.train.lambda = *a.lambda;
  if (a.iterations) cfg.train.iterations = *a.iterations;
  if (a.batch_size) cfg.train.pretrain_batch_size = *a.batch_size;
  cfg.train.mode = TrainMode::pretrain;
  cfg.train.validate();
  const std::vector<Chunk> corpus = load_corpus(a.data_dir, cfg);
  Run run("pretrain", g, cfg, a.data_dir);
  return run.guard([&] {
    const std::string label = run_label(cfg.train.lambda);
    std::printf("%s: %zu chunks, %zu iterations, lambda %g\n", label.c_str(), corpus.size(),
                cfg.train.iterations, cfg.train.lambda);
    Model model(cfg.model, cfg.seed);
    std::vector<LossRecord> log;
    const std::size_t every = std::max<std::size_t>(1, cfg.train.iterations / 20);
    PretrainHooks hooks;
    hooks.on_step = [&](const LossRecord& r) {
      log.push_back(r);
      if (r.iteration % every == 0 || r.iteration == 1) {
        std::fprintf(stderr, "iter %5zu  cos %.5f  knowledge %.4f  combined %.4f  %.1fs\n",
                     r.iteration, r.loss.cos_sim_loss, r.loss.knowledge_loss, r.loss.combined,
                     r.wall_time_s);
      }
    };
    hooks.on_checkpoint = [&](Model& m, const Adam& opt, std::size_t iteration) {
      const std::string name = iteration == cfg.train.iterations
                                   ? label + ".ckpt"
                                   : label + "-" + std::to_string(iteration) + ".ckpt";
      save_checkpoint(run.out() / name, m, {label, cfg.seed, iteration, cfg.train.lambda}, &opt);
    };
    BandPowerCache cache(cfg.model.n_channels, run.out() / "bandpower_cache");
    try {
      pretrain(model, corpus, cfg.train, hooks, &cache);
    } catch (const DivergenceError&) {
      write_training_log(run.out() / "training_log.csv", log);
      throw;
    }
    write_training_log(run.out() / "training_log.csv", log);
    Series cos{"cosine loss", {}, {}, {}}, know{"knowledge loss", {}, {}, {}};
    for (const auto& r : log) {
      cos.x.push_back(static_cast<double>(r.iteration));
      cos.y.push_back(r.loss.cos_sim_loss);
      know.x.push_back(static_cast<double>(r.iteration));
      know.y.push_back(r.loss.knowledge_loss);
    }
    PlotSpec spec{label + " pre-training", "iteration", "loss", false, true};
    write_svg(run.out() / "loss.svg", spec, {cos, know});
    if (!log.empty()) {
      const LossReport& last = log.back().loss;
      std::printf("final cos %.5f knowledge %.4f combined %.4f -> %s\n", last.cos_sim_loss,
                  last.knowledge_loss, last.combined, (run.out() / (label + ".ckpt")).c_str());
    }
    return 0;
  });
}

// -------------------------------------------------------------- finetune

int cmd_finetune(const GlobalOptions& g, const FinetuneArgs& a) {
  ExperimentConfig cfg = resolve_config(g);
  if (a.policy) cfg.train.freeze_policy = parse_freeze_policy(*a.policy);
  if (a.fraction) cfg.train.finetune_fraction = *a.fraction;
  if (a.n_fc) cfg.train.head.n_fc = *a.n_fc;
  cfg.train.mode = TrainMode::finetune;
  cfg.train.validate();
  cfg.train.head.validate();
  const auto ckpt = read_checkpoint(a.checkpoint);
  std::optional<Model> pretrained;
  if (ckpt) pretrained.emplace(ckpt->restore());
  const ModelConfig& model_cfg = ckpt ? ckpt->config : cfg.model;
  const TrialSet task = load_task(a.data_dir, cfg, model_cfg);
  const SplitPlan split = make_split(task.subjects(), cfg.split.scheme, cfg.split.k, cfg.seed);
  Run run("finetune", g, cfg, a.checkpoint + "|" + a.data_dir);
  return run.guard([&] {
    std::printf("%s, %zu trials, %zu subjects, %zu folds\n",
                to_string(cfg.train.freeze_policy).c_str(), task.trials.size(),
                task.subjects().size(), split.n_folds);
    const auto folds =
        finetune(pretrained ? &*pretrained : nullptr, model_cfg, task, split, cfg.train);
    std::vector<SweepRow> rows;
    for (const auto& f : folds) {
      rows.push_back({experiment_label(ckpt, cfg.train), SweepAxis::finetune_fraction, cfg.train.finetune_fraction, f.fold,
                      f.accuracy, f.lr, cfg.seed});
      std::printf("fold %zu: accuracy %.4f (%zu trials, lr %g)\n", f.fold, f.accuracy, f.n_eval,
                  f.lr);
    }
    write_results_csv(run.out() / "results.csv", rows);
    write_fold_details(run.out() / "folds.json", folds, task);
    print_summary(summarize(rows));
    return 0;
  });
}

// ----------------------------------------------------------------- sweep

int cmd_sweep(const GlobalOptions& g, const SweepArgs& a) {
  ExperimentConfig cfg = resolve_config(g);
  const SweepAxis axis = parse_sweep_axis(a.axis);
  const std::vector<double> values = parse_values(a.values);
  if (a.policy) cfg.train.freeze_policy = parse_freeze_policy(*a.policy);
  if (a.iterations) cfg.train.iterations = *a.iterations;
  cfg.train.validate();

  SweepInputs in;
  std::optional<Checkpoint> ckpt;
  std::optional<Model> pretrained;
  std::vector<Chunk> corpus;
  in.model = cfg.model;
  if (axis == SweepAxis::finetune_fraction) {
    ckpt = read_checkpoint(a.checkpoint);
    if (ckpt) {
      pretrained.emplace(ckpt->restore());
      in.model = ckpt->config;
      in.pretrained = &*pretrained;
    }
  } else {
    corpus = load_corpus(a.corpus_dir, cfg);
    in.corpus = &corpus;
  }
  const TrialSet task = load_task(a.data_dir, cfg, in.model);
  in.task = &task;
  in.split = make_split(task.subjects(), cfg.split.scheme, cfg.split.k, cfg.seed);
  in.train = cfg.train;
  in.workers = g.workers;
  Run run("sweep", g, cfg,
          a.axis + "|" + a.values + "|" + a.checkpoint + "|" + a.data_dir + "|" + a.corpus_dir);
  in.experiment_id = axis == SweepAxis::finetune_fraction
                         ? experiment_label(ckpt, cfg.train)
                         : run_label(cfg.train.lambda) + "/" + to_string(cfg.train.freeze_policy);
  return run.guard([&] {
    const SweepResult res = sweep(axis, values, in);
    write_results_csv(run.out() / "results.csv", res.rows);
    write_summary_csv(run.out() / "summary.csv", axis, res.summary);
    plot_fractions(run.out() / "accuracy_vs_fraction.svg", res.rows, axis);
    print_summary(res.summary);
    return 0;
  });
}

// ---------------------------------------------------------------- report

int cmd_report(const GlobalOptions& g, const ReportArgs& a) {
  if (!fs::is_directory(a.in_dir)) throw DataError(a.in_dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(a.in_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "results.csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<SweepRow> rows;
  for (const auto& f : files) {
    auto part = read_results_csv(f);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw DataError("no results found under " + a.in_dir);
  const ExperimentConfig cfg = resolve_config(g);
  Run run("report", g, cfg, a.in_dir);
  return run.guard([&] {
    const std::string md = render_report(rows);
    std::ofstream(run.out() / "report.md") << md;
    plot_fractions(run.out() / "pretrain_fraction.svg", rows, SweepAxis::pretrain_fraction);
    plot_fractions(run.out() / "finetune_fraction.svg", rows, SweepAxis::finetune_fraction);
    std::fputs(md.c_str(), stdout);
    return 0;
  });
}

}  // namespace kgeeg::cli
