#include <cstdio>
#include <exception>
#include <functional>

#include <CLI11.hpp>

#include "commands.hpp"
#include "kgeeg/error.hpp"
#include "kgeeg/version.hpp"

using namespace kgeeg::cli;

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  CLI::App app{"EEG pre-training toolkit: preprocessing, band power, pre-training, fine-tuning"};
  app.set_version_flag("--version", std::string(kgeeg::code_version()));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--out", g.out, "Output directory (default: $KGEEG_OUT_ROOT/<experiment id>)");
  app.add_option("--workers", g.workers, "Parallel sweep cells")->check(CLI::PositiveNumber);

  std::function<int()> run;

  PreprocessArgs pre;
  auto* sc = app.add_subcommand("preprocess", "Filter, normalize and resample ERF recordings");
  sc->add_option("--in", pre.in_dir, "Directory of .erf files")->required();
  sc->add_flag("--keep-channels", pre.keep_channels, "Keep the input montage");
  sc->callback([&] { run = [&] { return cmd_preprocess(g, pre); }; });

  SynthArgs syn;
  sc = app.add_subcommand("synth", "Write a synthetic corpus or labeled task as ERF files");
  sc->add_option("--kind", syn.kind, "corpus or task")->check(CLI::IsMember({"corpus", "task"}));
  sc->add_flag("--shuffle-labels", syn.shuffle_labels, "Permute task labels");
  sc->callback([&] { run = [&] { return cmd_synth(g, syn); }; });

  BandpowerArgs bp;
  sc = app.add_subcommand("bandpower", "Per-window log band power of preprocessed recordings");
  sc->add_option("--in", bp.in_dir, "Directory of preprocessed .erf files")->required();
  sc->callback([&] { run = [&] { return cmd_bandpower(g, bp); }; });

  PretrainArgs pt;
  sc = app.add_subcommand("pretrain", "Pre-train the backbone");
  sc->add_option("--data", pt.data_dir, "Preprocessed .erf corpus (default: synthetic)");
  sc->add_option("--lambda", pt.lambda, "Knowledge-loss weight; 0 is the vanilla objective");
  sc->add_option("--iterations", pt.iterations, "Optimizer steps");
  sc->add_option("--batch-size", pt.batch_size, "Chunks per step");
  sc->callback([&] { run = [&] { return cmd_pretrain(g, pt); }; });

  FinetuneArgs ft;
  sc = app.add_subcommand("finetune", "Cross-validated fine-tuning on a labeled task");
  sc->add_option("--checkpoint", ft.checkpoint, "Pre-trained checkpoint");
  sc->add_option("--data", ft.data_dir, "Annotated .erf trials (default: synthetic)");
  sc->add_option("--policy", ft.policy, "linear_probe, last_s4, all_s4 or fully_trainable");
  sc->add_option("--fraction", ft.fraction, "Fraction of training trials used");
  sc->add_option("--n-fc", ft.n_fc, "Head depth (1 or 2)");
  sc->callback([&] { run = [&] { return cmd_finetune(g, ft); }; });

  SweepArgs sw;
  sc = app.add_subcommand("sweep", "Accuracy across data fractions");
  sc->add_option("--axis", sw.axis, "finetune_fraction or pretrain_fraction")
      ->check(CLI::IsMember({"finetune_fraction", "pretrain_fraction"}));
  sc->add_option("--values", sw.values, "Comma-separated fractions");
  sc->add_option("--checkpoint", sw.checkpoint, "Pre-trained checkpoint (finetune_fraction)");
  sc->add_option("--data", sw.data_dir, "Annotated .erf trials (default: synthetic)");
  sc->add_option("--corpus", sw.corpus_dir, "Pre-training corpus (pretrain_fraction)");
  sc->add_option("--policy", sw.policy, "Freeze policy");
  sc->add_option("--iterations", sw.iterations, "Pre-training steps per cell");
  sc->callback([&] { run = [&] { return cmd_sweep(g, sw); }; });

  ReportArgs rep;
  sc = app.add_subcommand("report", "Summary tables and plots from results CSVs");
  sc->add_option("--in", rep.in_dir, "Directory searched for results.csv files")->required();
  sc->callback([&] { run = [&] { return cmd_report(g, rep); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  if (*seed_opt) g.seed = seed;

  try {
    return run();
  } catch (const kgeeg::ConfigError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
}
