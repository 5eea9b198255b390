// chnet: train, evaluate and audit ChannelNet and classic MIMO detectors.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "chnet/config.hpp"
#include "chnet/errors.hpp"
#include "chnet/evaluation.hpp"
#include "chnet/format.hpp"
#include "chnet/gradcheck_suite.hpp"
#include "chnet/parallel.hpp"
#include "chnet/training.hpp"

namespace fs = std::filesystem;
using namespace chnet;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string model;
  std::string detectors;
  std::string snr;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

std::size_t threads_of(const Common& c) { return c.threads ? c.threads : default_threads(); }

RunConfig load(const Common& c) {
  RunConfig cfg = load_config(c.config);
  if (c.seed) {
    cfg.train.seed = *c.seed;
    cfg.eval.seed = *c.seed;
  }
  cfg.train.threads = threads_of(c);
  return cfg;
}

SweepOptions sweep_options(const RunConfig& cfg, const Common& c) {
  SweepOptions o;
  o.min_errors = cfg.eval.min_errors;
  o.max_symbols = cfg.eval.max_symbols;
  o.min_samples = cfg.eval.min_samples;
  o.round = cfg.eval.round;
  o.seed = cfg.eval.seed;
  o.threads = threads_of(c);
  return o;
}

std::shared_ptr<const ChannelNetModel> maybe_model(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const ChannelNetModel>(load_checkpoint(path));
}

std::vector<NamedDetector> build_detectors(const std::vector<std::string>& names,
                                           std::shared_ptr<const ChannelNetModel> model) {
  std::vector<NamedDetector> out;
  for (const auto& n : names) out.push_back(make_detector(n, model));
  return out;
}

void report_skips(const std::vector<SweepRecord>& recs) {
  for (const auto& r : recs)
    if (r.skipped)
      std::cerr << "warning: " << r.detector << " failed on " << r.skipped << " samples at "
                << format_double(r.snr_db) << " dB (" << r.scenario << ")\n";
}

void print_records(const std::vector<SweepRecord>& recs) {
  std::printf("%-16s %-36s %7s %12s %10s %11s\n", "detector", "scenario", "snr_db", "symbols",
              "errors", "ser");
  for (const auto& r : recs)
    std::printf("%-16s %-36s %7s %12llu %10llu %11.4e\n", r.detector.c_str(),
                r.scenario.c_str(), format_double(r.snr_db).c_str(),
                static_cast<unsigned long long>(r.symbols),
                static_cast<unsigned long long>(r.errors), r.ser);
}

int cmd_train(const Common& c) {
  const RunConfig cfg = load(c);
  fs::create_directories(c.out);
  ChannelNetModel model = make_initialized_model(cfg.model, cfg.train.seed);
  TrainHooks hooks;
  hooks.checkpoint_dir = c.out;
  hooks.on_epoch = [&](const EpochRecord& e) {
    std::fprintf(stderr, "epoch %zu/%zu  loss %.5f  ser %.4e  lr %.1e  %.1fs\n", e.epoch,
                 cfg.train.epochs, e.loss, e.ser_estimate, e.lr, e.seconds);
  };
  const TrainLog log = train(model, cfg.train, hooks);
  log.write_csv(fs::path(c.out) / "train_log.csv");
  const fs::path model_path = fs::path(c.out) / "model.chnet";
  save_checkpoint(model, model_path);
  write_text_file(model_path.string() + ".meta",
                  model_metadata(model, cfg.train, log.epochs.size()));
  if (log.aborted) {
    std::cerr << "training aborted: " << log.abort_reason
              << "\nlast good parameters saved to " << model_path.string() << '\n';
    return 2;
  }
  std::cout << "saved " << model_path.string() << '\n';
  return 0;
}

int cmd_sweep(const Common& c) {
  const RunConfig cfg = load(c);
  const auto names = parse_detector_list(c.detectors);
  const auto dets = build_detectors(names, maybe_model(c.model));
  const auto snrs = c.snr.empty() ? cfg.eval.snrs_db : parse_snr_range(c.snr);
  const auto recs = run_sweep(dets, cfg.scenario, snrs, sweep_options(cfg, c));
  fs::create_directories(c.out);
  write_records_csv(recs, fs::path(c.out) / "sweep.csv");
  write_plot(recs, fs::path(c.out) / "sweep.svg");
  report_skips(recs);
  print_records(recs);
  return 0;
}

int cmd_robust(const Common& c) {
  const RunConfig cfg = load(c);
  const auto model = maybe_model(c.model);
  const std::string self =
      model->config().variant == Variant::mlp ? "channelnet-mlp" : "channelnet-conv";
  const auto names = parse_detector_list(c.detectors.empty() ? self + ",mmse" : c.detectors);
  const auto dets = build_detectors(names, model);
  const auto variants = default_robustness_variants();
  const auto snrs = c.snr.empty() ? cfg.eval.snrs_db : parse_snr_range(c.snr);
  const auto recs = run_robustness(dets, cfg.scenario, variants, snrs, sweep_options(cfg, c));
  fs::create_directories(c.out);
  write_records_csv(recs, fs::path(c.out) / "robust.csv");
  write_plot(recs, fs::path(c.out) / "robust.svg");
  report_skips(recs);
  print_records(recs);
  return 0;
}

int cmd_gradcheck(bool full) {
  const auto cases = run_gradcheck_suite(full);
  bool ok = true;
  for (const auto& cs : cases) {
    for (const auto& e : cs.report.entries)
      std::printf("%-24s %-22s max rel err %.3e  (tol %.0e)%s\n", cs.name.c_str(),
                  e.name.c_str(), e.max_rel_error, cs.report.tolerance,
                  e.max_rel_error < cs.report.tolerance ? "" : "  FAIL");
    ok = ok && cs.report.passed();
  }
  std::printf("%s\n", ok ? "gradcheck passed" : "gradcheck FAILED");
  return ok ? 0 : 2;
}

int cmd_countmults(const Common& c, std::size_t samples) {
  const RunConfig cfg = load(c);
  auto model = maybe_model(c.model);
  const auto names = parse_detector_list(c.detectors);
  std::printf("%-16s %16s   (%s, lifted %zux%zu)\n", "detector", "mults/detection",
              cfg.scenario.digest().c_str(), cfg.scenario.rx_dim(), cfg.scenario.tx_dim());
  for (const auto& name : names) {
    std::shared_ptr<const ChannelNetModel> m = model;
    // counts depend only on shapes, so an untrained model of the configured size will do
    if (!m && is_channelnet_detector(name)) {
      ChannelNetConfig mc = cfg.model;
      mc.variant = name == "channelnet-mlp" ? Variant::mlp : Variant::conv;
      m = std::make_shared<const ChannelNetModel>(make_initialized_model(mc, cfg.train.seed));
    }
    const double mean = count_mults(make_detector(name, m), cfg.scenario, samples,
                                    cfg.eval.snrs_db.front(), cfg.eval.seed);
    std::printf("%-16s %16.0f\n", name.c_str(), mean);
  }
  return 0;
}

int cmd_plot(const std::string& in, const std::string& out) {
  const auto recs = parse_records_csv(read_text_file(in));
  write_plot(recs, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ChannelNet massive-MIMO detection toolkit"};
  app.require_subcommand(1);
  Common c;
  bool full = false;
  std::size_t samples = 20;
  std::string plot_in, plot_out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "override train.seed and eval.seed");
    sub->add_option("--threads", c.threads, "worker threads (default: CHNET_THREADS or 1)");
  };

  auto* train_cmd = app.add_subcommand("train", "train a ChannelNet model");
  train_cmd->add_option("--config", c.config, "config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", c.out, "output directory")->required();
  add_common(train_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "SER vs SNR Monte Carlo sweep");
  sweep_cmd->add_option("--config", c.config, "config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--detectors", c.detectors, "comma-separated detector names")->required();
  sweep_cmd->add_option("--snr", c.snr, "LO:HI:STEP in dB (default: eval.snr)");
  sweep_cmd->add_option("--out", c.out, "output directory")->required();
  sweep_cmd->add_option("--model", c.model, "checkpoint for channelnet-* detectors")
      ->check(CLI::ExistingFile);
  add_common(sweep_cmd);

  auto* robust_cmd = app.add_subcommand("robust", "evaluate a trained model under mismatch");
  robust_cmd->add_option("--model", c.model, "checkpoint")->required()->check(CLI::ExistingFile);
  robust_cmd->add_option("--config", c.config, "config file")->required()->check(CLI::ExistingFile);
  robust_cmd->add_option("--out", c.out, "output directory")->required();
  robust_cmd->add_option("--detectors", c.detectors, "default: the model and mmse");
  robust_cmd->add_option("--snr", c.snr, "LO:HI:STEP in dB (default: eval.snr)");
  add_common(robust_cmd);

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  grad_cmd->add_flag("--full", full, "include larger models");

  auto* mults_cmd = app.add_subcommand("countmults", "multiplications per detection");
  mults_cmd->add_option("--config", c.config, "config file")->required()->check(CLI::ExistingFile);
  mults_cmd->add_option("--detectors", c.detectors, "comma-separated detector names")->required();
  mults_cmd->add_option("--model", c.model, "checkpoint")->check(CLI::ExistingFile);
  mults_cmd->add_option("--samples", samples, "instances to average over");
  add_common(mults_cmd);

  auto* plot_cmd = app.add_subcommand("plot", "render a sweep CSV as SVG");
  plot_cmd->add_option("--in", plot_in, "sweep CSV")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_out, "SVG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) return cmd_train(c);
    if (*sweep_cmd) return cmd_sweep(c);
    if (*robust_cmd) return cmd_robust(c);
    if (*grad_cmd) return cmd_gradcheck(full);
    if (*mults_cmd) return cmd_countmults(c, samples);
    if (*plot_cmd) return cmd_plot(plot_in, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
