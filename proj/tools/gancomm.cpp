// gancomm: train, evaluate and inspect the learned transceiver and its
// classical baselines.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 numerical abort.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "gancomm/errors.hpp"
#include "gancomm/experiment/diagnostics.hpp"
#include "gancomm/experiment/evaluate.hpp"
#include "gancomm/runtime.hpp"
#include "goldens.hpp"

using namespace gancomm;
using namespace gancomm::experiment;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string snr;
  std::string out;
  std::optional<std::size_t> workers;
  std::string model_dir;
};

ExperimentConfig load(const Overrides& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.snr.empty()) cfg.eval.snr_list = parse_snr_range(o.snr);
  if (o.workers) cfg.eval.workers = std::max<std::size_t>(1, *o.workers);
  if (!o.model_dir.empty()) cfg.model_dir = o.model_dir;
  return cfg;
}

Trainer load_trained(const ExperimentConfig& cfg) {
  if (!std::filesystem::exists(cfg.model_dir / "state.json"))
    throw ContractError("no trained model in " + cfg.model_dir.string() + "; run `gancomm train` first");
  Trainer t = Trainer::load(cfg.model_dir, cfg);
  if (t.outer_done() == 0) throw ContractError("the model in " + cfg.model_dir.string() + " has not been trained");
  return t;
}

void write_curve(const std::vector<BerPoint>& points, const ExperimentConfig& cfg, const std::string& out) {
  const std::filesystem::path path = out.empty() ? std::filesystem::path(cfg.name + "_curve.csv") : std::filesystem::path(out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  write_curve_csv(os, points, cfg);
  auto stem = path;
  stem.replace_extension();
  write_gnuplot(stem, points);
  for (const auto& p : points)
    std::fprintf(stderr, "  %6.2f dB  ber %.3e  bler %.3e  (%zu blocks)%s\n", p.snr_db, p.ber, p.bler, p.blocks,
                 p.capped ? "  [max_blocks]" : "");
  std::fprintf(stderr, "wrote %s\n", path.string().c_str());
}

int cmd_train(const Overrides& o, bool resume) {
  ExperimentConfig cfg = load(o);
  if (!o.out.empty()) cfg.model_dir = o.out;
  std::optional<Trainer> trainer;
  if (resume && std::filesystem::exists(cfg.model_dir / "state.json")) {
    trainer.emplace(Trainer::load(cfg.model_dir, cfg));
    std::fprintf(stderr, "resuming %s after %zu outer iterations\n", cfg.model_dir.string().c_str(),
                 trainer->outer_done());
  } else {
    trainer.emplace(cfg);
  }
  trainer->run(cfg.model_dir, [](const Trainer& t) {
    std::fprintf(stderr, "outer %zu  receiver loss %.5f\n", t.outer_done(), t.outer_losses().back());
  });
  std::fprintf(stderr, "trained %zu outer iterations, saved to %s\n", trainer->outer_done(),
               cfg.model_dir.string().c_str());
  return 0;
}

int cmd_eval(const Overrides& o, bool baseline_only) {
  const ExperimentConfig cfg = load(o);
  if (baseline_only && is_learned(cfg.system))
    throw ConfigError("`baseline` runs classical systems only; use `eval` for " + std::string(to_string(cfg.system)));
  if (is_learned(cfg.system)) {
    const Trainer t = load_trained(cfg);
    const auto sim = make_learned(cfg, t.transceiver(), true);
    write_curve(monte_carlo_curve(*sim, cfg.eval), cfg, o.out);
  } else {
    write_curve(monte_carlo_curve(*make_baseline(cfg), cfg.eval), cfg, o.out);
  }
  return 0;
}

int cmd_gan_sample(const Overrides& o, std::size_t samples) {
  const ExperimentConfig cfg = load(o);
  const Trainer t = load_trained(cfg);
  Rng rng = Rng::derive(cfg.seed, {0x5A3E});
  const auto rows = constellation_dump(t, default_conditions(cfg.channel), samples, rng);
  const std::filesystem::path path = o.out.empty() ? std::filesystem::path(cfg.name + "_constellation.csv") : std::filesystem::path(o.out);
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  write_constellation_csv(os, rows);
  std::fprintf(stderr, "wrote %zu rows to %s\n", rows.size(), path.string().c_str());
  return 0;
}

int cmd_gradcheck(std::size_t seeds) {
  bool ok = true;
  for (const auto& r : gradcheck_suite(seeds)) {
    const bool pass = r.max_rel_error < 1e-4;
    ok = ok && pass;
    std::printf("%-20s max_rel_error %.3e over %zu trials  %s\n", r.kind.c_str(), r.max_rel_error, r.trials,
                pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"GAN-bridged end-to-end transceiver lab"};
  app.require_subcommand(1);
  Overrides o;
  bool resume = false;
  std::size_t samples = 200, seeds = 100;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--out", o.out, "output path");
  };
  auto* train = app.add_subcommand("train", "train a learned system; --out sets the model directory");
  add_common(train, true);
  train->add_flag("--resume", resume, "continue from the checkpoint in the model directory");
  auto* eval = app.add_subcommand("eval", "BER/BLER curve over the real channel");
  auto* baseline = app.add_subcommand("baseline", "BER/BLER curve of a classical baseline");
  auto* gan = app.add_subcommand("gan-sample", "dump real and generated constellations as CSV");
  add_common(gan, true);
  gan->add_option("--samples", samples, "samples per condition and symbol");
  for (auto* sub : {eval, baseline}) {
    add_common(sub, true);
    sub->add_option("--snr", o.snr, "Eb/N0 sweep a:b:step in dB");
    sub->add_option("--workers", o.workers, "evaluation threads");
  }
  for (auto* sub : {eval, gan}) sub->add_option("--model", o.model_dir, "trained model directory (default: model_dir)");
  auto* grad = app.add_subcommand("gradcheck", "compare reverse-mode gradients with finite differences");
  grad->add_option("--seeds", seeds, "random cases per layer kind");
  auto* gold = app.add_subcommand("goldens", "regenerate oracle test vectors");
  gold->add_option("--out", o.out, "output directory")->default_val("tests/golden");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train) return cmd_train(o, resume);
    if (*eval) return cmd_eval(o, false);
    if (*baseline) return cmd_eval(o, true);
    if (*gan) return cmd_gan_sample(o, samples);
    if (*grad) return cmd_gradcheck(seeds);
    if (*gold) {
      tools::write_goldens(o.out.empty() ? "tests/golden" : o.out);
      return 0;
    }
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
