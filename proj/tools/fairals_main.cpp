// Copyright 2026 The Fairals Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The fairals command line. Every subcommand reads a flat key = value config
// (command-line flags override file entries), writes its outputs plus a run
// manifest into --out, and exits 0 on success, 1 on a runtime failure, and 2
// on a usage or configuration error.

#include <fmt/core.h>

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "fairals/checkpoint.hpp"
#include "fairals/config.hpp"
#include "fairals/diagnostics.hpp"
#include "fairals/evaluation.hpp"
#include "fairals/feedback.hpp"
#include "fairals/metrics.hpp"
#include "fairals/sweep.hpp"
#include "fairals/train.hpp"
#include "fairals/version.hpp"

namespace {

using namespace fairals;

struct CommonOpts {
  std::string data;
  std::string config;
  std::string out;
  int threads = 0;  // 0 means all cores
  bool serial = false;
};

int resolve_threads(const CommonOpts& co) {
  if (co.serial) return 1;
  if (co.threads > 0) return co.threads;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> echo_argv(int argc, char** argv) {
  std::vector<std::string> out;
  out.reserve(argc);
  for (int i = 0; i < argc; ++i) out.emplace_back(argv[i]);
  return out;
}

KvList load_config_file(const std::string& path) {
  return path.empty() ? KvList{} : read_kv_file(path);
}

const std::vector<HoldoutUser>& pick_split(const DatasetBundle& bundle,
                                           const std::string& split) {
  if (split == "val") return bundle.val_users;
  if (split == "test") return bundle.test_users;
  throw ConfigError(fmt::format("split must be `val` or `test`, got `{}`", split));
}

void check_catalog(const Checkpoint& ckpt, const DatasetBundle& bundle) {
  if (ckpt.V.rows() != bundle.train.n_items) {
    throw ConfigError(
        fmt::format("checkpoint was trained on {} items but the dataset has {}",
                    ckpt.V.rows(), bundle.train.n_items));
  }
}

void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const std::vector<std::string>& argv,
                        const KvList& effective,
                        const std::string& data_fingerprint, double seconds,
                        const std::vector<std::string>& outputs) {
  write_kv_file(out_dir + "/run_manifest.txt",
                run_manifest(command, argv, effective, data_fingerprint,
                             seconds, outputs));
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string input;
  std::string out;
  double threshold = 0;
  bool has_threshold = false;
  int min_count = 0;
  SplitSpec spec;
};

void cmd_ingest(const IngestArgs& a, const std::vector<std::string>& argv) {
  WallTimer timer;
  std::optional<double> threshold;
  if (a.has_threshold) threshold = a.threshold;
  auto triples = load_interactions(a.input, threshold);
  triples = filter_min_interactions(triples, a.min_count);
  if (triples.empty()) {
    throw ConfigError("no interactions survive thresholding and filtering");
  }
  DatasetBundle bundle = strong_generalization_split(triples, a.spec);
  save_bundle(bundle, a.out);

  std::set<std::string> users, items;
  for (const auto& t : triples) {
    users.insert(t.user);
    items.insert(t.item);
  }
  fmt::print("users: {}\n", users.size());
  fmt::print("items: {}\n", items.size());
  fmt::print("interactions: {}\n", triples.size());
  fmt::print("split: {} train / {} val / {} test users\n",
             bundle.train.n_users, bundle.val_users.size(),
             bundle.test_users.size());
  std::string fp = bundle_fingerprint(a.out);
  fmt::print("fingerprint: {}\n", fp);
  fmt::print("wrote {}\n", a.out);

  KvList effective = {
      {"input", a.input},
      {"threshold", a.has_threshold ? format_double(a.threshold) : "none"},
      {"min_count", fmt::format("{}", a.min_count)},
      {"train_frac", format_double(a.spec.train_frac)},
      {"val_frac", format_double(a.spec.val_frac)},
      {"test_frac", format_double(a.spec.test_frac)},
      {"foldin_frac", format_double(a.spec.foldin_frac)},
      {"seed", fmt::format("{}", a.spec.seed)},
  };
  write_run_manifest(a.out, "ingest", argv, effective, fp, timer.seconds(),
                     {a.out + "/manifest.txt"});
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  CommonOpts co;
  KvList overrides;
  bool grad_norms = false;
};

void cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
  WallTimer timer;
  DatasetBundle bundle = load_bundle(a.co.data);
  ensure_dir(a.co.out);
  ConfigView cfg(merge_config(load_config_file(a.co.config), a.overrides));
  const std::string algo = cfg.get_string("algo", "ials");
  if (algo != "ials" && algo != "exadmm") {
    throw ConfigError(
        fmt::format("algo must be `ials` or `exadmm`, got `{}`", algo));
  }
  TrainOptions topts;
  topts.threads = resolve_threads(a.co);
  topts.gradient_norms = a.grad_norms;

  KvList effective = {{"algo", algo}};
  std::vector<std::string> outputs;
  const std::string ckpt_path = a.co.out + "/checkpoint.bin";
  if (algo == "ials") {
    IalsHyperParams hp = ials_params_from(cfg);
    cfg.finish("train config");
    validate_hyperparams(hp);
    TrainResult tr = train_ials(bundle.train, hp, topts);
    save_checkpoint(ckpt_path, tr.checkpoint);
    const std::string log_path = a.co.out + "/objective.tsv";
    std::ofstream log(log_path);
    if (!log) throw Error("cannot write " + log_path);
    log << "epoch\tobjective\n";
    for (size_t e = 0; e < tr.objective.size(); ++e) {
      log << fmt::format("{}\t{}\n", e + 1, format_double(tr.objective[e]));
    }
    for (const auto& kv : ials_params_kv(hp)) effective.push_back(kv);
    outputs = {ckpt_path, log_path};
    fmt::print("trained ials for {} epochs in {:.3f}s\n", hp.epochs,
               tr.train_seconds);
    if (!tr.objective.empty()) {
      fmt::print("final objective: {}\n", format_double(tr.objective.back()));
    }
  } else {
    ExAdmmHyperParams hp = exadmm_params_from(cfg);
    cfg.finish("train config");
    validate_exadmm_hyperparams(hp);
    TrainResult tr = train_exadmm(bundle.train, hp, topts);
    save_checkpoint(ckpt_path, tr.checkpoint);
    const std::string log_path = a.co.out + "/epochs.tsv";
    EpochLogWriter writer(log_path);
    for (const EpochDiagnostics& d : tr.epoch_log) writer.append(d);
    for (const auto& kv : exadmm_params_kv(hp)) effective.push_back(kv);
    outputs = {ckpt_path, log_path};
    fmt::print("trained exadmm for {} epochs in {:.3f}s\n", hp.base.epochs,
               tr.train_seconds);
    if (!tr.epoch_log.empty()) {
      const EpochDiagnostics& last = tr.epoch_log.back();
      fmt::print("final lagrangian: {}\n", format_double(last.lagrangian));
      fmt::print("final feasibility gap: {}\n",
                 format_double(last.feasibility_gap));
      if (!last.rho_ok || !last.gamma_ok) {
        fmt::print(stderr,
                   "warning: step sizes violate the convergence conditions "
                   "(rho_ok={}, gamma_ok={}); descent is not guaranteed\n",
                   last.rho_ok, last.gamma_ok);
      }
    }
  }
  for (const std::string& p : outputs) fmt::print("wrote {}\n", p);
  write_run_manifest(a.co.out, "train", argv, effective,
                     bundle_fingerprint(a.co.data), timer.seconds(), outputs);
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  CommonOpts co;
  std::string checkpoint;
  KvList overrides;
};

void cmd_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv) {
  WallTimer timer;
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  DatasetBundle bundle = load_bundle(a.co.data);
  check_catalog(ckpt, bundle);
  ensure_dir(a.co.out);
  ConfigView cfg(merge_config(load_config_file(a.co.config), a.overrides));
  std::vector<int> k_values = cfg.get_int_list("k_values", {10});
  std::string split = cfg.get_string("split", "test");
  cfg.finish("evaluate config");

  EvalOptions eopts;
  eopts.k_values = k_values;
  eopts.threads = resolve_threads(a.co);
  HoldoutEvaluation ev =
      evaluate_holdout(pick_split(bundle, split), ckpt.V, ckpt.base, eopts);

  const std::string metrics_path = a.co.out + "/metrics.tsv";
  write_metrics(metrics_path, ev.per_k);
  for (const KMetrics& km : ev.per_k) {
    fmt::print("k={} ndcg={} gini={} (evaluated {}, skipped {})\n", km.k,
               format_double(km.ndcg), format_double(km.gini),
               km.users_evaluated, km.users_skipped);
  }
  fmt::print("wrote {}\n", metrics_path);

  KvList effective = {{"checkpoint", a.checkpoint}, {"split", split}};
  std::string ks;
  for (const KMetrics& km : ev.per_k) {
    if (!ks.empty()) ks += ",";
    ks += fmt::format("{}", km.k);
  }
  effective.emplace_back("k_values", ks);
  write_run_manifest(a.co.out, "evaluate", argv, effective,
                     bundle_fingerprint(a.co.data), timer.seconds(),
                     {metrics_path});
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  CommonOpts co;
  KvList overrides;
};

void cmd_sweep(const SweepArgs& a, const std::vector<std::string>& argv) {
  WallTimer timer;
  DatasetBundle bundle = load_bundle(a.co.data);
  ConfigView cfg(merge_config(load_config_file(a.co.config), a.overrides));
  SweepConfig scfg;
  scfg.algo = cfg.get_string("algo", "exadmm");
  scfg.fixed = exadmm_params_from(cfg);
  scfg.k_values = cfg.get_int_list("k_values", {10});
  for (const auto& [name, value] : cfg.with_prefix("grid.")) {
    scfg.axes.emplace_back(name, parse_double_list(value, "grid." + name));
  }
  cfg.finish("sweep config");

  TrainOptions topts;
  topts.threads = resolve_threads(a.co);
  std::vector<FrontierRow> rows = run_sweep(scfg, bundle, a.co.out, topts);

  int ok = 0, flagged = 0;
  for (const FrontierRow& r : rows) {
    ok += r.status == "ok";
    flagged += r.pareto;
  }
  fmt::print("sweep: {} grid points, {} succeeded, {} on the frontier\n",
             rows.size(), ok, flagged);
  for (const FrontierRow& r : rows) {
    if (r.status == "ok") {
      fmt::print("  {}  ndcg@{}={}  gini@{}={}  {}\n", r.id,
                 scfg.k_values.back(), format_double(r.ndcg.back()),
                 scfg.k_values.back(), format_double(r.gini.back()),
                 r.pareto ? "pareto" : "dominated");
    } else {
      fmt::print("  {}  failed: {}\n", r.id, r.message);
    }
  }
  const std::string frontier_path = a.co.out + "/frontier.tsv";
  fmt::print("wrote {}\n", frontier_path);

  KvList effective = {{"algo", scfg.algo}};
  for (const auto& kv : exadmm_params_kv(scfg.fixed)) effective.push_back(kv);
  std::string ks;
  for (int k : scfg.k_values) {
    if (!ks.empty()) ks += ",";
    ks += fmt::format("{}", k);
  }
  effective.emplace_back("k_values", ks);
  for (const auto& [name, values] : scfg.axes) {
    std::string joined;
    for (double v : values) {
      if (!joined.empty()) joined += ",";
      joined += format_double(v);
    }
    effective.emplace_back("grid." + name, joined);
  }
  write_run_manifest(a.co.out, "sweep", argv, effective,
                     bundle_fingerprint(a.co.data), timer.seconds(),
                     {frontier_path});
}

// ---------------------------------------------------------------------------
// lorenz

struct LorenzArgs {
  CommonOpts co;
  std::string checkpoint;
  KvList overrides;
};

void cmd_lorenz(const LorenzArgs& a, const std::vector<std::string>& argv) {
  WallTimer timer;
  Checkpoint ckpt = load_checkpoint(a.checkpoint);
  DatasetBundle bundle = load_bundle(a.co.data);
  check_catalog(ckpt, bundle);
  ensure_dir(a.co.out);
  ConfigView cfg(merge_config(load_config_file(a.co.config), a.overrides));
  int k = static_cast<int>(cfg.get_int("k", 10));
  std::string split = cfg.get_string("split", "test");
  int points = static_cast<int>(cfg.get_int("points", 100));
  cfg.finish("lorenz config");
  if (points < 1) throw ConfigError("points must be >= 1");

  EvalOptions eopts;
  eopts.k_values = {k};
  eopts.threads = resolve_threads(a.co);
  HoldoutEvaluation ev =
      evaluate_holdout(pick_split(bundle, split), ckpt.V, ckpt.base, eopts);
  auto curve = lorenz_curve(ev.exposure[0], points);

  const std::string curve_path = a.co.out + "/lorenz.tsv";
  std::ofstream out(curve_path);
  if (!out) throw Error("cannot write " + curve_path);
  out << "fraction_items\tfraction_exposure\n";
  for (const auto& [x, y] : curve) {
    out << format_double(x) << "\t" << format_double(y) << "\n";
  }
  if (!out) throw Error("write failed for " + curve_path);

  fmt::print("gini@{} = {}\n", k, format_double(ev.per_k[0].gini));
  fmt::print("wrote {}\n", curve_path);

  KvList effective = {{"checkpoint", a.checkpoint},
                      {"split", split},
                      {"k", fmt::format("{}", k)},
                      {"points", fmt::format("{}", points)}};
  write_run_manifest(a.co.out, "lorenz", argv, effective,
                     bundle_fingerprint(a.co.data), timer.seconds(),
                     {curve_path});
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  CommonOpts co;  // data = run directory holding epochs.tsv
  double tolerance = 1e-6;
};

void cmd_diagnose(const DiagnoseArgs& a, const std::vector<std::string>& argv) {
  WallTimer timer;
  const std::string log_path = a.co.data + "/epochs.tsv";
  std::vector<EpochDiagnostics> log = read_epoch_log(log_path);
  ConvergenceReport rep = convergence_report(log);
  ensure_dir(a.co.out);

  bool converged = rep.final_residual_v < a.tolerance &&
                   rep.final_residual_u < a.tolerance &&
                   rep.final_residual_s < a.tolerance &&
                   rep.final_residual_w < a.tolerance &&
                   rep.final_feasibility_gap < a.tolerance;
  KvList kv = report_kv(rep);
  kv.emplace_back("tolerance", format_double(a.tolerance));
  kv.emplace_back("converged", converged ? "yes" : "no");
  const std::string report_path = a.co.out + "/report.txt";
  write_kv_file(report_path, kv);
  for (const auto& [key, value] : kv) fmt::print("{} = {}\n", key, value);
  fmt::print("wrote {}\n", report_path);

  KvList effective = {{"log", log_path},
                      {"tolerance", format_double(a.tolerance)}};
  write_run_manifest(a.co.out, "diagnose", argv, effective,
                     fmt::format("{:016x}", file_fingerprint(log_path)),
                     timer.seconds(), {report_path});
}

void add_common(CLI::App* cmd, CommonOpts& co, bool with_config = true) {
  cmd->add_option("--data", co.data, "Dataset bundle directory")->required();
  if (with_config) {
    cmd->add_option("--config", co.config, "Key = value config file");
  }
  cmd->add_option("--out", co.out, "Output directory")->required();
  cmd->add_option("--threads", co.threads,
                  "Worker threads (default: all cores)");
  cmd->add_flag("--serial", co.serial,
                "Single-threaded deterministic execution");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      fmt::format("fairals {} - exposure-controllable collaborative filtering",
                  kVersion)};
  app.require_subcommand(1);
  std::vector<std::string> argv_echo = echo_argv(argc, argv);

  // ingest
  IngestArgs ingest;
  auto* cmd_ing = app.add_subcommand(
      "ingest", "Binarize, filter, and split a raw interaction file");
  cmd_ing->add_option("--input", ingest.input, "Raw interaction file")
      ->required();
  cmd_ing->add_option("--out", ingest.out, "Bundle output directory")
      ->required();
  auto* thr_opt = cmd_ing->add_option(
      "--threshold", ingest.threshold,
      "Keep rows with rating >= threshold (default: keep all)");
  cmd_ing->add_option("--min-count", ingest.min_count,
                      "Drop users/items with fewer interactions");
  cmd_ing->add_option("--seed", ingest.spec.seed, "Split seed");
  cmd_ing->add_option("--train-frac", ingest.spec.train_frac, "Train fraction");
  cmd_ing->add_option("--val-frac", ingest.spec.val_frac, "Validation fraction");
  cmd_ing->add_option("--test-frac", ingest.spec.test_frac, "Test fraction");
  cmd_ing->add_option("--foldin-frac", ingest.spec.foldin_frac,
                      "Fold-in fraction inside holdout users");
  cmd_ing->callback([&] {
    ingest.has_threshold = thr_opt->count() > 0;
    cmd_ingest(ingest, argv_echo);
  });

  // train
  TrainArgs train;
  std::string train_algo;
  long long train_seed = 0;
  int train_epochs = 0;
  double train_lex = 0, train_rho = 0, train_gamma = 0;
  auto* cmd_tr = app.add_subcommand("train", "Train a model on a bundle");
  add_common(cmd_tr, train.co);
  auto* tr_algo = cmd_tr->add_option("--algo", train_algo, "ials or exadmm");
  auto* tr_seed = cmd_tr->add_option("--seed", train_seed, "Init seed");
  auto* tr_epochs = cmd_tr->add_option("--epochs", train_epochs, "Epoch count");
  auto* tr_lex = cmd_tr->add_option("--lambda-ex-star", train_lex,
                                    "Exposure weight (pre-scaling)");
  auto* tr_rho = cmd_tr->add_option("--rho-star", train_rho,
                                    "Penalty weight (pre-scaling)");
  auto* tr_gamma = cmd_tr->add_option("--gamma", train_gamma, "Step size");
  cmd_tr->add_flag("--grad-norms", train.grad_norms,
                   "Log gradient norms every epoch (slow)");
  cmd_tr->callback([&] {
    if (tr_algo->count()) train.overrides.emplace_back("algo", train_algo);
    if (tr_seed->count()) {
      train.overrides.emplace_back("seed", fmt::format("{}", train_seed));
    }
    if (tr_epochs->count()) {
      train.overrides.emplace_back("epochs", fmt::format("{}", train_epochs));
    }
    if (tr_lex->count()) {
      train.overrides.emplace_back("lambda_ex_star", format_double(train_lex));
    }
    if (tr_rho->count()) {
      train.overrides.emplace_back("rho_star", format_double(train_rho));
    }
    if (tr_gamma->count()) {
      train.overrides.emplace_back("gamma", format_double(train_gamma));
    }
    cmd_train(train, argv_echo);
  });

  // evaluate
  EvaluateArgs evaluate;
  std::string eval_k, eval_split;
  auto* cmd_ev = app.add_subcommand(
      "evaluate", "Fold-in evaluation of a checkpoint on holdout users");
  add_common(cmd_ev, evaluate.co);
  cmd_ev->add_option("--checkpoint", evaluate.checkpoint, "Model checkpoint")
      ->required();
  auto* ev_k = cmd_ev->add_option("--k", eval_k,
                                  "Comma-separated ranking cutoffs");
  auto* ev_split =
      cmd_ev->add_option("--split", eval_split, "val or test (default test)");
  cmd_ev->callback([&] {
    if (ev_k->count()) evaluate.overrides.emplace_back("k_values", eval_k);
    if (ev_split->count()) {
      evaluate.overrides.emplace_back("split", eval_split);
    }
    cmd_evaluate(evaluate, argv_echo);
  });

  // sweep
  SweepArgs sweep;
  std::string sweep_algo;
  long long sweep_seed = 0;
  int sweep_epochs = 0;
  auto* cmd_sw = app.add_subcommand(
      "sweep", "Grid sweep with a Pareto-flagged frontier table");
  add_common(cmd_sw, sweep.co);
  auto* sw_algo = cmd_sw->add_option("--algo", sweep_algo, "ials or exadmm");
  auto* sw_seed = cmd_sw->add_option("--seed", sweep_seed, "Init seed");
  auto* sw_epochs = cmd_sw->add_option("--epochs", sweep_epochs, "Epoch count");
  cmd_sw->callback([&] {
    if (sw_algo->count()) sweep.overrides.emplace_back("algo", sweep_algo);
    if (sw_seed->count()) {
      sweep.overrides.emplace_back("seed", fmt::format("{}", sweep_seed));
    }
    if (sw_epochs->count()) {
      sweep.overrides.emplace_back("epochs", fmt::format("{}", sweep_epochs));
    }
    cmd_sweep(sweep, argv_echo);
  });

  // lorenz
  LorenzArgs lorenz;
  long long lorenz_k = 0, lorenz_points = 0;
  std::string lorenz_split;
  auto* cmd_lz = app.add_subcommand(
      "lorenz", "Cumulative exposure curve for a checkpoint");
  add_common(cmd_lz, lorenz.co);
  cmd_lz->add_option("--checkpoint", lorenz.checkpoint, "Model checkpoint")
      ->required();
  auto* lz_k = cmd_lz->add_option("--k", lorenz_k, "Ranking cutoff");
  auto* lz_split =
      cmd_lz->add_option("--split", lorenz_split, "val or test (default test)");
  auto* lz_points =
      cmd_lz->add_option("--points", lorenz_points, "Curve sample count");
  cmd_lz->callback([&] {
    if (lz_k->count()) {
      lorenz.overrides.emplace_back("k", fmt::format("{}", lorenz_k));
    }
    if (lz_split->count()) lorenz.overrides.emplace_back("split", lorenz_split);
    if (lz_points->count()) {
      lorenz.overrides.emplace_back("points", fmt::format("{}", lorenz_points));
    }
    cmd_lorenz(lorenz, argv_echo);
  });

  // diagnose
  DiagnoseArgs diagnose;
  auto* cmd_dg = app.add_subcommand(
      "diagnose", "Convergence report from a training run's epoch log");
  cmd_dg->add_option("--data", diagnose.co.data,
                     "Run directory holding epochs.tsv")
      ->required();
  cmd_dg->add_option("--out", diagnose.co.out, "Output directory")->required();
  cmd_dg->add_option("--tolerance", diagnose.tolerance,
                     "Residual tolerance for the converged verdict");
  cmd_dg->callback([&] { cmd_diagnose(diagnose, argv_echo); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
