// cli.hpp
//
// Command-line front end. One subcommand per pipeline:
//
//   barcode   persistence barcode of a grid (JSON, optional CSV)
//   bettis    Betti curve of a grid via the brute-force oracle
//   topograd  topological-prior gradient map of a grid
//   refine    direct per-image refinement toward a topology prior
//   synth     synthetic annulus dataset generation
//   degrade   k-space line-removal degradation of a grid
//   train     train a model from a JSON config
//   eval      evaluate a checkpoint on a dataset's test split
//
// Relative output paths are resolved against $TOPOPRIOR_OUT_DIR when that
// variable is set. Exit code 0 on success, nonzero with a diagnostic on
// stderr otherwise.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topo/barcode_io.hpp"
#include "topo/dataset.hpp"
#include "topo/kspace.hpp"
#include "topo/oracle.hpp"
#include "topo/topograd.hpp"
#include "topo/trainer.hpp"

namespace topo::cli {

/// Output paths: relative ones are placed under $TOPOPRIOR_OUT_DIR if set.
inline std::string resolve_out(const std::string& path) {
  const char* base = std::getenv("TOPOPRIOR_OUT_DIR");
  if (base == nullptr || *base == '\0' || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).string();
}

inline TopologyPrior parse_prior(const std::string& text, bool penalize_extra) {
  int b0 = 0, b1 = 0;
  if (std::sscanf(text.c_str(), "%d,%d", &b0, &b1) != 2)
    throw CLI::ValidationError("--prior", "expected two comma-separated integers, e.g. 1,1");
  TopologyPrior prior;
  prior.desired[0] = b0;
  prior.desired[1] = b1;
  prior.penalize_extra = penalize_extra;
  validate_prior(prior);
  return prior;
}

struct TrainJob {
  std::string mode = "semisupervised";  // supervised | semisupervised | pseudolabel
  std::string data;                     // manifest path
  std::string out_model;
  std::string history;
  int pseudolabel_rounds = 3;
  int pseudolabel_round_epochs = 10;
  TrainConfig config;
};

inline TrainJob train_job_from_json(const nlohmann::json& j) {
  TrainJob job;
  job.mode = j.value("mode", job.mode);
  job.data = j.at("data").get<std::string>();
  job.out_model = j.value("out_model", std::string("model.json"));
  job.history = j.value("history", std::string());
  job.pseudolabel_rounds = j.value("pseudolabel_rounds", job.pseudolabel_rounds);
  job.pseudolabel_round_epochs = j.value("pseudolabel_round_epochs", job.pseudolabel_round_epochs);
  TrainConfig& c = job.config;
  c.n_labeled = j.value("n_labeled", c.n_labeled);
  c.n_unlabeled = j.value("n_unlabeled", c.n_unlabeled);
  c.lambda = j.value("lambda", c.lambda);
  c.k = j.value("k", c.k);
  c.eps = j.value("eps", c.eps);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  const std::string loss = j.value("loss", std::string("dice"));
  if (loss == "dice")
    c.loss = LossKind::dice;
  else if (loss == "bce")
    c.loss = LossKind::bce;
  else
    throw std::runtime_error("train config: loss must be 'dice' or 'bce', got '" + loss + "'");
  c.seed = j.value("seed", c.seed);
  c.topo_on_labeled = j.value("topo_on_labeled", c.topo_on_labeled);
  c.topo_pixel_norm = j.value("topo_pixel_norm", c.topo_pixel_norm);
  c.jobs = j.value("jobs", c.jobs);
  return job;
}

/// Runs the CLI on the given arguments (program name excluded).
inline int run(std::vector<std::string> args) {
  CLI::App app{"persistent-homology topology priors for 2D segmentation", "topoprior"};
  app.require_subcommand(1);

  // --- barcode ---------------------------------------------------------
  auto* barcode_cmd = app.add_subcommand("barcode", "compute the persistence barcode of a grid");
  std::string bc_in, bc_out = "bars.json", bc_csv;
  barcode_cmd->add_option("--in", bc_in, "input grid (CSV or PGM)")->required();
  barcode_cmd->add_option("--out", bc_out, "output barcode JSON");
  barcode_cmd->add_option("--csv", bc_csv, "also write dim,birth,death CSV");
  barcode_cmd->callback([&] {
    const Barcode barcode = compute_barcode(build_complex(load_grid(bc_in)));
    save_barcode_json(resolve_out(bc_out), barcode);
    if (!bc_csv.empty()) save_barcode_csv(resolve_out(bc_csv), barcode);
  });

  // --- bettis ----------------------------------------------------------
  auto* bettis_cmd = app.add_subcommand("bettis", "print the Betti curve of a grid (p,b0,b1)");
  std::string bt_in;
  bettis_cmd->add_option("--in", bt_in, "input grid (CSV or PGM)")->required();
  bettis_cmd->callback([&] {
    char buf[64];
    for (const BettiPoint& pt : betti_curve(load_grid(bt_in))) {
      std::snprintf(buf, sizeof(buf), "%g,%d,%d\n", pt.p, pt.betti0, pt.betti1);
      std::cout << buf;
    }
  });

  // --- topograd --------------------------------------------------------
  auto* tg_cmd = app.add_subcommand("topograd", "topological gradient map of a grid");
  std::string tg_in, tg_out = "grad.csv", tg_sparse, tg_prior = "";
  TopoGradConfig tg_cfg;
  bool tg_value_match = false, tg_penalize = false;
  tg_cmd->add_option("--in", tg_in, "input grid (CSV or PGM)")->required();
  tg_cmd->add_option("--out", tg_out, "dense gradient CSV");
  tg_cmd->add_option("--sparse", tg_sparse, "sparse i,j,g CSV of nonzero entries");
  tg_cmd->add_option("--k", tg_cfg.k, "pixels per bar end")->check(CLI::PositiveNumber);
  tg_cmd->add_option("--eps", tg_cfg.eps, "boundary skip threshold")
      ->check(CLI::Range(1e-12, 0.4999));
  tg_cmd->add_flag("--value-match", tg_value_match,
                   "place gradients on every pixel matching the endpoint value");
  tg_cmd->add_option("--prior", tg_prior, "desired Betti numbers b0,b1 (default: beta1=1 only)");
  tg_cmd->add_flag("--penalize-extra", tg_penalize, "also shorten surplus bars");
  tg_cmd->callback([&] {
    tg_cfg.placement = tg_value_match ? PlacementMode::value_match : PlacementMode::paired_cell;
    const ProbabilityGrid grid = load_grid(tg_in);
    const GradientMap grad = tg_prior.empty() && !tg_penalize
                                 ? topo_grad_beta1(grid, tg_cfg)
                                 : topo_grad_general(grid,
                                                     parse_prior(tg_prior.empty() ? "1,1" : tg_prior,
                                                                 tg_penalize),
                                                     tg_cfg);
    save_gradient_csv(resolve_out(tg_out), grad);
    if (!tg_sparse.empty()) save_gradient_sparse(resolve_out(tg_sparse), grad);
  });

  // --- refine ----------------------------------------------------------
  auto* rf_cmd = app.add_subcommand("refine", "refine a probability map toward a topology prior");
  std::string rf_in, rf_out = "refined.csv", rf_prior = "1,1";
  TopoGradConfig rf_cfg;
  RefineConfig rf_rc;
  bool rf_no_penalize = false;
  rf_cmd->add_option("--in", rf_in, "input grid (CSV or PGM)")->required();
  rf_cmd->add_option("--out", rf_out, "output grid CSV");
  rf_cmd->add_option("--k", rf_cfg.k, "pixels per bar end")->check(CLI::PositiveNumber);
  rf_cmd->add_option("--eps", rf_cfg.eps, "boundary skip threshold")
      ->check(CLI::Range(1e-12, 0.4999));
  rf_cmd->add_option("--eta", rf_rc.eta, "step size")->check(CLI::PositiveNumber);
  rf_cmd->add_option("--mu", rf_rc.mu, "fidelity weight")->check(CLI::NonNegativeNumber);
  rf_cmd->add_option("--lambda", rf_rc.lambda, "topological gradient weight")
      ->check(CLI::PositiveNumber);
  rf_cmd->add_option("--max-iters", rf_rc.max_iters, "iteration cap")->check(CLI::PositiveNumber);
  rf_cmd->add_option("--prior", rf_prior, "desired Betti numbers b0,b1");
  rf_cmd->add_flag("--no-penalize-extra", rf_no_penalize, "do not shorten surplus bars");
  rf_cmd->callback([&] {
    const TopologyPrior prior = parse_prior(rf_prior, !rf_no_penalize);
    save_grid_csv(resolve_out(rf_out), refine_mask(load_grid(rf_in), prior, rf_cfg, rf_rc));
  });

  // --- synth -----------------------------------------------------------
  auto* sy_cmd = app.add_subcommand("synth", "generate a synthetic annulus dataset");
  SynthConfig sy_cfg;
  std::string sy_out = "dataset", sy_split = "5,50,50";
  int sy_n = -1;
  bool sy_no_degrade = false;
  sy_cmd->add_option("--n", sy_n, "total item count (must equal the split sum)");
  sy_cmd->add_option("--split", sy_split, "labeled,unlabeled,test counts");
  sy_cmd->add_option("--seed", sy_cfg.seed, "master seed");
  sy_cmd->add_option("--out", sy_out, "output directory")->required();
  sy_cmd->add_option("--height", sy_cfg.height, "image height")->check(CLI::PositiveNumber);
  sy_cmd->add_option("--width", sy_cfg.width, "image width")->check(CLI::PositiveNumber);
  sy_cmd->add_option("--band", sy_cfg.band, "retained central k-space lines")
      ->check(CLI::PositiveNumber);
  sy_cmd->add_option("--p-remove", sy_cfg.p_remove, "k-space line removal probability")
      ->check(CLI::Range(0.0, 1.0));
  sy_cmd->add_option("--noise-sigma", sy_cfg.style.noise_sigma, "phantom noise sigma")
      ->check(CLI::NonNegativeNumber);
  sy_cmd->add_flag("--no-degrade", sy_no_degrade, "skip the k-space degradation");
  sy_cmd->callback([&] {
    if (std::sscanf(sy_split.c_str(), "%d,%d,%d", &sy_cfg.n_labeled, &sy_cfg.n_unlabeled,
                    &sy_cfg.n_test) != 3)
      throw CLI::ValidationError("--split", "expected three comma-separated counts, e.g. 5,50,50");
    if (sy_n >= 0 && sy_n != sy_cfg.n_labeled + sy_cfg.n_unlabeled + sy_cfg.n_test)
      throw CLI::ValidationError("--n", "total does not match the split sum");
    sy_cfg.degrade = !sy_no_degrade;
    const DatasetManifest manifest = generate_dataset(sy_cfg, resolve_out(sy_out));
    std::cout << "wrote " << manifest.items.size() << " items to " << resolve_out(sy_out) << "\n";
  });

  // --- degrade ---------------------------------------------------------
  auto* dg_cmd = app.add_subcommand("degrade", "k-space line-removal degradation of a grid");
  std::string dg_in, dg_out = "degraded.csv";
  DegradeConfig dg_cfg;
  dg_cmd->add_option("--in", dg_in, "input grid (CSV or PGM)")->required();
  dg_cmd->add_option("--out", dg_out, "output grid CSV");
  dg_cmd->add_option("--band", dg_cfg.band, "retained central lines")->check(CLI::PositiveNumber);
  dg_cmd->add_option("--p-remove", dg_cfg.p_remove, "line removal probability")
      ->check(CLI::Range(0.0, 1.0));
  dg_cmd->add_option("--seed", dg_cfg.seed, "seed");
  dg_cmd->callback([&] {
    save_grid_csv(resolve_out(dg_out), degrade_kspace(load_grid(dg_in), dg_cfg));
  });

  // --- train -----------------------------------------------------------
  auto* tr_cmd = app.add_subcommand("train", "train a model from a JSON config");
  std::string tr_config;
  int tr_jobs = 0;
  tr_cmd->add_option("--config", tr_config, "train config JSON")->required();
  tr_cmd->add_option("--jobs", tr_jobs, "parallel per-image workers (overrides config)")
      ->check(CLI::PositiveNumber);
  tr_cmd->callback([&] {
    std::ifstream in(tr_config);
    if (!in) throw std::runtime_error("cannot open train config: " + tr_config);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed train config " + tr_config + ": " + e.what());
    }
    TrainJob job = train_job_from_json(j);
    if (tr_jobs > 0) job.config.jobs = tr_jobs;
    const Dataset ds = load_dataset(load_manifest(job.data));
    TinyNet net;
    std::vector<HistoryRow> history;
    if (job.mode == "supervised") {
      TrainResult res = train_supervised(job.config, ds);
      net = std::move(res.net);
      history = std::move(res.history);
    } else if (job.mode == "semisupervised") {
      TrainResult res = train_semisupervised(job.config, ds);
      net = std::move(res.net);
      history = std::move(res.history);
    } else if (job.mode == "pseudolabel") {
      net = train_pseudolabel_ssl(job.config, ds, job.pseudolabel_rounds,
                                  job.pseudolabel_round_epochs);
    } else {
      throw std::runtime_error("train config: unknown mode '" + job.mode + "'");
    }
    save_checkpoint(net, resolve_out(job.out_model));
    if (!job.history.empty()) save_history_csv(resolve_out(job.history), history);
    std::cout << "wrote model to " << resolve_out(job.out_model) << "\n";
  });

  // --- eval ------------------------------------------------------------
  auto* ev_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset's test split");
  std::string ev_model, ev_data, ev_prior = "1,1", ev_json, ev_csv;
  int ev_jobs = 1;
  ev_cmd->add_option("--model", ev_model, "checkpoint JSON")->required();
  ev_cmd->add_option("--data", ev_data, "dataset manifest JSON")->required();
  ev_cmd->add_option("--prior", ev_prior, "desired Betti numbers b0,b1");
  ev_cmd->add_option("--report-json", ev_json, "write the full report as JSON");
  ev_cmd->add_option("--report-csv", ev_csv, "write the per-image table as CSV");
  ev_cmd->add_option("--jobs", ev_jobs, "parallel per-image workers")->check(CLI::PositiveNumber);
  ev_cmd->callback([&] {
    const TinyNet net = load_checkpoint(ev_model);
    const Dataset ds = load_dataset(load_manifest(ev_data));
    const EvalReport report = evaluate(net, ds, parse_prior(ev_prior, false), ev_jobs);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "mean_dice=%.4f topology_correct=%.4f n=%zu\n",
                  report.mean_dice, report.topology_correct_fraction, report.per_image.size());
    std::cout << buf;
    if (!ev_json.empty()) save_eval_report_json(resolve_out(ev_json), report);
    if (!ev_csv.empty()) save_eval_report_csv(resolve_out(ev_csv), report);
  });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace topo::cli
