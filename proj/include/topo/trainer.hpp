// trainer.hpp
//
// Training and evaluation harness.
//
// Semi-supervised training follows the scheme: per batch, the supervised
// loss gradient is computed on the labeled sub-batch (mean over its items)
// and the topological gradient, scaled by lambda, on the unlabeled
// sub-batch; every item's output gradient is backpropagated and the
// parameter gradients are summed before one Adam step. Batches keep a fixed
// labeled:unlabeled ratio matching N_l : N_u. Labeled and unlabeled
// shuffling use independent RNG streams, so a lambda = 0 run is bit-identical
// to plain supervised training with the same seed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "topo/dataset.hpp"
#include "topo/grid.hpp"
#include "topo/model.hpp"
#include "topo/oracle.hpp"
#include "topo/parallel.hpp"
#include "topo/rng.hpp"
#include "topo/topograd.hpp"

namespace topo {

enum class LossKind { dice, bce };

struct TrainConfig {
  int n_labeled = 1;
  int n_unlabeled = 0;
  double lambda = 1.0;   // weight of the topological gradient on unlabeled items
  int k = 5;
  double eps = 0.01;
  int epochs = 1;
  int batch_size = 15;
  double learning_rate = 1e-4;
  LossKind loss = LossKind::dice;
  std::uint64_t seed = 0;
  bool topo_on_labeled = false;  // also apply lambda*G to labeled items
  // scale each topological gradient map by 1/(H*W) so lambda = 1 is
  // commensurate with the mean-reduced pixelwise losses
  bool topo_pixel_norm = true;
  int jobs = 1;
};

struct DataItem {
  ProbabilityGrid image;
  BinaryMask label;
  Split split = Split::labeled;
};

struct Dataset {
  std::vector<DataItem> items;

  std::vector<int> indices(Split split) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(items.size()); ++i)
      if (items[i].split == split) out.push_back(i);
    return out;
  }
};

/// Loads every item referenced by a manifest. Labels are loaded for all
/// splits; the training loop only ever reads those of the labeled split.
inline Dataset load_dataset(const DatasetManifest& manifest) {
  Dataset ds;
  for (const auto& item : manifest.items) {
    const auto image_path = std::filesystem::path(manifest.base_dir) / item.image_path;
    const auto label_path = std::filesystem::path(manifest.base_dir) / item.label_path;
    ds.items.push_back(
        {load_grid(image_path.string()), mask_from_grid(load_grid(label_path.string())), item.split});
  }
  return ds;
}

struct HistoryRow {
  int epoch = 0;
  double supervised_loss = 0.0;  // mean per labeled item over the epoch
  double topo_grad_l1 = 0.0;     // sum of |lambda * G| over the epoch
};

struct TrainResult {
  TinyNet net;
  std::vector<HistoryRow> history;
};

inline ProbabilityGrid predict(const TinyNet& net, const ProbabilityGrid& image) {
  return forward(net, image).first;
}

namespace trainer_detail {

inline std::pair<double, GradientMap> supervised_loss(LossKind kind, const ProbabilityGrid& s,
                                                      const BinaryMask& y) {
  return kind == LossKind::dice ? dice_loss(s, y) : bce_loss(s, y);
}

struct ItemGrad {
  std::vector<double> grads;
  double loss = 0.0;
  double topo_l1 = 0.0;
  bool has_grads = false;
};

}  // namespace trainer_detail

enum class TrainMode { supervised, semisupervised };

/// Shared training loop. `init` continues from existing weights (used by the
/// pseudo-label baseline); otherwise parameters are seeded from cfg.seed.
inline TrainResult train_loop(const TrainConfig& cfg, const Dataset& ds, TrainMode mode,
                              const TinyNet* init = nullptr) {
  if (cfg.n_labeled < 1) throw std::invalid_argument("training requires at least one labeled item");
  if (cfg.epochs < 0 || cfg.batch_size < 1) throw std::invalid_argument("bad epochs/batch size");
  if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");

  std::vector<int> labeled = ds.indices(Split::labeled);
  if (static_cast<int>(labeled.size()) < cfg.n_labeled)
    throw std::invalid_argument("dataset has fewer labeled items than n_labeled");
  labeled.resize(cfg.n_labeled);

  const bool use_topo = mode == TrainMode::semisupervised && cfg.lambda > 0.0 && cfg.n_unlabeled > 0;
  std::vector<int> unlabeled;
  if (use_topo) {
    unlabeled = ds.indices(Split::unlabeled);
    if (static_cast<int>(unlabeled.size()) < cfg.n_unlabeled)
      throw std::invalid_argument("dataset has fewer unlabeled items than n_unlabeled");
    unlabeled.resize(cfg.n_unlabeled);
  }

  // fixed labeled:unlabeled batch composition
  int lb, ub;
  if (cfg.n_unlabeled > 0) {
    const double frac = static_cast<double>(cfg.n_labeled) / (cfg.n_labeled + cfg.n_unlabeled);
    lb = std::clamp(static_cast<int>(std::lround(cfg.batch_size * frac)), 1,
                    std::min(cfg.batch_size, cfg.n_labeled));
    ub = cfg.batch_size - lb;
  } else {
    lb = std::min(cfg.batch_size, cfg.n_labeled);
    ub = 0;
  }

  TinyNet net = init ? *init : TinyNet::initialized(cfg.seed);
  AdamState adam(cfg.learning_rate);
  Rng rng_labeled(mix_seed(cfg.seed, 11));
  Rng rng_unlabeled(mix_seed(cfg.seed, 22));
  const TopoGradConfig topo_cfg{cfg.k, cfg.eps, PlacementMode::paired_cell};

  std::vector<int> unl_order = unlabeled;
  std::size_t unl_ptr = unl_order.size();  // forces a shuffle before first use

  TrainResult result;
  const int steps = (cfg.n_labeled + lb - 1) / lb;
  const std::size_t n_params = tinynet_param_count();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng_labeled.shuffle(labeled);
    double epoch_loss = 0.0, epoch_topo = 0.0;
    int epoch_items = 0;
    std::size_t lab_ptr = 0;

    for (int step = 0; step < steps; ++step) {
      const int lbs = static_cast<int>(std::min<std::size_t>(lb, cfg.n_labeled - lab_ptr));
      std::vector<int> batch(labeled.begin() + lab_ptr, labeled.begin() + lab_ptr + lbs);
      lab_ptr += lbs;

      std::vector<int> topo_batch;
      if (use_topo)
        for (int u = 0; u < ub; ++u) {
          if (unl_ptr >= unl_order.size()) {
            rng_unlabeled.shuffle(unl_order);
            unl_ptr = 0;
          }
          topo_batch.push_back(unl_order[unl_ptr++]);
        }

      std::vector<trainer_detail::ItemGrad> slots(batch.size() + topo_batch.size());

      parallel_for(static_cast<int>(slots.size()), cfg.jobs, [&](int s) {
        auto& slot = slots[s];
        if (s < static_cast<int>(batch.size())) {
          const DataItem& item = ds.items[batch[s]];
          auto [pred, tape] = forward(net, item.image);
          auto [loss, grad] = trainer_detail::supervised_loss(cfg.loss, pred, item.label);
          slot.loss = loss;
          for (double& g : grad.values) g /= lbs;
          if (cfg.topo_on_labeled && use_topo) {
            const GradientMap topo = topo_grad_beta1(pred, topo_cfg);
            const double scale =
                cfg.lambda / (cfg.topo_pixel_norm ? static_cast<double>(topo.values.size()) : 1.0);
            for (std::size_t n = 0; n < grad.values.size(); ++n) {
              grad.values[n] += scale * topo.values[n];
              slot.topo_l1 += std::fabs(cfg.lambda * topo.values[n]);
            }
          }
          slot.grads = backward(net, tape, grad);
          slot.has_grads = true;
        } else {
          const DataItem& item = ds.items[topo_batch[s - batch.size()]];
          auto [pred, tape] = forward(net, item.image);
          GradientMap grad = topo_grad_beta1(pred, topo_cfg);
          const double scale =
              cfg.lambda / (cfg.topo_pixel_norm ? static_cast<double>(grad.values.size()) : 1.0);
          double l1 = 0.0;
          for (double& g : grad.values) {
            l1 += std::fabs(cfg.lambda * g);
            g *= scale;
          }
          slot.topo_l1 = l1;
          if (l1 > 0.0) {  // an all-zero map backpropagates to exact zeros
            slot.grads = backward(net, tape, grad);
            slot.has_grads = true;
          }
        }
      });

      std::vector<double> grads(n_params, 0.0);
      for (const auto& slot : slots) {
        if (slot.has_grads)
          for (std::size_t i = 0; i < n_params; ++i) grads[i] += slot.grads[i];
        epoch_topo += slot.topo_l1;
      }
      for (int s = 0; s < lbs; ++s) epoch_loss += slots[s].loss;
      epoch_items += lbs;

      adam_step(net, grads, adam);
    }
    result.history.push_back({epoch, epoch_loss / std::max(1, epoch_items), epoch_topo});
  }

  result.net = std::move(net);
  return result;
}

inline TrainResult train_supervised(const TrainConfig& cfg, const Dataset& ds) {
  return train_loop(cfg, ds, TrainMode::supervised);
}

inline TrainResult train_semisupervised(const TrainConfig& cfg, const Dataset& ds) {
  return train_loop(cfg, ds, TrainMode::semisupervised);
}

/// Iterative pseudo-labeling baseline: supervised phase, then `rounds`
/// rounds in which the current network's thresholded predictions on the
/// unlabeled items become labels and training continues.
inline TinyNet train_pseudolabel_ssl(const TrainConfig& cfg, const Dataset& ds, int rounds = 3,
                                     int round_epochs = 10) {
  if (rounds < 0) throw std::invalid_argument("pseudo-label rounds must be >= 0");
  TinyNet net = train_loop(cfg, ds, TrainMode::supervised).net;
  if (rounds == 0) return net;

  std::vector<int> unlabeled = ds.indices(Split::unlabeled);
  if (static_cast<int>(unlabeled.size()) < cfg.n_unlabeled)
    throw std::invalid_argument("dataset has fewer unlabeled items than n_unlabeled");
  unlabeled.resize(cfg.n_unlabeled);

  for (int round = 1; round <= rounds; ++round) {
    Dataset pseudo = ds;
    for (int idx : unlabeled) {
      DataItem& item = pseudo.items[idx];
      item.label = binarize(predict(net, item.image), 0.5);
      item.split = Split::labeled;
    }
    TrainConfig round_cfg = cfg;
    round_cfg.epochs = round_epochs;
    round_cfg.n_labeled = cfg.n_labeled + cfg.n_unlabeled;
    round_cfg.n_unlabeled = 0;
    round_cfg.seed = mix_seed(cfg.seed, 500 + round);
    net = train_loop(round_cfg, pseudo, TrainMode::supervised, &net).net;
  }
  return net;
}

// ---------------------------------------------------------------------------
// Direct per-image refinement (no network).
// ---------------------------------------------------------------------------

struct RefineConfig {
  double eta = 0.1;
  double mu = 0.5;       // fidelity pull toward the input map
  double lambda = 1.0;   // weight of the topological gradient
  int max_iters = 200;
};

/// True when the 0.5-threshold mask of `s` has exactly the Betti numbers
/// the prior asks for (checked with the brute-force oracle).
inline bool satisfies_prior(const ProbabilityGrid& s, const TopologyPrior& prior) {
  const BinaryMask mask = binarize(s, 0.5);
  int betti[2] = {betti0_bruteforce(mask), 0};
  betti[1] = betti[0] - euler_characteristic(mask);
  for (const auto& [d, want] : prior.desired)
    if (betti[d] != want) return false;
  return true;
}

/// Iterates S <- clamp(S - eta * (lambda * G + mu * (S - S0)), 0, 1) with G
/// from topo_grad_general. Stops when G is identically zero, when the
/// 0.5-threshold topology matches the prior, or at max_iters. Without the
/// topology stop the loop has no reachable fixed point on a defective S0:
/// the fidelity term keeps regenerating surplus bars and the shortening
/// keeps acting on them, so the mask oscillates around the repaired state.
inline ProbabilityGrid refine_mask(const ProbabilityGrid& s0, const TopologyPrior& prior,
                                   const TopoGradConfig& cfg, const RefineConfig& rc = {}) {
  validate_grid(s0);
  validate_prior(prior);
  ProbabilityGrid s = s0;
  for (int iter = 0; iter < rc.max_iters; ++iter) {
    if (satisfies_prior(s, prior)) break;
    const GradientMap g = topo_grad_general(s, prior, cfg);
    bool any = false;
    for (double v : g.values)
      if (v != 0.0) {
        any = true;
        break;
      }
    if (!any) break;
    for (std::size_t n = 0; n < s.values.size(); ++n)
      s.values[n] = std::clamp(
          s.values[n] - rc.eta * (rc.lambda * g.values[n] + rc.mu * (s.values[n] - s0.values[n])),
          0.0, 1.0);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation.
// ---------------------------------------------------------------------------

struct EvalRecord {
  double dice = 0.0;
  int betti0 = 0;
  int betti1 = 0;
  bool topology_correct = false;
};

struct EvalReport {
  double mean_dice = 0.0;
  double topology_correct_fraction = 0.0;
  std::vector<EvalRecord> per_image;
};

/// Dice overlap of two binary masks; 1.0 when both are empty.
inline double binary_dice(const BinaryMask& a, const BinaryMask& b) {
  if (a.height != b.height || a.width != b.width)
    throw std::invalid_argument("binary_dice: shape mismatch");
  std::size_t inter = 0, total = 0;
  for (std::size_t n = 0; n < a.values.size(); ++n) {
    const bool av = a.values[n] != 0, bv = b.values[n] != 0;
    inter += av && bv;
    total += av;
    total += bv;
  }
  return total == 0 ? 1.0 : 2.0 * static_cast<double>(inter) / static_cast<double>(total);
}

/// Core of evaluate(): predictions are thresholded at 0.5; topology is
/// checked with the brute-force oracle (never with the barcode machinery)
/// against every dimension the prior specifies.
inline EvalReport evaluate_predictions(const std::vector<ProbabilityGrid>& predictions,
                                       const std::vector<const BinaryMask*>& labels,
                                       const TopologyPrior& prior) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("evaluate: predictions/labels size mismatch");
  validate_prior(prior);
  EvalReport report;
  for (std::size_t n = 0; n < predictions.size(); ++n) {
    const BinaryMask mask = binarize(predictions[n], 0.5);
    EvalRecord rec;
    rec.dice = binary_dice(mask, *labels[n]);
    rec.betti0 = betti0_bruteforce(mask);
    rec.betti1 = betti1_bruteforce(mask);
    rec.topology_correct = true;
    for (const auto& [d, want] : prior.desired) {
      const int have = d == 0 ? rec.betti0 : rec.betti1;
      if (have != want) rec.topology_correct = false;
    }
    report.per_image.push_back(rec);
    report.mean_dice += rec.dice;
    report.topology_correct_fraction += rec.topology_correct ? 1.0 : 0.0;
  }
  if (!report.per_image.empty()) {
    report.mean_dice /= static_cast<double>(report.per_image.size());
    report.topology_correct_fraction /= static_cast<double>(report.per_image.size());
  }
  return report;
}

/// Evaluates a network on the dataset's test split.
inline EvalReport evaluate(const TinyNet& net, const Dataset& ds, const TopologyPrior& prior,
                           int jobs = 1) {
  const std::vector<int> test = ds.indices(Split::test);
  std::vector<ProbabilityGrid> preds(test.size());
  std::vector<const BinaryMask*> labels(test.size());
  parallel_for(static_cast<int>(test.size()), jobs, [&](int n) {
    preds[n] = predict(net, ds.items[test[n]].image);
    labels[n] = &ds.items[test[n]].label;
  });
  return evaluate_predictions(preds, labels, prior);
}

// ---------------------------------------------------------------------------
// Report and history files.
// ---------------------------------------------------------------------------

inline nlohmann::json eval_report_to_json(const EvalReport& report) {
  nlohmann::json per_image = nlohmann::json::array();
  for (const auto& r : report.per_image)
    per_image.push_back({{"dice", r.dice},
                         {"betti0", r.betti0},
                         {"betti1", r.betti1},
                         {"topology_correct", r.topology_correct}});
  return nlohmann::json{{"mean_dice", report.mean_dice},
                        {"topology_correct_fraction", report.topology_correct_fraction},
                        {"per_image", per_image}};
}

inline void save_eval_report_json(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << eval_report_to_json(report).dump(2) << '\n';
}

inline void save_eval_report_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "index,dice,betti0,betti1,topology_correct\n";
  for (std::size_t n = 0; n < report.per_image.size(); ++n) {
    const auto& r = report.per_image[n];
    out << n << ',' << r.dice << ',' << r.betti0 << ',' << r.betti1 << ','
        << (r.topology_correct ? 1 : 0) << '\n';
  }
}

inline void save_history_csv(const std::string& path, const std::vector<HistoryRow>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write history: " + path);
  out << "epoch,supervised_loss,topo_grad_l1\n";
  for (const auto& row : history)
    out << row.epoch << ',' << row.supervised_loss << ',' << row.topo_grad_l1 << '\n';
}

}  // namespace topo
