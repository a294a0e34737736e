#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "topo/morphology.hpp"
#include "topo/trainer.hpp"

using namespace topo;

namespace {

/// Small in-memory dataset of 16x16 annulus phantoms (no degradation, so
/// tests stay fast; the training loop does not care).
Dataset tiny_dataset(int n_labeled, int n_unlabeled, int n_test, std::uint64_t seed) {
  Dataset ds;
  const int total = n_labeled + n_unlabeled + n_test;
  for (int idx = 0; idx < total; ++idx) {
    Rng rng(mix_seed(seed, idx));
    const double ci = 8.0 + rng.uniform(-1.0, 1.0);
    const double cj = 8.0 + rng.uniform(-1.0, 1.0);
    const Phantom phantom = make_annulus(16, 16, ci, cj, 2.5, 5.5, mix_seed(seed, 100 + idx));
    const Split split = idx < n_labeled              ? Split::labeled
                        : idx < n_labeled + n_unlabeled ? Split::unlabeled
                                                        : Split::test;
    ds.items.push_back({phantom.image, phantom.label, split});
  }
  return ds;
}

TrainConfig tiny_config(double lambda, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.n_labeled = 3;
  cfg.n_unlabeled = 4;
  cfg.lambda = lambda;
  cfg.k = 2;
  cfg.eps = 0.01;
  cfg.epochs = 2;
  cfg.batch_size = 6;
  cfg.learning_rate = 1e-3;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("trainer");

TEST_CASE("lambda = 0 semi-supervised run is bit-identical to supervised") {
  const Dataset ds = tiny_dataset(3, 4, 0, 1);
  const TrainResult semi = train_semisupervised(tiny_config(0.0, 9), ds);
  const TrainResult sup = train_supervised(tiny_config(0.0, 9), ds);
  CHECK(semi.net.params == sup.net.params);
  REQUIRE(semi.history.size() == sup.history.size());
  for (std::size_t e = 0; e < semi.history.size(); ++e) {
    CHECK(semi.history[e].supervised_loss == sup.history[e].supervised_loss);
    CHECK(semi.history[e].topo_grad_l1 == 0.0);
  }
}

TEST_CASE("semi-supervised smoke run: finite history, topological term active") {
  const Dataset ds = tiny_dataset(3, 4, 0, 2);
  TrainConfig cfg = tiny_config(1.0, 3);
  cfg.epochs = 3;
  const TrainResult res = train_semisupervised(cfg, ds);
  REQUIRE(res.history.size() == 3);
  double topo_total = 0.0;
  for (const auto& row : res.history) {
    CHECK(std::isfinite(row.supervised_loss));
    CHECK(row.supervised_loss >= 0.0);
    topo_total += row.topo_grad_l1;
  }
  CHECK(topo_total > 0.0);
  // same seed reruns identically
  const TrainResult rerun = train_semisupervised(cfg, ds);
  CHECK(rerun.net.params == res.net.params);
}

TEST_CASE("supervised loss generally decreases over a short run") {
  const Dataset ds = tiny_dataset(4, 0, 0, 21);
  TrainConfig cfg = tiny_config(0.0, 22);
  cfg.n_labeled = 4;
  cfg.n_unlabeled = 0;
  cfg.epochs = 10;
  const TrainResult res = train_supervised(cfg, ds);
  const auto& h = res.history;
  REQUIRE(h.size() == 10);
  const double early = (h[0].supervised_loss + h[1].supervised_loss) / 2.0;
  const double late = (h[8].supervised_loss + h[9].supervised_loss) / 2.0;
  CHECK(late < early);
}

TEST_CASE("training requires labeled data") {
  const Dataset ds = tiny_dataset(0, 3, 0, 4);
  CHECK_THROWS_AS(train_supervised(tiny_config(0.0, 1), ds), std::invalid_argument);
  TrainConfig bad = tiny_config(0.0, 1);
  bad.n_labeled = 0;
  CHECK_THROWS_AS(train_supervised(bad, tiny_dataset(2, 0, 0, 5)), std::invalid_argument);
}

TEST_CASE("pseudo-label baseline: zero rounds equals plain supervised") {
  const Dataset ds = tiny_dataset(3, 4, 0, 6);
  const TrainConfig cfg = tiny_config(0.0, 7);
  const TinyNet direct = train_supervised(cfg, ds).net;
  CHECK(train_pseudolabel_ssl(cfg, ds, 0) == direct);
}

TEST_CASE("pseudo-label rounds run deterministically and use binary labels") {
  const Dataset ds = tiny_dataset(2, 3, 0, 8);
  TrainConfig cfg = tiny_config(0.0, 11);
  cfg.n_labeled = 2;
  cfg.n_unlabeled = 3;
  cfg.epochs = 1;
  const TinyNet a = train_pseudolabel_ssl(cfg, ds, 2, 1);
  const TinyNet b = train_pseudolabel_ssl(cfg, ds, 2, 1);
  CHECK(a == b);
  CHECK_FALSE(a == train_supervised(cfg, ds).net);
  // the pseudo labels themselves are thresholded masks by construction
  const BinaryMask pseudo = binarize(predict(a, ds.items[3].image), 0.5);
  for (auto v : pseudo.values) CHECK((v == 0 || v == 1));
}

TEST_CASE("refine: already-satisfied prior returns the input unchanged") {
  const ProbabilityGrid s0 = testing::perfect_ring3x3();
  const ProbabilityGrid out = refine_mask(s0, ring_prior(true), {5, 0.01, PlacementMode::paired_cell});
  CHECK(out == s0);
}

TEST_CASE("refine repairs a broken noisy annulus") {
  testing::AnnulusMapOpts opts;
  opts.gap_pixels = 2;
  opts.clutter_pixels = 1;
  const ProbabilityGrid s0 = testing::annulus_prob_map(16, 16, 31, opts);
  const BinaryMask before = binarize(s0, 0.5);
  const bool wrong =
      betti0_bruteforce(before) != 1 || betti1_bruteforce(before) != 1;
  REQUIRE(wrong);

  const ProbabilityGrid refined =
      refine_mask(s0, ring_prior(true), {5, 0.01, PlacementMode::paired_cell}, {0.1, 0.5, 1.0, 200});
  const BinaryMask after = binarize(refined, 0.5);
  CHECK(betti0_bruteforce(after) == 1);
  CHECK(betti1_bruteforce(after) == 1);
  for (double v : refined.values) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("refine with dominant fidelity stays near the input") {
  const ProbabilityGrid s0 = testing::annulus_prob_map(16, 16, 33, {});
  RefineConfig rc;
  rc.mu = 5.0;
  rc.lambda = 0.001;
  rc.max_iters = 50;
  const ProbabilityGrid out = refine_mask(s0, ring_prior(true), {2, 0.01, PlacementMode::paired_cell}, rc);
  for (std::size_t n = 0; n < out.values.size(); ++n)
    CHECK(std::fabs(out.values[n] - s0.values[n]) < 0.01);
}

TEST_CASE("evaluation scores exact and degenerate predictions") {
  const Dataset ds = tiny_dataset(0, 0, 4, 40);
  std::vector<ProbabilityGrid> exact, zeros;
  std::vector<const BinaryMask*> labels;
  for (int idx : ds.indices(Split::test)) {
    exact.push_back(grid_from_mask(ds.items[idx].label));
    zeros.push_back(ProbabilityGrid(16, 16, 0.0));
    labels.push_back(&ds.items[idx].label);
  }
  const EvalReport perfect = evaluate_predictions(exact, labels, ring_prior());
  CHECK(perfect.mean_dice == doctest::Approx(1.0));
  CHECK(perfect.topology_correct_fraction == doctest::Approx(1.0));
  REQUIRE(perfect.per_image.size() == 4);
  for (const auto& rec : perfect.per_image) {
    CHECK(rec.betti0 == 1);
    CHECK(rec.betti1 == 1);
  }

  const EvalReport blank = evaluate_predictions(zeros, labels, ring_prior());
  CHECK(blank.mean_dice == doctest::Approx(0.0));
  CHECK(blank.topology_correct_fraction == doctest::Approx(0.0));
}

TEST_CASE("evaluate runs a net over the test split; jobs do not change results") {
  const Dataset ds = tiny_dataset(1, 0, 3, 50);
  const TinyNet net = TinyNet::initialized(60);
  const EvalReport a = evaluate(net, ds, ring_prior(), 1);
  const EvalReport b = evaluate(net, ds, ring_prior(), 2);
  REQUIRE(a.per_image.size() == 3);
  CHECK(a.mean_dice == b.mean_dice);
  CHECK(a.topology_correct_fraction == b.topology_correct_fraction);
}

TEST_CASE("binary closure is idempotent") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BinaryMask m = testing::random_mask(20, 20, 0.35, 600 + seed);
    const BinaryMask once = binary_closure(m, 3);
    CHECK(binary_closure(once, 3) == once);
  }
  const BinaryMask all_true(10, 10, true);
  CHECK(binary_closure(all_true, 3) == all_true);
}

TEST_CASE("binary closure bridges a one-pixel gap in a ring") {
  const Phantom phantom = make_annulus(24, 24, 12.0, 12.0, 5.0, 9.0, 70);
  BinaryMask broken = phantom.label;
  for (int i = 0; i < 12; ++i) broken.at(i, 12) = 0;  // one-pixel-wide radial slit
  REQUIRE(betti1_bruteforce(broken) == 0);
  const BinaryMask closed = binary_closure(broken, 3);
  CHECK(betti1_bruteforce(closed) == 1);
  CHECK(betti0_bruteforce(closed) == 1);
}

TEST_SUITE_END();
