#include "helpers.hpp"

#include "cegmon/bn.hpp"
#include "cegmon/error.hpp"
#include "cegmon/sampler.hpp"

#include <doctest.h>

#include <cmath>

using namespace cegmon;
using testing::make_vars;

TEST_CASE("degenerate florets give a constant sample") {
  const auto tree = build_event_tree(make_vars({2, 3}));
  const auto staging = Staging::saturated(tree);
  std::vector<Vector> theta{Vector{{0.0, 1.0}}, Vector{{0.0, 0.0, 1.0}}, Vector{{1.0, 0.0, 0.0}}};
  const auto d = sample_from_ceg(StagedTree{tree, staging, theta}, 50, 3);
  for (long m = 0; m < d.size(); ++m) {
    CHECK(d.row(m)[0] == 1);
    CHECK(d.row(m)[1] == 0);
  }
}

TEST_CASE("same seed, same sample") {
  CountedStream rng(1);
  const auto tree = build_event_tree(make_vars({2, 3, 2}));
  const auto staging = testing::random_staging(tree, rng);
  const StagedTree st{tree, staging, testing::random_theta(staging, rng)};
  CHECK(sample_from_ceg(st, 300, 9).cases() == sample_from_ceg(st, 300, 9).cases());
  CHECK(sample_from_ceg(st, 300, 9).cases() != sample_from_ceg(st, 300, 10).cases());
  CHECK(*sample_from_ceg(st, 1, 9).provenance().seed == 9);
}

TEST_CASE("leaf frequencies converge to path probabilities") {
  CountedStream rng(2);
  const auto tree = build_event_tree(make_vars({2, 2, 3}));
  const auto staging = testing::random_staging(tree, rng);
  const StagedTree st{tree, staging, testing::random_theta(staging, rng, 2.0)};
  const long n = 100000;
  const auto d = sample_from_ceg(st, n, 77);
  std::vector<long> hits(tree.num_vertices(), 0);
  for (long m = 0; m < n; ++m) ++hits[tree.leaf_of(d.row(m))];
  for (int leaf : tree.leaves()) {
    double p = 1.0;
    int v = 0;
    for (int level : tree.path(leaf)) {
      p *= st.theta[staging.stage_of(v)][level];
      v = tree.child(v, level);
    }
    const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    CHECK(std::abs(static_cast<double>(hits[leaf]) / static_cast<double>(n) - p) <= 3.0 * sd + 1e-12);
  }
}

TEST_CASE("sampling needs probabilities") {
  const auto tree = build_event_tree(make_vars({2}));
  CHECK_THROWS_AS(sample_from_ceg(StagedTree{tree, Staging::saturated(tree), {}}, 5, 1), InputError);
}

TEST_CASE("bn sampling follows the cpts") {
  const DiscreteBN bn(make_vars({2, 2}), {{0, 1}}, 2.0);
  const std::vector<Vector> rows{Vector{{0.3, 0.7}}, Vector{{1.0, 0.0}}, Vector{{0.0, 1.0}}};
  const auto d = sample_from_bn(bn, rows, 20000, 4);
  long ones = 0;
  for (long m = 0; m < d.size(); ++m) {
    CHECK(d.row(m)[1] == d.row(m)[0]);
    ones += d.row(m)[0];
  }
  CHECK(std::abs(static_cast<double>(ones) / 20000.0 - 0.7) < 0.02);
  CHECK_THROWS_AS(sample_from_bn(bn, {rows[0]}, 5, 1), InputError);
}
