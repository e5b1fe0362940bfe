#include "helpers.hpp"

#include "cegmon/ceg_monitor.hpp"
#include "cegmon/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace cegmon;
using testing::make_vars;

namespace {

double path_probability(const EventTree& tree, const Staging& staging, const std::vector<Vector>& theta, int leaf) {
  double p = 1.0;
  int v = 0;
  for (int level : tree.path(leaf)) {
    p *= theta[staging.stage_of(v)][level];
    v = tree.child(v, level);
  }
  return p;
}

bool consistent(const std::vector<int>& path, const std::vector<int>& evidence) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (evidence[i] >= 0 && evidence[i] != path[i]) return false;
  }
  return true;
}

Dataset random_cases(const std::vector<VariableSpec>& vars, CountedStream& rng, long n) {
  std::vector<std::vector<int>> rows;
  for (long r = 0; r < n; ++r) {
    std::vector<int> x;
    for (const auto& v : vars) x.push_back(static_cast<int>(rng.below(v.cardinality())));
    rows.push_back(x);
  }
  return testing::dataset_from_rows(vars, rows);
}

CegModel random_model(CountedStream& rng, const std::vector<int>& cards) {
  auto tree = build_event_tree(make_vars(cards));
  auto staging = testing::random_staging(tree, rng);
  CegModel model{StagedTree{tree, staging, {}}, testing::random_priors(staging, rng)};
  return model;
}

// Stage of the situation that case `x` passes through in `cut`, under `staging`.
int stage_on_path(const EventTree& tree, const Staging& staging, std::span<const int> x, int cut) {
  return staging.stage_of(tree.situations_on_path(x)[cut]);
}

}  // namespace

TEST_CASE("global monitor total equals minus the log marginal likelihood") {
  CountedStream rng(31);
  for (int rep = 0; rep < 30; ++rep) {
    const auto model = random_model(rng, testing::random_cards(rng, 4, 3));
    const auto data = random_cases(model.tree().variables(), rng, 40);
    const auto g = ceg_global_monitor(model, data);
    CHECK(g.total == doctest::Approx(-log_marginal_likelihood(ceg_posterior(model, data))).epsilon(1e-11));
  }
}

TEST_CASE("global monitor moments match leaf enumeration") {
  CountedStream rng(32);
  for (int rep = 0; rep < 15; ++rep) {
    const auto model = random_model(rng, testing::random_cards(rng, 3, 3));
    const auto& tree = model.tree();
    const auto data = random_cases(tree.variables(), rng, 12);
    const auto g = ceg_global_monitor(model, data);
    DirichletState state = model.prior_state();
    for (long m = 0; m < data.size(); ++m) {
      const auto theta = stage_predictives(state);
      double e = 0.0;
      double e2 = 0.0;
      for (int leaf : tree.leaves()) {
        const double p = path_probability(tree, model.staging(), theta, leaf);
        e -= p * std::log(p);
        e2 += p * std::log(p) * std::log(p);
      }
      const double s = -std::log(path_probability(tree, model.staging(), theta, tree.leaf_of(data.row(m))));
      CHECK(g.trace.rows()[m].step.S == doctest::Approx(s).epsilon(1e-12));
      CHECK(g.trace.rows()[m].step.E == doctest::Approx(e).epsilon(1e-12));
      CHECK(g.trace.rows()[m].step.V == doctest::Approx(e2 - e * e).epsilon(1e-9));
      observe_case(tree, model.staging(), state, data.row(m));
    }
  }
}

TEST_CASE("hasse neighbour counts") {
  const auto tree = build_event_tree(make_vars({2, 2, 2}));
  const auto& c1 = tree.cut(1);
  const auto& c2 = tree.cut(2);
  auto with_cut2 = [&](std::vector<std::vector<int>> blocks) {
    std::vector<Stage> st{{0, {0}, false}, {1, {c1[0]}, false}, {1, {c1[1]}, false}};
    for (auto& b : blocks) st.push_back(Stage{2, b, false});
    return Staging(tree, st);
  };
  CHECK(hasse_neighbors(tree, with_cut2({{c2[0], c2[1]}, {c2[2]}, {c2[3]}}), 2).size() == 4);
  CHECK(hasse_neighbors(tree, with_cut2({{c2[0]}, {c2[1]}, {c2[2]}, {c2[3]}}), 2).size() == 6);
  CHECK(hasse_neighbors(tree, with_cut2({{c2[0], c2[1], c2[2], c2[3]}}), 2).size() == 7);
  CHECK(hasse_neighbors(tree, with_cut2({{c2[0], c2[1], c2[2]}, {c2[3]}}), 2).size() == 4);
  CHECK(hasse_neighbors(tree, with_cut2({{c2[0]}, {c2[1]}, {c2[2]}, {c2[3]}}), 1).size() == 1);
  CHECK(hasse_neighbors(tree, Staging::saturated(tree), 0).empty());

  HasseOptions small;
  small.max_full_split_block = 3;
  CHECK(hasse_neighbors(tree, with_cut2({{c2[0], c2[1], c2[2], c2[3]}}), 2, small).size() == 4);

  for (const auto& n : hasse_neighbors(tree, with_cut2({{c2[0], c2[1]}, {c2[2], c2[3]}}), 2)) {
    CHECK(n.same_cut_partition(Staging::saturated(tree), 1));
  }
}

TEST_CASE("staging monitor weights follow the closed-form marginal likelihoods") {
  CountedStream rng(41);
  for (int rep = 0; rep < 10; ++rep) {
    const auto model = random_model(rng, {2, 3, 2});
    const auto& tree = model.tree();
    const int cut = 1 + static_cast<int>(rng.below(2));
    const auto candidates = default_staging_candidates(model, cut);
    const auto data = random_cases(tree.variables(), rng, 60);
    const auto res = staging_monitor(model, data, cut, candidates);
    REQUIRE(res.posterior.rows() == data.size() + 1);
    CHECK(res.posterior.row(0).sum() == doctest::Approx(1.0));
    for (long m : {0L, 7L, 60L}) {
      std::vector<double> lml;
      for (const auto& c : candidates) {
        DirichletState st(model.priors_for(c));
        for (long r = 0; r < m; ++r) st.observe_inplace(stage_on_path(tree, c, data.row(r), cut), data.row(r)[cut]);
        double total = 0.0;
        for (int s : c.stages_in_cut(cut)) total += log_dirichlet_multinomial(st.alpha(s), st.counts(s));
        lml.push_back(total);
      }
      for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double ratio = std::log(res.posterior(m, static_cast<Eigen::Index>(i)) / res.posterior(m, 0));
        CHECK(ratio == doctest::Approx(lml[i] - lml[0]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("staging monitor degenerate candidate sets") {
  CountedStream rng(42);
  const auto model = random_model(rng, {2, 2});
  const auto data = random_cases(model.tree().variables(), rng, 30);
  const auto one = staging_monitor(model, data, 1, {model.staging()});
  CHECK((one.posterior.array() == 1.0).all());
  const auto twin = staging_monitor(model, data, 1, {model.staging(), model.staging()});
  CHECK((twin.posterior.array() - 0.5).abs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(staging_monitor(model, data, 1, {}), InputError);
  CHECK_THROWS_AS(staging_monitor(model, data, 2, {model.staging()}), InputError);
}

TEST_CASE("transporter matches leaf enumeration") {
  CountedStream rng(51);
  for (int rep = 0; rep < 60; ++rep) {
    const auto cards = testing::random_cards(rng, 4, 3);
    const auto tree = build_event_tree(make_vars(cards));
    const auto staging = testing::random_staging(tree, rng);
    const auto theta = testing::random_theta(staging, rng);
    const auto ceg = to_ceg(StagedTree{tree, staging, theta});
    for (int k = 0; k < 5; ++k) {
      std::vector<int> ev(cards.size());
      for (std::size_t i = 0; i < ev.size(); ++i) {
        ev[i] = rng.uniform() < 0.5 ? -1 : static_cast<int>(rng.below(cards[i]));
      }
      std::vector<double> through(ceg.num_positions(), 0.0);
      std::vector<double> flow(ceg.edges().size(), 0.0);
      double total = 0.0;
      for (int leaf : tree.leaves()) {
        const auto path = tree.path(leaf);
        if (!consistent(path, ev)) continue;
        const double p = path_probability(tree, staging, theta, leaf);
        total += p;
        int v = 0;
        for (int level : path) {
          const int w = ceg.position_of(v);
          through[w] += p;
          for (std::size_t i = 0; i < ceg.edges().size(); ++i) {
            if (ceg.edges()[i].from == w && ceg.edges()[i].level == level) flow[i] += p;
          }
          v = tree.child(v, level);
        }
      }
      const auto t = propagate_evidence(ceg, theta, ev);
      CHECK(t.probability == doctest::Approx(total).epsilon(1e-12));
      const auto rho = arrival_probabilities(ceg, theta);
      CHECK(rho[ceg.sink()] == doctest::Approx(1.0).epsilon(1e-12));
      for (std::size_t i = 0; i < ceg.edges().size(); ++i) {
        CHECK(t.retained[i] == (flow[i] > 0.0));
        if (t.retained[i]) CHECK(std::abs(t.updated[i] - flow[i] / through[ceg.edges()[i].from]) < 1e-10);
      }
      // phi(w): downstream-consistent mass below any member situation of w
      for (int w = 0; w < ceg.sink(); ++w) {
        if (!(through[w] > 0.0)) continue;
        const int v = ceg.position(w).situations.front();
        const auto prefix = tree.path(v);
        double phi = 0.0;
        for (int leaf : tree.leaves()) {
          const auto path = tree.path(leaf);
          if (!std::equal(prefix.begin(), prefix.end(), path.begin())) continue;
          double p = 1.0;
          bool ok = true;
          int u = v;
          for (std::size_t d = prefix.size(); d < path.size(); ++d) {
            if (ev[d] >= 0 && ev[d] != path[d]) ok = false;
            p *= theta[staging.stage_of(u)][path[d]];
            u = tree.child(u, path[d]);
          }
          if (ok) phi += p;
        }
        CHECK(std::abs(t.potential[w] - phi) < 1e-10);
      }
    }
  }
}

TEST_CASE("transporter with no or full evidence") {
  CountedStream rng(52);
  const auto tree = build_event_tree(make_vars({2, 3, 2}));
  const auto staging = testing::random_staging(tree, rng);
  const auto theta = testing::random_theta(staging, rng);
  const auto ceg = to_ceg(StagedTree{tree, staging, theta});

  const std::vector<int> none{-1, -1, -1};
  const auto t0 = propagate_evidence(ceg, theta, none);
  CHECK(t0.probability == doctest::Approx(1.0).epsilon(1e-14));
  for (double phi : t0.potential) CHECK(phi == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 0; i < ceg.edges().size(); ++i) {
    CHECK(t0.retained[i]);
    CHECK(t0.updated[i] == doctest::Approx(ceg.edges()[i].theta).epsilon(1e-14));
  }

  const std::vector<int> full{1, 2, 0};
  const auto t1 = propagate_evidence(ceg, theta, full);
  int n_retained = 0;
  for (std::size_t i = 0; i < ceg.edges().size(); ++i) {
    if (!t1.retained[i]) continue;
    ++n_retained;
    CHECK(t1.updated[i] == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(n_retained == 3);

  // updated florets are distributions wherever the evidence leaves mass
  const std::vector<int> part{-1, 1, -1};
  const auto t2 = propagate_evidence(ceg, theta, part);
  for (int w = 0; w < ceg.sink(); ++w) {
    double s = 0.0;
    for (std::size_t i = 0; i < ceg.edges().size(); ++i) {
      if (ceg.edges()[i].from == w && t2.retained[i]) s += t2.updated[i];
    }
    if (t2.potential[w] > 0.0) CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("impossible evidence names the blocked cut") {
  const auto tree = build_event_tree(make_vars({2, 2, 2}));
  const auto staging = Staging::saturated(tree);
  std::vector<Vector> theta;
  for (int s = 0; s < staging.num_stages(); ++s) theta.push_back(Vector::Constant(2, 0.5));
  theta[0] = Vector{{1.0, 0.0}};
  for (int s : staging.stages_in_cut(2)) theta[s] = Vector{{1.0, 0.0}};
  const auto ceg = to_ceg(StagedTree{tree, staging, theta});
  auto blocked = [&](std::vector<int> ev) {
    try {
      propagate_evidence(ceg, theta, ev);
    } catch (const ZeroProbabilityError& e) {
      return e.blocked_cut();
    }
    return -1;
  };
  CHECK(blocked({1, -1, -1}) == 0);
  CHECK(blocked({-1, -1, 1}) == 2);
  CHECK(blocked({0, 1, 0}) == -1);
}

TEST_CASE("marginal position monitor uses the stage predictive") {
  CountedStream rng(61);
  for (int rep = 0; rep < 10; ++rep) {
    const auto model = random_model(rng, {2, 3, 2});
    const auto& tree = model.tree();
    const auto ceg = to_ceg(model.staged);
    const auto data = random_cases(tree.variables(), rng, 50);
    const int w = 1 + static_cast<int>(rng.below(ceg.num_positions() - 2));
    const auto trace = position_monitor_marginal(model, data, w);
    const int stage = ceg.position(w).stage;
    const int cut = ceg.position(w).cut;
    DirichletState state = model.prior_state();
    std::size_t row = 0;
    for (long m = 0; m < data.size(); ++m) {
      const auto x = data.row(m);
      if (ceg.position_of(tree.situations_on_path(x)[cut]) == w) {
        REQUIRE(row < trace.size());
        const auto ref = score(state.predictive(stage), x[cut]);
        CHECK(trace.rows()[row].m == m + 1);
        CHECK(trace.rows()[row].step.S == doctest::Approx(ref.S).epsilon(1e-12));
        CHECK(trace.rows()[row].step.E == doctest::Approx(ref.E).epsilon(1e-12));
        ++row;
      }
      observe_case(tree, model.staging(), state, x);
    }
    CHECK(row == trace.size());
  }
}

TEST_CASE("conditional position monitor equals marginal when nothing lies downstream") {
  CountedStream rng(62);
  const auto model = random_model(rng, {2, 2, 3});
  const auto ceg = to_ceg(model.staged);
  const auto data = random_cases(model.tree().variables(), rng, 80);
  for (int w : ceg.positions_in_cut(2)) {
    const auto a = position_monitor_marginal(model, data, w);
    const auto b = position_monitor_conditional(model, data, w);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.rows()[i].step.S == doctest::Approx(b.rows()[i].step.S).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(position_monitor_marginal(model, data, ceg.sink()), InputError);
}

TEST_CASE("leave-one-out situation monitor") {
  const auto tree = build_event_tree(make_vars({3, 2}));
  const auto& c1 = tree.cut(1);
  const Staging staging(tree, {{0, {0}, false}, {1, {c1[0], c1[1], c1[2]}, false}});
  const auto model = make_reference_model(tree, staging, 2.0);
  // third situation never observed
  const auto data = testing::dataset_from_rows(tree.variables(),
                                               {{0, 0}, {0, 1}, {0, 1}, {1, 1}, {1, 0}, {1, 1}, {1, 1}, {0, 0}});
  const int stage = staging.stage_of(c1[0]);
  const auto rep = loo_situation_monitor(model, data, stage, 1);
  REQUIRE(rep.entries.size() == 3);

  // sequential predictive products as an independent route to log p(y)
  auto seq = [&](std::vector<int> skip_first) {
    Vector a = model.priors[stage];
    double lp = 0.0;
    for (long m = 0; m < data.size(); ++m) {
      const auto x = data.row(m);
      if (x[0] == skip_first[0]) continue;
      lp += std::log(a[x[1]] / a.sum());
      a[x[1]] += 1.0;
    }
    return lp;
  };
  const double full = seq({-1});
  CHECK(rep.entries[0].q == doctest::Approx(seq({0}) - full).epsilon(1e-12));
  CHECK(rep.entries[1].q == doctest::Approx(seq({1}) - full).epsilon(1e-12));
  CHECK(rep.entries[2].q == doctest::Approx(0.0));
  CHECK(rep.entries[2].zero_count);
  CHECK(std::isnan(rep.entries[2].observed_prop));

  CHECK(rep.entries[0].n == 4);
  CHECK(rep.entries[0].observed_prop == doctest::Approx(0.5));
  // stage prior (3, 3); with the first situation left out: (3 + 3) / (6 + 4)
  CHECK(rep.entries[0].expected_prop == doctest::Approx(0.6));
  CHECK(rep.entries[0].lower <= rep.entries[0].expected_prop);
  CHECK(rep.entries[0].upper >= rep.entries[0].expected_prop);

  const auto single = loo_situation_monitor(make_reference_model(tree, Staging::saturated(tree), 2.0), data, 1, 1);
  CHECK(single.skipped);
  CHECK_THROWS_AS(loo_situation_monitor(model, data, stage, 2), InputError);
}

TEST_CASE("situation order monitor") {
  const auto tree = build_event_tree(make_vars({3, 2}));
  const auto& c1 = tree.cut(1);
  const Staging staging(tree, {{0, {0}, false}, {1, {c1[0], c1[1], c1[2]}, false}});
  const auto model = make_reference_model(tree, staging, 2.0);
  const auto data = testing::dataset_from_rows(tree.variables(),
                                               {{0, 0}, {0, 1}, {0, 1}, {1, 1}, {2, 0}, {1, 1}, {1, 1}, {2, 0}});
  const int stage = staging.stage_of(c1[0]);
  const std::vector<int> order{c1[2], c1[0], c1[1]};
  const auto out = situation_order_monitor(model, data, stage, order, 1);
  REQUIRE(out.size() == 3);
  CHECK(out[0].situation == c1[2]);
  CHECK(out[0].order_index == 1);
  CHECK(out[0].n == 2);
  CHECK(out[0].k == 0);
  // first entry sees only the stage prior Beta(3, 3)
  CHECK(out[0].prob == doctest::Approx(2.0 / 7.0));
  CHECK(out[1].prob == doctest::Approx(beta_binomial({3.0, 5.0}, 3, 2)));
  CHECK(out[2].prob == doctest::Approx(beta_binomial({5.0, 6.0}, 3, 3)));
  CHECK(out[2].surprise == doctest::Approx(-std::log(out[2].prob)));

  const std::vector<int> bad{c1[0], c1[0], c1[1]};
  CHECK_THROWS_AS(situation_order_monitor(model, data, stage, bad, 1), InputError);
}
