#include "helpers.hpp"

#include "cegmon/error.hpp"

#include <doctest.h>

#include <functional>
#include <numeric>

using namespace cegmon;
using testing::make_vars;

namespace {

// Labelled subtree isomorphism by direct recursion: same stage and pairwise
// equivalent children, level by level.
bool same_subtree(const EventTree& t, const Staging& s, int u, int v) {
  if (t.vertex(u).is_leaf() || t.vertex(v).is_leaf()) return t.vertex(u).is_leaf() && t.vertex(v).is_leaf();
  if (s.stage_of(u) != s.stage_of(v)) return false;
  for (std::size_t k = 0; k < t.vertex(u).children.size(); ++k) {
    if (!same_subtree(t, s, t.vertex(u).children[k], t.vertex(v).children[k])) return false;
  }
  return true;
}

void check_positions_against_oracle(const EventTree& tree, const Staging& staging) {
  const auto pos = compute_positions(tree, staging);
  for (int u : tree.situations()) {
    for (int v : tree.situations()) {
      if (tree.vertex(u).depth != tree.vertex(v).depth) {
        CHECK(pos[u] != pos[v]);
        continue;
      }
      CHECK((pos[u] == pos[v]) == same_subtree(tree, staging, u, v));
    }
  }
}

}  // namespace

TEST_CASE("tree sizes follow the product formula") {
  auto sizes = [](std::vector<int> cards) {
    const auto t = build_event_tree(make_vars(cards));
    return std::pair{t.situations().size(), t.leaves().size()};
  };
  CHECK(sizes({2}) == std::pair<std::size_t, std::size_t>{1, 2});
  CHECK(sizes({2, 2, 3, 2}) == std::pair<std::size_t, std::size_t>{19, 24});
  CHECK(sizes({3, 3}) == std::pair<std::size_t, std::size_t>{4, 9});

  cegmon::CountedStream rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    const auto cards = testing::random_cards(rng, 5, 4);
    const auto t = build_event_tree(make_vars(cards));
    std::size_t situations = 0;
    std::size_t prod = 1;
    for (std::size_t d = 0; d < cards.size(); ++d) {
      situations += prod;
      prod *= cards[d];
    }
    CHECK(t.situations().size() == situations);
    CHECK(t.leaves().size() == prod);
    CHECK(t.num_edges() == static_cast<int>(situations + prod - 1));
  }
}

TEST_CASE("invalid variable lists are rejected") {
  CHECK_THROWS_AS(build_event_tree({{"A", {"x"}}}), InputError);
  CHECK_THROWS_AS(build_event_tree({{"A", {"x", "y"}}, {"A", {"x", "y"}}}), InputError);
  CHECK_THROWS_AS(build_event_tree({{"A", {"x", "x"}}}), InputError);
  CHECK_THROWS_AS(build_event_tree({}), InputError);
}

TEST_CASE("path ids round-trip") {
  const auto t = build_event_tree(testing::chds_vars());
  CHECK(t.path_id(0).empty());
  for (int v = 0; v < t.num_vertices(); ++v) CHECK(t.find(t.path_id(v)) == v);
  CHECK(t.find("Low/High/Average") == t.find(std::vector<int>{1, 0, 1}));
  CHECK(t.find("Medium") == -1);
}

TEST_CASE("edge event paths") {
  const auto t22 = build_event_tree(make_vars({2, 2}));
  CHECK(t22.edge_event_paths(1).size() == 2);  // root edge
  const auto leaf = t22.leaves().front();
  CHECK(t22.edge_event_paths(leaf) == std::vector<int>{leaf});
  const auto t232 = build_event_tree(make_vars({2, 3, 2}));
  const int middle = t232.cut(1).front();
  CHECK(t232.edge_event_paths(t232.child(middle, 1)).size() == 2);
  CHECK_THROWS_AS(t232.edge_event_paths(0), InputError);
  CHECK_THROWS_AS(t232.edge_event_paths(t232.num_vertices()), InputError);
}

TEST_CASE("staging validation") {
  const auto t = build_event_tree(make_vars({2, 2}));
  // Cross-cut stage.
  CHECK_THROWS_AS(Staging(t, {{0, {0, 1}, false}, {1, {2}, false}}), InputError);
  // Missing coverage.
  CHECK_THROWS_AS(Staging(t, {{0, {0}, false}, {1, {1}, false}}), InputError);
  // Overlap.
  CHECK_THROWS_AS(Staging(t, {{0, {0}, false}, {1, {1, 2}, false}, {1, {2}, false}}), InputError);
  // A leaf is not a situation.
  CHECK_THROWS_AS(Staging(t, {{0, {0}, false}, {1, {1, 2}, false}, {2, {3}, false}}), InputError);
  const Staging ok(t, {{1, {2, 1}, false}, {0, {0}, false}});
  CHECK(ok.num_stages() == 2);
  CHECK(ok.stage(0).situations == std::vector<int>{0});
  CHECK(ok.stage(1).situations == std::vector<int>{1, 2});
}

TEST_CASE("floret probabilities must sum to one") {
  const auto t = build_event_tree(make_vars({2}));
  StagedTree st{t, Staging::saturated(t), {Vector::Constant(2, 0.4)}};
  CHECK_THROWS_AS(st.validate(), InputError);
  st.theta[0] << 0.25, 0.75;
  CHECK_NOTHROW(st.validate());
}

TEST_CASE("positions of small examples") {
  const auto t = build_event_tree(make_vars({2, 2}));
  SUBCASE("saturated staging keeps every situation") {
    const auto pos = compute_positions(t, Staging::saturated(t));
    for (int v : t.situations()) CHECK(pos[v] == v);
  }
  SUBCASE("shared stage merges the two depth-one situations") {
    const Staging s(t, {{0, {0}, false}, {1, {1, 2}, false}});
    const auto g = to_ceg(StagedTree{t, s, {}});
    CHECK(g.num_positions() == 3);
    CHECK(g.position(0).next == std::vector<int>{1, 1});
    CHECK(g.position(1).next == std::vector<int>{2, 2});
    CHECK(g.sink() == 2);
  }
}

TEST_CASE("positions match the brute-force isomorphism oracle") {
  // Every variable ordering with up to 4 variables of cardinality 2 or 3.
  cegmon::CountedStream rng(3);
  int trees = 0;
  for (int n = 1; n <= 4; ++n) {
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<int> cards(n);
      for (int i = 0; i < n; ++i) cards[i] = (mask >> i) & 1 ? 3 : 2;
      const auto tree = build_event_tree(make_vars(cards));
      for (int rep = 0; rep < 4; ++rep) {
        check_positions_against_oracle(tree, testing::random_staging(tree, rng));
        ++trees;
      }
      check_positions_against_oracle(tree, Staging::saturated(tree));
    }
  }
  CHECK(trees == 4 * 30);
}

TEST_CASE("positions refine stages and CEG preserves path probabilities") {
  cegmon::CountedStream rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto tree = build_event_tree(make_vars(testing::random_cards(rng, 4, 3)));
    const Staging staging = testing::random_staging(tree, rng);
    const StagedTree st{tree, staging, testing::random_theta(staging, rng)};
    const auto g = to_ceg(st);
    for (const auto& p : g.positions()) {
      for (int v : p.situations) CHECK(staging.stage_of(v) == p.stage);
    }
    for (int leaf : tree.leaves()) {
      const auto path = tree.path(leaf);
      double tree_prob = 1.0;
      double ceg_prob = 1.0;
      int v = 0;
      int w = 0;
      for (int level : path) {
        tree_prob *= st.theta[staging.stage_of(v)][level];
        v = tree.child(v, level);
        std::size_t ei = 0;
        while (!(g.edges()[ei].from == w && g.edges()[ei].level == level)) ++ei;
        const auto& e = g.edges()[ei];
        ceg_prob *= e.theta;
        w = e.to;
      }
      CHECK(w == g.sink());
      CHECK(std::abs(tree_prob - ceg_prob) < 1e-12);
    }
  }
}

TEST_CASE("CHDS staging from the search has 1+2+3+3 positions") {
  const auto tree = build_event_tree(testing::chds_vars());
  auto id = [&](const char* p) { return tree.find(p); };
  const Staging s(tree, {
                            {0, {id("")}, false},
                            {1, {id("High")}, false},
                            {1, {id("Low")}, false},
                            {2, {id("High/High"), id("High/Low"), id("Low/High")}, false},
                            {2, {id("Low/Low")}, false},
                            {3, {id("High/High/Low"), id("High/Low/Low")}, false},
                            {3,
                             {id("High/High/Average"), id("High/Low/Average"), id("Low/High/Average"),
                              id("Low/High/Low"), id("Low/Low/Low")},
                             false},
                            {3,
                             {id("High/High/High"), id("High/Low/High"), id("Low/High/High"), id("Low/Low/Average"),
                              id("Low/Low/High")},
                             false},
                        });
  const auto g = to_ceg(StagedTree{tree, s, {}});
  CHECK(g.positions_in_cut(0).size() == 1);
  CHECK(g.positions_in_cut(1).size() == 2);
  CHECK(g.positions_in_cut(2).size() == 3);
  CHECK(g.positions_in_cut(3).size() == 3);
  CHECK(g.num_positions() == 10);
}
