#ifndef CEGMON_TESTS_HELPERS_HPP
#define CEGMON_TESTS_HELPERS_HPP

#include "cegmon/ceg_model.hpp"
#include "cegmon/dataset.hpp"
#include "cegmon/rng.hpp"
#include "cegmon/tree.hpp"

#include <string>
#include <vector>

namespace testing {

using namespace cegmon;

inline std::vector<VariableSpec> make_vars(const std::vector<int>& cards) {
  std::vector<VariableSpec> vars;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    VariableSpec v{"X" + std::to_string(i), {}};
    for (int l = 0; l < cards[i]; ++l) v.levels.push_back("l" + std::to_string(l));
    vars.push_back(std::move(v));
  }
  return vars;
}

inline std::vector<VariableSpec> chds_vars() {
  return {{"X_s", {"High", "Low"}},
          {"X_e", {"High", "Low"}},
          {"X_l", {"Low", "Average", "High"}},
          {"X_h", {"No", "Yes"}}};
}

inline std::vector<int> random_cards(CountedStream& rng, int max_vars, int max_card) {
  std::vector<int> cards(1 + rng.below(max_vars));
  for (auto& c : cards) c = 2 + static_cast<int>(rng.below(max_card - 1));
  return cards;
}

// Random within-cut partition: each situation joins an existing block of its
// cut or opens a new one.
inline Staging random_staging(const EventTree& tree, CountedStream& rng) {
  std::vector<Stage> stages;
  for (int cut = 0; cut < tree.num_cuts(); ++cut) {
    std::vector<Stage> blocks;
    for (int v : tree.cut(cut)) {
      const auto pick = rng.below(blocks.size() + 1);
      if (pick == blocks.size()) {
        blocks.push_back(Stage{cut, {v}, false});
      } else {
        blocks[pick].situations.push_back(v);
      }
    }
    for (auto& b : blocks) stages.push_back(std::move(b));
  }
  return Staging(tree, std::move(stages));
}

inline std::vector<Vector> random_theta(const Staging& staging, CountedStream& rng, double conc = 1.0) {
  std::vector<Vector> theta;
  for (int s = 0; s < staging.num_stages(); ++s) {
    Vector a = Vector::Constant(staging.out_degree(s), conc);
    Vector t = rng.dirichlet(a);
    t /= t.sum();
    theta.push_back(t);
  }
  return theta;
}

inline std::vector<Vector> random_priors(const Staging& staging, CountedStream& rng) {
  std::vector<Vector> a;
  for (int s = 0; s < staging.num_stages(); ++s) {
    Vector v(staging.out_degree(s));
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = 0.5 + 3.0 * rng.uniform();
    a.push_back(v);
  }
  return a;
}

inline Dataset dataset_from_rows(const std::vector<VariableSpec>& vars, const std::vector<std::vector<int>>& rows) {
  CaseMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(vars.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < vars.size(); ++c) m(r, c) = rows[r][c];
  }
  return Dataset(vars, std::move(m));
}

}  // namespace testing

#endif  // CEGMON_TESTS_HELPERS_HPP
