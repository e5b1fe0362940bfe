#ifndef CEGMON_SEARCH_HPP
#define CEGMON_SEARCH_HPP

#include "cegmon/dataset.hpp"
#include "cegmon/dirichlet.hpp"
#include "cegmon/tree.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace cegmon {

/// Change in log marginal likelihood from merging stages `a` and `b` of
/// `state` (indexed as in `staging`). Only the two stages' terms are touched.
/// Throws InputError for a cross-cut or mixed out-degree pair.
double score_merge(const DirichletState& state, const Staging& staging, int a, int b);

struct MergeStep {
  int cut = 0;
  std::string block_a;  // member path-ids joined by '|'
  std::string block_b;
  double delta = 0.0;
  double score = 0.0;  // log marginal likelihood after the merge
};

struct SearchResult {
  Staging staging;
  std::vector<Vector> priors;
  double log_marginal_likelihood = 0.0;
  std::vector<MergeStep> history;
};

struct SearchOptions {
  // Put every situation with no observations into one null stage per cut
  // before searching. Null stages are never merged.
  bool pool_unpopulated = false;
};

/// Greedy agglomerative search from the saturated staging. Each step merges
/// the within-cut pair with the largest positive gain; exact ties go to the
/// lexicographically smallest pair of first-member path-ids.
SearchResult ahc_search(const EventTree& tree, const Dataset& data, double ess, const SearchOptions& opts = {});

/// `step,cut,block_a,block_b,delta,score`
void write_merge_history_csv(std::ostream& os, const EventTree& tree, const std::vector<MergeStep>& history);

}  // namespace cegmon

#endif  // CEGMON_SEARCH_HPP
