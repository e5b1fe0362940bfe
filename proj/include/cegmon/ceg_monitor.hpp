#ifndef CEGMON_CEG_MONITOR_HPP
#define CEGMON_CEG_MONITOR_HPP

#include "cegmon/bn.hpp"
#include "cegmon/ceg_model.hpp"
#include "cegmon/dataset.hpp"
#include "cegmon/score.hpp"
#include "cegmon/tree.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace cegmon {

// ---------------------------------------------------------------------------
// Global monitor

/// Per-case surprise of the whole root-to-leaf path under the stage
/// predictives after m-1 cases. E and V are the first two moments of the
/// path surprise, accumulated backwards over the graph.
GlobalMonitorResult ceg_global_monitor(const CegModel& model, const Dataset& data);

// ---------------------------------------------------------------------------
// Staging monitor

struct HasseOptions {
  // Blocks up to this size get every bipartition; larger blocks only get
  // singleton-versus-rest splits.
  int max_full_split_block = 12;
};

/// Stagings one merge or one split away within `cut`. Null stages are left
/// alone.
std::vector<Staging> hasse_neighbors(const EventTree& tree, const Staging& staging, int cut,
                                     const HasseOptions& opts = {});

/// The model's own staging followed by its Hasse neighbours in `cut`.
std::vector<Staging> default_staging_candidates(const CegModel& model, int cut, const HasseOptions& opts = {});

struct StagingMonitorResult {
  int cut = 0;
  std::vector<Staging> candidates;
  /// Row m holds p(U | y^m) over the candidates, row 0 the uniform prior.
  Eigen::MatrixXd posterior;

  /// Index of the largest weight in row `m`.
  int leader(long m) const;
};

/// Sequential Bayes over a fixed candidate set (no transitions). Each case
/// contributes the predictive of its floret outcome at `cut` under each
/// candidate's stage containing the case's situation.
StagingMonitorResult staging_monitor(const CegModel& model, const Dataset& data, int cut,
                                     std::vector<Staging> candidates);

// ---------------------------------------------------------------------------
// Position monitors and propagation

/// Evidence-consistent part of a chain event graph after back-propagation.
struct Transporter {
  std::vector<bool> retained;  // per CEG edge
  std::vector<double> potential;  // phi per position
  std::vector<double> updated;  // per CEG edge, theta * phi(to) / phi(from)
  double probability = 0.0;     // phi(root) = p(evidence)
};

/// `evidence[i]` is a level of variable i or -1 when unobserved. `theta` is
/// one floret vector per stage. Throws ZeroProbabilityError naming the first
/// cut whose outgoing mass vanishes when p(evidence) = 0.
Transporter propagate_evidence(const ChainEventGraph& ceg, std::span<const Vector> theta,
                               std::span<const int> evidence);

/// Uses the model's fixed probabilities, or prior means when it has none.
Transporter propagate_evidence(const CegModel& model, std::span<const int> evidence);

/// Probability of reaching each position (forward sweep).
std::vector<double> arrival_probabilities(const ChainEventGraph& ceg, std::span<const Vector> theta);

/// Cases reaching `position`, scored by the predictive over its edges
/// conditional on arrival. The unconditional path sums p(Λ(e_k)) are kept
/// in the row extras (`p_path`, `p_arrival`).
MonitorTrace position_monitor_marginal(const CegModel& model, const Dataset& data, int position);

/// As above but the floret at `position` is conditioned on every other value
/// of the case through the transporter.
MonitorTrace position_monitor_conditional(const CegModel& model, const Dataset& data, int position);

// ---------------------------------------------------------------------------
// Situation monitors

struct LooEntry {
  int situation = -1;
  std::int64_t n = 0;
  double q = 0.0;
  double expected_prop = 0.0;
  double observed_prop = 0.0;  // NaN when n = 0
  double lower = 0.0;          // central 95% beta-binomial band, as proportions
  double upper = 0.0;
  bool zero_count = false;
};

struct LooReport {
  int stage = -1;
  int level = 0;
  bool skipped = false;  // singleton stage
  std::vector<LooEntry> entries;
};

/// Leave-one-out log Bayes-factor contribution of each member situation and
/// the Beta-predicted proportion of `level` with that situation removed.
LooReport loo_situation_monitor(const CegModel& model, const Dataset& data, int stage, int level);

struct OrderEntry {
  int situation = -1;
  int order_index = 0;  // 1-based
  std::int64_t n = 0;
  std::int64_t k = 0;
  double prob = 0.0;
  double surprise = 0.0;
};

/// Beta-binomial predictive of each situation's count of `level`, learning
/// from the situations before it in `ordering`.
std::vector<OrderEntry> situation_order_monitor(const CegModel& model, const Dataset& data, int stage,
                                                std::span<const int> ordering, int level);

}  // namespace cegmon

#endif  // CEGMON_CEG_MONITOR_HPP
