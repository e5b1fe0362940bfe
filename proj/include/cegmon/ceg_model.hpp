#ifndef CEGMON_CEG_MODEL_HPP
#define CEGMON_CEG_MODEL_HPP

#include "cegmon/dataset.hpp"
#include "cegmon/dirichlet.hpp"
#include "cegmon/tree.hpp"

#include <span>
#include <vector>

namespace cegmon {

/// A staged tree with a Dirichlet prior per stage.
struct CegModel {
  StagedTree staged;
  std::vector<Vector> priors;

  const EventTree& tree() const { return staged.tree; }
  const Staging& staging() const { return staged.staging; }

  DirichletState prior_state() const { return DirichletState(priors); }
  /// A member's share of its stage prior (split evenly). Used to price
  /// alternative stagings of the same situations.
  Vector situation_prior(int situation) const;
  /// Stage priors for another staging of the same tree, summed from
  /// situation shares.
  std::vector<Vector> priors_for(const Staging& staging) const;

  /// Throws InputError on prior/staging size mismatch or negative entries.
  void validate() const;
};

CegModel make_reference_model(EventTree tree, Staging staging, double ess);

/// Adds one complete observation to every stage on its root-to-leaf path.
void observe_case(const EventTree& tree, const Staging& staging, DirichletState& state, std::span<const int> x);

/// Prior updated with every case of `data`.
DirichletState ceg_posterior(const CegModel& model, const Dataset& data);

/// Edge counts per situation (not per stage), indexed by vertex id.
std::vector<CountVector> situation_counts(const EventTree& tree, const Dataset& data);

/// Posterior-mean probabilities of every stage.
std::vector<Vector> stage_predictives(const DirichletState& state);

/// Staged tree whose floret probabilities are the posterior means after
/// `data` (pass an empty dataset for prior means).
StagedTree with_posterior_means(const CegModel& model, const Dataset& data);

}  // namespace cegmon

#endif  // CEGMON_CEG_MODEL_HPP
