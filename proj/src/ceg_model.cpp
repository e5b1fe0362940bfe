#include "cegmon/ceg_model.hpp"

#include "cegmon/bn.hpp"
#include "cegmon/error.hpp"

namespace cegmon {

Vector CegModel::situation_prior(int situation) const {
  const int s = staging().stage_of(situation);
  return priors.at(s) / static_cast<double>(staging().stage(s).situations.size());
}

std::vector<Vector> CegModel::priors_for(const Staging& other) const {
  std::vector<Vector> out;
  out.reserve(other.num_stages());
  for (const auto& stage : other.stages()) {
    Vector a = Vector::Zero(other.out_degree(static_cast<int>(out.size())));
    for (int v : stage.situations) a += situation_prior(v);
    out.push_back(std::move(a));
  }
  return out;
}

void CegModel::validate() const {
  staged.validate();
  if (static_cast<int>(priors.size()) != staging().num_stages()) {
    throw InputError(InputError::Kind::InvalidModel, "one prior vector per stage is required");
  }
  for (int i = 0; i < staging().num_stages(); ++i) {
    if (priors[i].size() != staging().out_degree(i)) {
      throw InputError(InputError::Kind::InvalidModel, "prior vector length differs from stage out-degree");
    }
    if ((priors[i].array() < 0.0).any()) {
      throw InputError(InputError::Kind::InvalidModel, "negative prior hyperparameter");
    }
  }
}

CegModel make_reference_model(EventTree tree, Staging staging, double ess) {
  auto priors = reference_stage_priors(tree, staging, ess);
  return CegModel{StagedTree{std::move(tree), std::move(staging), {}}, std::move(priors)};
}

void observe_case(const EventTree& tree, const Staging& staging, DirichletState& state, std::span<const int> x) {
  int v = tree.root();
  while (!tree.vertex(v).is_leaf()) {
    const int level = x[tree.vertex(v).depth];
    state.observe_inplace(staging.stage_of(v), level);
    v = tree.child(v, level);
  }
}

DirichletState ceg_posterior(const CegModel& model, const Dataset& data) {
  check_compatible(model.tree().variables(), data);
  DirichletState state = model.prior_state();
  for (long m = 0; m < data.size(); ++m) observe_case(model.tree(), model.staging(), state, data.row(m));
  return state;
}

std::vector<CountVector> situation_counts(const EventTree& tree, const Dataset& data) {
  check_compatible(tree.variables(), data);
  std::vector<CountVector> counts(static_cast<std::size_t>(tree.num_vertices()));
  for (int v : tree.situations()) counts[v] = CountVector::Zero(static_cast<Eigen::Index>(tree.vertex(v).children.size()));
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    int v = tree.root();
    while (!tree.vertex(v).is_leaf()) {
      const int level = x[tree.vertex(v).depth];
      ++counts[v][level];
      v = tree.child(v, level);
    }
  }
  return counts;
}

std::vector<Vector> stage_predictives(const DirichletState& state) {
  std::vector<Vector> out;
  out.reserve(state.num_stages());
  for (int i = 0; i < state.num_stages(); ++i) out.push_back(state.predictive(i));
  return out;
}

StagedTree with_posterior_means(const CegModel& model, const Dataset& data) {
  StagedTree st = model.staged;
  st.theta = stage_predictives(data.empty() ? model.prior_state() : ceg_posterior(model, data));
  return st;
}

}  // namespace cegmon
