#include "cegmon/dirichlet.hpp"

#include "cegmon/error.hpp"

#include <string>

namespace cegmon {

DirichletState::DirichletState(std::vector<Vector> alpha) : alpha_(std::move(alpha)) {
  counts_.reserve(alpha_.size());
  for (const auto& a : alpha_) {
    if ((a.array() < 0.0).any()) {
      throw InputError(InputError::Kind::InvalidModel, "negative Dirichlet hyperparameter");
    }
    counts_.push_back(CountVector::Zero(a.size()));
  }
}

Vector DirichletState::predictive(int stage) const {
  if (stage < 0 || stage >= num_stages()) {
    throw InputError(InputError::Kind::InvalidArgument, "unknown stage " + std::to_string(stage));
  }
  Vector post = posterior(stage);
  return post / post.sum();
}

void DirichletState::observe_inplace(int stage, int edge, std::int64_t times) {
  if (stage < 0 || stage >= num_stages() || edge < 0 || edge >= counts_[stage].size()) {
    throw InputError(InputError::Kind::InvalidArgument,
                     "observation index out of range (stage " + std::to_string(stage) + ", edge " +
                         std::to_string(edge) + ")");
  }
  counts_[stage][edge] += times;
}

void DirichletState::reset_counts() {
  for (auto& c : counts_) c.setZero();
}

void DirichletState::set_counts(int stage, const CountVector& y) {
  if (y.size() != counts_.at(stage).size()) {
    throw InputError(InputError::Kind::InvalidArgument, "count vector has wrong length");
  }
  counts_[stage] = y;
}

DirichletState observe(DirichletState state, int stage, int edge) {
  state.observe_inplace(stage, edge);
  return state;
}

double log_marginal_likelihood(const DirichletState& state) {
  double total = 0.0;
  for (int i = 0; i < state.num_stages(); ++i) {
    total += log_dirichlet_multinomial(state.alpha(i), state.counts(i));
  }
  return total;
}

std::vector<Vector> reference_stage_priors(const EventTree& tree, const Staging& staging, double ess) {
  if (!(ess > 0.0)) {
    throw InputError(InputError::Kind::InvalidArgument, "effective sample size must be positive");
  }
  std::vector<Vector> alpha;
  alpha.reserve(staging.num_stages());
  for (const auto& stage : staging.stages()) {
    const int k = static_cast<int>(tree.vertex(stage.situations.front()).children.size());
    alpha.push_back(Vector::Constant(k, ess / k * static_cast<double>(stage.situations.size())));
  }
  return alpha;
}

DirichletState reference_prior(const StagedTree& st, double ess) {
  return DirichletState(reference_stage_priors(st.tree, st.staging, ess));
}

double log_beta_binomial(const BetaState& prior, std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) {
    throw InputError(InputError::Kind::InvalidArgument,
                     "beta-binomial needs 0 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
  const double a = prior.alpha;
  const double b = prior.beta;
  const auto nn = static_cast<double>(n);
  const auto kk = static_cast<double>(k);
  const double log_choose = log_gamma(nn + 1) - log_gamma(kk + 1) - log_gamma(nn - kk + 1);
  return log_choose + log_rising_factorial(a, k) + log_rising_factorial(b, n - k) -
         log_rising_factorial(a + b, n);
}

double beta_binomial(const BetaState& prior, std::int64_t n, std::int64_t k) {
  return std::exp(log_beta_binomial(prior, n, k));
}

}  // namespace cegmon
