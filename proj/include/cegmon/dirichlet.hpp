#ifndef CEGMON_DIRICHLET_HPP
#define CEGMON_DIRICHLET_HPP

#include "cegmon/tree.hpp"
#include "cegmon/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace cegmon {

/// log Γ(x) for x > 0. Shifts the argument above 10 by recurrence and applies
/// the Stirling series; absolute error below 1e-14 for moderate arguments.
template <typename Scalar>
Scalar log_gamma(Scalar x) {
  Scalar prod(1);
  while (x < Scalar(10)) {
    prod *= x;
    x += Scalar(1);
  }
  const Scalar inv = Scalar(1) / x;
  const Scalar inv2 = inv * inv;
  // Bernoulli terms B_2k / (2k (2k-1) x^(2k-1)), k = 1..7
  const Scalar series =
      inv * (Scalar(1) / 12 +
             inv2 * (Scalar(-1) / 360 +
                     inv2 * (Scalar(1) / 1260 +
                             inv2 * (Scalar(-1) / 1680 +
                                     inv2 * (Scalar(1) / 1188 +
                                             inv2 * (Scalar(-691) / 360360 + inv2 * (Scalar(1) / 156)))))));
  const Scalar half_log_2pi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  return (x - Scalar(0.5)) * std::log(x) - x + half_log_2pi + series - std::log(prod);
}

/// log Γ(a + n) - log Γ(a), evaluated as a sum of logs for small integer n.
template <typename Scalar>
Scalar log_rising_factorial(Scalar a, std::int64_t n) {
  if (n <= 16) {
    Scalar s(0);
    for (std::int64_t i = 0; i < n; ++i) s += std::log(a + Scalar(i));
    return s;
  }
  return log_gamma(a + Scalar(n)) - log_gamma(a);
}

/// Log Dirichlet-multinomial probability of an ordered sample with the given
/// counts (no multinomial coefficient). Zero counts contribute nothing, so
/// zero hyperparameters are allowed on unobserved edges.
template <typename DerivedA, typename DerivedY>
typename DerivedA::Scalar log_dirichlet_multinomial(const Eigen::MatrixBase<DerivedA>& alpha,
                                                     const Eigen::MatrixBase<DerivedY>& counts) {
  using Scalar = typename DerivedA::Scalar;
  Scalar out(0);
  std::int64_t total = 0;
  for (Eigen::Index j = 0; j < alpha.size(); ++j) {
    const auto y = static_cast<std::int64_t>(counts(j));
    total += y;
    if (y > 0) out += log_rising_factorial(alpha(j), y);
  }
  if (total > 0) out -= log_rising_factorial(alpha.sum(), total);
  return out;
}

/// Dirichlet hyperparameters and cumulative edge counts for a set of stages
/// (or BN rows). Posterior hyperparameters are alpha + counts.
class DirichletState {
 public:
  DirichletState() = default;
  explicit DirichletState(std::vector<Vector> alpha);

  int num_stages() const { return static_cast<int>(alpha_.size()); }
  const Vector& alpha(int stage) const { return alpha_.at(stage); }
  const CountVector& counts(int stage) const { return counts_.at(stage); }
  const std::vector<Vector>& alphas() const { return alpha_; }
  Vector posterior(int stage) const { return alpha(stage) + counts(stage).cast<double>(); }

  /// Posterior mean (alpha + y) / (sum alpha + N); throws on unknown stage.
  Vector predictive(int stage) const;

  void observe_inplace(int stage, int edge, std::int64_t times = 1);
  void reset_counts();
  void set_counts(int stage, const CountVector& y);

 private:
  std::vector<Vector> alpha_;
  std::vector<CountVector> counts_;
};

/// Returns a copy of `state` with one more observation on (stage, edge).
DirichletState observe(DirichletState state, int stage, int edge);

double log_marginal_likelihood(const DirichletState& state);

/// ess divided evenly over each situation's florets; stage prior is the sum
/// of its members.
DirichletState reference_prior(const StagedTree& st, double ess);
std::vector<Vector> reference_stage_priors(const EventTree& tree, const Staging& staging, double ess);

struct BetaState {
  double alpha;
  double beta;
};

/// Beta-binomial probability of k successes in n trials.
double beta_binomial(const BetaState& prior, std::int64_t n, std::int64_t k);
double log_beta_binomial(const BetaState& prior, std::int64_t n, std::int64_t k);

}  // namespace cegmon

#endif  // CEGMON_DIRICHLET_HPP
