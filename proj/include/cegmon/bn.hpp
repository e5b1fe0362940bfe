#ifndef CEGMON_BN_HPP
#define CEGMON_BN_HPP

#include "cegmon/dataset.hpp"
#include "cegmon/dirichlet.hpp"
#include "cegmon/score.hpp"
#include "cegmon/tree.hpp"

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace cegmon {

/// Discrete Bayesian network with a Dirichlet row per (node, parent
/// configuration). Parent configurations are mixed-radix over the parents in
/// variable order, first parent most significant.
class DiscreteBN {
 public:
  DiscreteBN() = default;
  /// Reference prior: ess / K_i on every entry of every row.
  DiscreteBN(std::vector<VariableSpec> vars, std::vector<std::pair<int, int>> edges, double ess);
  /// Explicit priors, `priors[node][config]`.
  DiscreteBN(std::vector<VariableSpec> vars, std::vector<std::pair<int, int>> edges,
             const std::vector<std::vector<Vector>>& priors);

  const std::vector<VariableSpec>& variables() const { return vars_; }
  int num_nodes() const { return static_cast<int>(vars_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& parents(int node) const { return parents_.at(node); }
  const std::vector<int>& topological_order() const { return topo_; }

  int num_configs(int node) const { return num_configs_.at(node); }
  int config_index(int node, std::span<const int> observation) const;
  std::vector<int> config_levels(int node, int config) const;
  int config_from_levels(int node, std::span<const int> parent_levels) const;
  /// Row of (node, config) in the Dirichlet state.
  int row(int node, int config) const { return row_offset_.at(node) + config; }

  const DirichletState& prior() const { return prior_; }
  std::vector<std::vector<Vector>> prior_rows() const;

 private:
  void init_structure();

  std::vector<VariableSpec> vars_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> parents_;
  std::vector<int> topo_;
  std::vector<int> num_configs_;
  std::vector<int> row_offset_;
  DirichletState prior_;
};

/// Identical to log_marginal_likelihood with stages = (node, config) rows.
double bn_log_marginal_likelihood(const DirichletState& rows);

/// Prior updated with every case of `data`.
DirichletState bn_posterior(const DiscreteBN& bn, const Dataset& data);

struct BnMonitorOptions {
  std::size_t cell_cap = 1'000'000;
};

struct GlobalMonitorResult {
  MonitorTrace trace;
  double total = 0.0;  // -log p(y), a nonnegative surprise
};

GlobalMonitorResult bn_global_monitor(const DiscreteBN& bn, const Dataset& data, const BnMonitorOptions& opts = {});

/// p_m(X_node) from the posterior after m-1 cases, by full joint enumeration.
MonitorTrace marginal_node_monitor(const DiscreteBN& bn, const Dataset& data, int node,
                                   const BnMonitorOptions& opts = {});

/// p_m(X_node | every other value of case m).
MonitorTrace conditional_node_monitor(const DiscreteBN& bn, const Dataset& data, int node,
                                      const BnMonitorOptions& opts = {});

/// Cases whose parents equal `parent_levels` (one level per parent, in parent
/// order), scored by that CPT row's predictive. Empty when nothing matches.
MonitorTrace parent_child_monitor(const DiscreteBN& bn, const Dataset& data, int node,
                                  std::span<const int> parent_levels);

/// Throws InputError unless `data` has the BN's variables in the same order.
void check_compatible(const std::vector<VariableSpec>& model_vars, const Dataset& data);

}  // namespace cegmon

#endif  // CEGMON_BN_HPP
