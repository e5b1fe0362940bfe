#include "cegmon/bn.hpp"

#include "cegmon/error.hpp"

#include <algorithm>
#include <string>

namespace cegmon {

namespace {

InputError bn_error(const std::string& what) { return InputError(InputError::Kind::InvalidModel, what); }

// Every cell of the joint state space with the CPT row each node uses there.
class JointTable {
 public:
  JointTable(const DiscreteBN& bn, std::size_t cap) : n_(bn.num_nodes()) {
    std::size_t cells = 1;
    for (const auto& v : bn.variables()) {
      cells *= static_cast<std::size_t>(v.cardinality());
      if (cells > cap) {
        throw CapacityError("joint state space exceeds the cell cap of " + std::to_string(cap) +
                            "; raise the cap or monitor a smaller network");
      }
    }
    cells_ = cells;
    levels_.resize(cells_ * n_);
    rows_.resize(cells_ * n_);
    std::vector<int> x(n_, 0);
    for (std::size_t c = 0; c < cells_; ++c) {
      for (int i = 0; i < n_; ++i) levels_[c * n_ + i] = x[i];
      for (int i = 0; i < n_; ++i) rows_[c * n_ + i] = bn.row(i, bn.config_index(i, x));
      // Mixed-radix increment, last variable fastest.
      for (int i = n_ - 1; i >= 0; --i) {
        if (++x[i] < bn.variables()[i].cardinality()) break;
        x[i] = 0;
      }
    }
  }

  std::size_t cells() const { return cells_; }
  int level(std::size_t cell, int node) const { return levels_[cell * n_ + node]; }

  Vector probabilities(const std::vector<Vector>& row_predictives) const {
    Vector p(static_cast<Eigen::Index>(cells_));
    for (std::size_t c = 0; c < cells_; ++c) {
      double prod = 1.0;
      for (int i = 0; i < n_; ++i) prod *= row_predictives[rows_[c * n_ + i]][levels_[c * n_ + i]];
      p[static_cast<Eigen::Index>(c)] = prod;
    }
    return p;
  }

 private:
  int n_;
  std::size_t cells_ = 0;
  std::vector<int> levels_;
  std::vector<int> rows_;
};

std::vector<Vector> row_predictives(const DirichletState& state) {
  std::vector<Vector> out;
  out.reserve(state.num_stages());
  for (int r = 0; r < state.num_stages(); ++r) out.push_back(state.predictive(r));
  return out;
}

void observe_case(const DiscreteBN& bn, DirichletState& state, std::span<const int> x) {
  for (int i = 0; i < bn.num_nodes(); ++i) state.observe_inplace(bn.row(i, bn.config_index(i, x)), x[i]);
}

void check_node(const DiscreteBN& bn, int node) {
  if (node < 0 || node >= bn.num_nodes()) {
    throw InputError(InputError::Kind::UnknownVariable, "unknown node " + std::to_string(node));
  }
}

}  // namespace

DiscreteBN::DiscreteBN(std::vector<VariableSpec> vars, std::vector<std::pair<int, int>> edges, double ess)
    : vars_(std::move(vars)), edges_(std::move(edges)) {
  if (!(ess > 0.0)) throw InputError(InputError::Kind::InvalidArgument, "effective sample size must be positive");
  init_structure();
  std::vector<Vector> rows;
  for (int i = 0; i < num_nodes(); ++i) {
    const int k = vars_[i].cardinality();
    for (int j = 0; j < num_configs_[i]; ++j) rows.push_back(Vector::Constant(k, ess / k));
  }
  prior_ = DirichletState(std::move(rows));
}

DiscreteBN::DiscreteBN(std::vector<VariableSpec> vars, std::vector<std::pair<int, int>> edges,
                       const std::vector<std::vector<Vector>>& priors)
    : vars_(std::move(vars)), edges_(std::move(edges)) {
  init_structure();
  if (static_cast<int>(priors.size()) != num_nodes()) throw bn_error("priors must list every node");
  std::vector<Vector> rows;
  for (int i = 0; i < num_nodes(); ++i) {
    if (static_cast<int>(priors[i].size()) != num_configs_[i]) {
      throw bn_error("node '" + vars_[i].name + "' needs one prior row per parent configuration");
    }
    for (const auto& r : priors[i]) {
      if (r.size() != vars_[i].cardinality()) throw bn_error("prior row for '" + vars_[i].name + "' has wrong length");
      rows.push_back(r);
    }
  }
  prior_ = DirichletState(std::move(rows));
}

void DiscreteBN::init_structure() {
  validate_variables(vars_);
  const int n = num_nodes();
  parents_.assign(n, {});
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [p, c] : edges_) {
    if (p < 0 || p >= n || c < 0 || c >= n) throw bn_error("edge refers to an unknown node");
    if (p == c) throw bn_error("self loop on '" + vars_[p].name + "'");
    parents_[c].push_back(p);
  }
  for (auto& ps : parents_) std::sort(ps.begin(), ps.end());
  // Kahn's algorithm, smallest index first for a stable order.
  std::vector<int> indegree(n);
  for (int c = 0; c < n; ++c) indegree[c] = static_cast<int>(parents_[c].size());
  topo_.clear();
  std::vector<bool> done(n, false);
  for (int step = 0; step < n; ++step) {
    int next = -1;
    for (int v = 0; v < n && next < 0; ++v) {
      if (!done[v] && indegree[v] == 0) next = v;
    }
    if (next < 0) throw bn_error("graph has a directed cycle");
    done[next] = true;
    topo_.push_back(next);
    for (auto [p, c] : edges_) {
      if (p == next) --indegree[c];
    }
  }
  num_configs_.assign(n, 1);
  row_offset_.assign(n, 0);
  int offset = 0;
  for (int i = 0; i < n; ++i) {
    for (int p : parents_[i]) num_configs_[i] *= vars_[p].cardinality();
    row_offset_[i] = offset;
    offset += num_configs_[i];
  }
}

int DiscreteBN::config_index(int node, std::span<const int> observation) const {
  int idx = 0;
  for (int p : parents_[node]) idx = idx * vars_[p].cardinality() + observation[p];
  return idx;
}

int DiscreteBN::config_from_levels(int node, std::span<const int> parent_levels) const {
  const auto& ps = parents_.at(node);
  if (parent_levels.size() != ps.size()) {
    throw InputError(InputError::Kind::InvalidArgument,
                     "parent configuration for '" + vars_[node].name + "' needs " + std::to_string(ps.size()) +
                         " levels");
  }
  int idx = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const int k = vars_[ps[i]].cardinality();
    if (parent_levels[i] < 0 || parent_levels[i] >= k) {
      throw InputError(InputError::Kind::UnknownLevel, "parent level out of range");
    }
    idx = idx * k + parent_levels[i];
  }
  return idx;
}

std::vector<int> DiscreteBN::config_levels(int node, int config) const {
  const auto& ps = parents_.at(node);
  std::vector<int> out(ps.size());
  for (int i = static_cast<int>(ps.size()) - 1; i >= 0; --i) {
    const int k = vars_[ps[i]].cardinality();
    out[i] = config % k;
    config /= k;
  }
  return out;
}

std::vector<std::vector<Vector>> DiscreteBN::prior_rows() const {
  std::vector<std::vector<Vector>> out(num_nodes());
  for (int i = 0; i < num_nodes(); ++i) {
    for (int j = 0; j < num_configs_[i]; ++j) out[i].push_back(prior_.alpha(row(i, j)));
  }
  return out;
}

double bn_log_marginal_likelihood(const DirichletState& rows) { return log_marginal_likelihood(rows); }

void check_compatible(const std::vector<VariableSpec>& model_vars, const Dataset& data) {
  if (model_vars.size() != data.variables().size()) {
    throw InputError(InputError::Kind::InvalidArgument, "data and model have different variables");
  }
  for (std::size_t i = 0; i < model_vars.size(); ++i) {
    if (model_vars[i].name != data.variables()[i].name || model_vars[i].levels != data.variables()[i].levels) {
      throw InputError(InputError::Kind::InvalidArgument,
                       "data variable '" + data.variables()[i].name + "' does not match model variable '" +
                           model_vars[i].name + "'");
    }
  }
}

DirichletState bn_posterior(const DiscreteBN& bn, const Dataset& data) {
  check_compatible(bn.variables(), data);
  DirichletState state = bn.prior();
  for (long m = 0; m < data.size(); ++m) observe_case(bn, state, data.row(m));
  return state;
}

GlobalMonitorResult bn_global_monitor(const DiscreteBN& bn, const Dataset& data, const BnMonitorOptions& opts) {
  check_compatible(bn.variables(), data);
  GlobalMonitorResult out;
  if (data.empty()) return out;
  const JointTable joint(bn, opts.cell_cap);
  DirichletState state = bn.prior();
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    const auto preds = row_predictives(state);
    double p_obs = 1.0;
    for (int i = 0; i < bn.num_nodes(); ++i) p_obs *= preds[bn.row(i, bn.config_index(i, x))][x[i]];
    const Vector p = joint.probabilities(preds);
    double mean = 0.0;
    double second = 0.0;
    for (Eigen::Index c = 0; c < p.size(); ++c) {
      if (p[c] > 0.0) {
        const double l = -std::log(p[c]);
        mean += p[c] * l;
        second += p[c] * l * l;
      }
    }
    out.trace.append(m + 1, "global", score_from_moments(p_obs, mean, second), {{"p_observed", p_obs}});
    observe_case(bn, state, x);
  }
  out.total = out.trace.sum_s();
  return out;
}

MonitorTrace marginal_node_monitor(const DiscreteBN& bn, const Dataset& data, int node, const BnMonitorOptions& opts) {
  check_compatible(bn.variables(), data);
  check_node(bn, node);
  MonitorTrace trace;
  if (data.empty()) return trace;
  const JointTable joint(bn, opts.cell_cap);
  const int k = bn.variables()[node].cardinality();
  DirichletState state = bn.prior();
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    const Vector p = joint.probabilities(row_predictives(state));
    Vector marginal = Vector::Zero(k);
    for (std::size_t c = 0; c < joint.cells(); ++c) marginal[joint.level(c, node)] += p[static_cast<Eigen::Index>(c)];
    marginal /= marginal.sum();
    trace.append(m + 1, bn.variables()[node].name, score(marginal, x[node]));
    observe_case(bn, state, x);
  }
  return trace;
}

MonitorTrace conditional_node_monitor(const DiscreteBN& bn, const Dataset& data, int node,
                                      const BnMonitorOptions& opts) {
  check_compatible(bn.variables(), data);
  check_node(bn, node);
  (void)opts;  // enumeration here only touches the K_node cells matching the evidence
  MonitorTrace trace;
  const int k = bn.variables()[node].cardinality();
  DirichletState state = bn.prior();
  std::vector<int> cell(static_cast<std::size_t>(bn.num_nodes()));
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    const auto preds = row_predictives(state);
    std::copy(x.begin(), x.end(), cell.begin());
    Vector joint(k);
    for (int level = 0; level < k; ++level) {
      cell[node] = level;
      double prod = 1.0;
      for (int i = 0; i < bn.num_nodes(); ++i) prod *= preds[bn.row(i, bn.config_index(i, cell))][cell[i]];
      joint[level] = prod;
    }
    const double evidence = joint.sum();
    if (evidence > 0.0) {
      trace.append(m + 1, bn.variables()[node].name, score(joint / evidence, x[node]));
    } else {
      trace.append(m + 1, bn.variables()[node].name,
                   ScoreStep{std::numeric_limits<double>::infinity(), 0.0, 0.0});
    }
    observe_case(bn, state, x);
  }
  return trace;
}

MonitorTrace parent_child_monitor(const DiscreteBN& bn, const Dataset& data, int node,
                                  std::span<const int> parent_levels) {
  check_compatible(bn.variables(), data);
  check_node(bn, node);
  const int config = bn.config_from_levels(node, parent_levels);
  const int row = bn.row(node, config);
  std::string target = bn.variables()[node].name + "|";
  const auto& ps = bn.parents(node);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) target += ",";
    target += bn.variables()[ps[i]].name + "=" + bn.variables()[ps[i]].levels[parent_levels[i]];
  }
  MonitorTrace trace;
  DirichletState state = bn.prior();
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    if (bn.config_index(node, x) != config) continue;
    const Vector p = state.predictive(row);
    trace.append(m + 1, target, score(p, x[node]), {{"p_observed", p[x[node]]}});
    state.observe_inplace(row, x[node]);
  }
  return trace;
}

}  // namespace cegmon
