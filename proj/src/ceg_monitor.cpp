#include "cegmon/ceg_monitor.hpp"

#include "cegmon/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace cegmon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Situation of `x`'s path lying in `cut`, or -1.
int situation_in_cut(const EventTree& tree, std::span<const int> x, int cut) {
  int v = tree.root();
  while (!tree.vertex(v).is_leaf()) {
    if (tree.vertex(v).depth == cut) return v;
    v = tree.child(v, x[tree.vertex(v).depth]);
  }
  return -1;
}

// Index of the first outgoing edge of every position in ceg.edges().
std::vector<int> edge_offsets(const ChainEventGraph& ceg) {
  std::vector<int> first(static_cast<std::size_t>(ceg.num_positions()) + 1, 0);
  for (const auto& e : ceg.edges()) ++first[e.from + 1];
  for (std::size_t i = 1; i < first.size(); ++i) first[i] += first[i - 1];
  return first;
}

void check_position(const ChainEventGraph& ceg, int position) {
  if (position < 0 || position >= ceg.sink()) {
    throw InputError(InputError::Kind::InvalidArgument,
                     "position " + std::to_string(position) + " has no emanating edges");
  }
}

void check_stage(const CegModel& model, int stage) {
  if (stage < 0 || stage >= model.staging().num_stages()) {
    throw InputError(InputError::Kind::InvalidArgument, "unknown stage " + std::to_string(stage));
  }
}

std::string position_name(int w) { return "w" + std::to_string(w); }

}  // namespace

GlobalMonitorResult ceg_global_monitor(const CegModel& model, const Dataset& data) {
  model.validate();
  check_compatible(model.tree().variables(), data);
  GlobalMonitorResult out;
  const auto& tree = model.tree();
  const auto& staging = model.staging();
  const ChainEventGraph ceg = to_ceg(StagedTree{tree, staging, {}});
  std::vector<double> m1(static_cast<std::size_t>(ceg.num_positions()));
  std::vector<double> m2(m1.size());
  DirichletState state = model.prior_state();
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    const auto theta = stage_predictives(state);
    double p_obs = 1.0;
    for (int v : tree.situations_on_path(x)) p_obs *= theta[staging.stage_of(v)][x[tree.vertex(v).depth]];
    // First and second moments of the path surprise, sink first.
    for (int w = ceg.sink(); w >= 0; --w) {
      const auto& pos = ceg.position(w);
      double a = 0.0;
      double b = 0.0;
      for (std::size_t k = 0; k < pos.next.size(); ++k) {
        const double t = theta[pos.stage][static_cast<Eigen::Index>(k)];
        if (t <= 0.0) continue;
        const double l = -std::log(t);
        a += t * (l + m1[pos.next[k]]);
        b += t * (l * l + 2.0 * l * m1[pos.next[k]] + m2[pos.next[k]]);
      }
      m1[w] = a;
      m2[w] = b;
    }
    out.trace.append(m + 1, "global", score_from_moments(p_obs, m1[0], m2[0]), {{"p_observed", p_obs}});
    observe_case(tree, staging, state, x);
  }
  out.total = out.trace.sum_s();
  return out;
}

std::vector<Staging> hasse_neighbors(const EventTree& tree, const Staging& staging, int cut,
                                     const HasseOptions& opts) {
  if (cut < 0 || cut >= tree.num_cuts()) {
    throw InputError(InputError::Kind::InvalidArgument, "unknown cut " + std::to_string(cut));
  }
  const auto in_cut = staging.stages_in_cut(cut);
  std::vector<int> movable;
  for (int s : in_cut) {
    if (!staging.stage(s).null) movable.push_back(s);
  }
  std::vector<Staging> out;
  auto with = [&](std::vector<int> drop, std::vector<Stage> add) {
    std::vector<Stage> stages;
    for (int s = 0; s < staging.num_stages(); ++s) {
      if (std::find(drop.begin(), drop.end(), s) == drop.end()) stages.push_back(staging.stage(s));
    }
    for (auto& a : add) stages.push_back(std::move(a));
    out.emplace_back(tree, std::move(stages));
  };
  for (std::size_t i = 0; i < movable.size(); ++i) {
    for (std::size_t j = i + 1; j < movable.size(); ++j) {
      const auto& a = staging.stage(movable[i]);
      const auto& b = staging.stage(movable[j]);
      if (staging.out_degree(movable[i]) != staging.out_degree(movable[j])) continue;
      Stage merged{cut, a.situations, false};
      merged.situations.insert(merged.situations.end(), b.situations.begin(), b.situations.end());
      with({movable[i], movable[j]}, {std::move(merged)});
    }
  }
  for (int s : movable) {
    const auto& members = staging.stage(s).situations;
    const int size = static_cast<int>(members.size());
    if (size < 2) continue;
    auto split = [&](auto in_second) {
      Stage first{cut, {}, false};
      Stage second{cut, {}, false};
      for (int i = 0; i < size; ++i) (in_second(i) ? second : first).situations.push_back(members[i]);
      with({s}, {std::move(first), std::move(second)});
    };
    if (size <= opts.max_full_split_block) {
      // The first member stays in the first block; every nonempty subset of
      // the others forms the second.
      const std::uint64_t masks = std::uint64_t{1} << (size - 1);
      for (std::uint64_t mask = 1; mask < masks; ++mask) {
        split([mask](int i) { return i > 0 && ((mask >> (i - 1)) & 1U); });
      }
    } else {
      for (int single = 0; single < size; ++single) split([single](int i) { return i == single; });
    }
  }
  return out;
}

std::vector<Staging> default_staging_candidates(const CegModel& model, int cut, const HasseOptions& opts) {
  std::vector<Staging> out{model.staging()};
  for (auto& s : hasse_neighbors(model.tree(), model.staging(), cut, opts)) out.push_back(std::move(s));
  return out;
}

int StagingMonitorResult::leader(long m) const {
  Eigen::Index idx = 0;
  posterior.row(m).maxCoeff(&idx);
  return static_cast<int>(idx);
}

StagingMonitorResult staging_monitor(const CegModel& model, const Dataset& data, int cut,
                                     std::vector<Staging> candidates) {
  model.validate();
  check_compatible(model.tree().variables(), data);
  if (candidates.empty()) throw InputError(InputError::Kind::InvalidArgument, "empty candidate set");
  if (cut < 0 || cut >= model.tree().num_cuts()) {
    throw InputError(InputError::Kind::InvalidArgument, "unknown cut " + std::to_string(cut));
  }
  const auto& tree = model.tree();
  const auto n_cand = static_cast<Eigen::Index>(candidates.size());
  std::vector<DirichletState> states;
  states.reserve(candidates.size());
  for (const auto& c : candidates) states.emplace_back(model.priors_for(c));

  StagingMonitorResult out;
  out.cut = cut;
  out.posterior.resize(data.size() + 1, n_cand);
  Eigen::VectorXd log_w = Eigen::VectorXd::Constant(n_cand, -std::log(static_cast<double>(n_cand)));
  out.posterior.row(0) = (log_w.array().exp()).matrix().transpose();
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    const int v = situation_in_cut(tree, x, cut);
    if (v >= 0) {
      const int outcome = x[cut];
      for (Eigen::Index c = 0; c < n_cand; ++c) {
        const int s = candidates[c].stage_of(v);
        log_w[c] += std::log(states[c].predictive(s)[outcome]);
        states[c].observe_inplace(s, outcome);
      }
      const double top = log_w.maxCoeff();
      if (std::isfinite(top)) {
        const double norm = top + std::log((log_w.array() - top).exp().sum());
        log_w.array() -= norm;
      }
    }
    out.posterior.row(m + 1) = (log_w.array().exp()).matrix().transpose();
  }
  out.candidates = std::move(candidates);
  return out;
}

std::vector<double> arrival_probabilities(const ChainEventGraph& ceg, std::span<const Vector> theta) {
  std::vector<double> rho(static_cast<std::size_t>(ceg.num_positions()), 0.0);
  rho[0] = 1.0;
  // Positions are numbered by cut, so parents come before children.
  for (int w = 0; w < ceg.sink(); ++w) {
    const auto& pos = ceg.position(w);
    for (std::size_t k = 0; k < pos.next.size(); ++k) {
      rho[pos.next[k]] += rho[w] * theta[pos.stage][static_cast<Eigen::Index>(k)];
    }
  }
  return rho;
}

Transporter propagate_evidence(const ChainEventGraph& ceg, std::span<const Vector> theta,
                               std::span<const int> evidence) {
  const auto& edges = ceg.edges();
  const int n_pos = ceg.num_positions();
  auto consistent = [&](const CegEdge& e) {
    const int var = ceg.position(e.from).cut;
    return evidence[var] < 0 || evidence[var] == e.level;
  };
  std::vector<bool> fwd(n_pos, false);
  std::vector<bool> bwd(n_pos, false);
  fwd[0] = true;
  for (const auto& e : edges) {
    if (fwd[e.from] && consistent(e)) fwd[e.to] = true;
  }
  bwd[ceg.sink()] = true;
  for (auto it = edges.rbegin(); it != edges.rend(); ++it) {
    if (bwd[it->to] && consistent(*it)) bwd[it->from] = true;
  }

  Transporter t;
  t.retained.assign(edges.size(), false);
  t.updated.assign(edges.size(), 0.0);
  t.potential.assign(n_pos, 0.0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    t.retained[i] = consistent(e) && fwd[e.from] && bwd[e.to];
  }
  t.potential[ceg.sink()] = 1.0;
  for (auto i = static_cast<std::ptrdiff_t>(edges.size()) - 1; i >= 0; --i) {
    if (!t.retained[i]) continue;
    const auto& e = edges[i];
    t.potential[e.from] += theta[ceg.position(e.from).stage][e.level] * t.potential[e.to];
  }
  t.probability = t.potential[0];
  if (!(t.probability > 0.0)) {
    // Forward mass along consistent edges; the first cut it fails to cross
    // is where the evidence is blocked.
    std::vector<double> rho(n_pos, 0.0);
    rho[0] = 1.0;
    const int n_cuts = ceg.position(ceg.sink()).cut;
    int blocked = n_cuts - 1;
    for (int cut = 0; cut < n_cuts; ++cut) {
      double crossed = 0.0;
      for (int w : ceg.positions_in_cut(cut)) {
        const auto& pos = ceg.position(w);
        for (std::size_t k = 0; k < pos.next.size(); ++k) {
          if (evidence[cut] >= 0 && evidence[cut] != static_cast<int>(k)) continue;
          const double flow = rho[w] * theta[pos.stage][static_cast<Eigen::Index>(k)];
          rho[pos.next[k]] += flow;
          crossed += flow;
        }
      }
      if (!(crossed > 0.0)) {
        blocked = cut;
        break;
      }
    }
    throw ZeroProbabilityError(blocked, "evidence has probability zero; blocked at cut " + std::to_string(blocked));
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!t.retained[i]) continue;
    const auto& e = edges[i];
    const double phi = t.potential[e.from];
    t.updated[i] = phi > 0.0 ? theta[ceg.position(e.from).stage][e.level] * t.potential[e.to] / phi : 0.0;
  }
  return t;
}

Transporter propagate_evidence(const CegModel& model, std::span<const int> evidence) {
  if (evidence.size() != model.tree().variables().size()) {
    throw InputError(InputError::Kind::InvalidArgument, "evidence must have one entry per variable");
  }
  const ChainEventGraph ceg = to_ceg(StagedTree{model.tree(), model.staging(), {}});
  const auto theta =
      model.staged.has_probabilities() ? model.staged.theta : stage_predictives(model.prior_state());
  return propagate_evidence(ceg, theta, evidence);
}

MonitorTrace position_monitor_marginal(const CegModel& model, const Dataset& data, int position) {
  model.validate();
  check_compatible(model.tree().variables(), data);
  const auto& tree = model.tree();
  const auto& staging = model.staging();
  const ChainEventGraph ceg = to_ceg(StagedTree{tree, staging, {}});
  check_position(ceg, position);
  const auto& pos = ceg.position(position);
  const auto k = static_cast<Eigen::Index>(pos.next.size());
  MonitorTrace trace;
  DirichletState state = model.prior_state();
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    const int v = situation_in_cut(tree, x, pos.cut);
    if (v >= 0 && ceg.position_of(v) == position) {
      const auto theta = stage_predictives(state);
      const double arrival = arrival_probabilities(ceg, theta)[position];
      const int observed = x[pos.cut];
      if (arrival > 0.0) {
        Vector path_sum(k);
        for (Eigen::Index e = 0; e < k; ++e) path_sum[e] = arrival * theta[pos.stage][e];
        trace.append(m + 1, position_name(position), score(path_sum / arrival, observed),
                     {{"p_path", path_sum[observed]}, {"p_arrival", arrival}});
      } else {
        trace.append(m + 1, position_name(position), ScoreStep{kInf, 0.0, 0.0}, {{"p_arrival", 0.0}});
      }
    }
    observe_case(tree, staging, state, x);
  }
  return trace;
}

MonitorTrace position_monitor_conditional(const CegModel& model, const Dataset& data, int position) {
  model.validate();
  check_compatible(model.tree().variables(), data);
  const auto& tree = model.tree();
  const auto& staging = model.staging();
  const ChainEventGraph ceg = to_ceg(StagedTree{tree, staging, {}});
  check_position(ceg, position);
  const auto offsets = edge_offsets(ceg);
  const auto& pos = ceg.position(position);
  const auto k = static_cast<Eigen::Index>(pos.next.size());
  MonitorTrace trace;
  DirichletState state = model.prior_state();
  std::vector<int> evidence(tree.variables().size());
  for (long m = 0; m < data.size(); ++m) {
    const auto x = data.row(m);
    const int v = situation_in_cut(tree, x, pos.cut);
    if (v >= 0 && ceg.position_of(v) == position) {
      std::copy(x.begin(), x.end(), evidence.begin());
      evidence[pos.cut] = -1;
      const auto theta = stage_predictives(state);
      try {
        const Transporter t = propagate_evidence(ceg, theta, evidence);
        Vector floret(k);
        for (Eigen::Index e = 0; e < k; ++e) floret[e] = t.updated[offsets[position] + e];
        trace.append(m + 1, position_name(position), score(floret, x[pos.cut]));
      } catch (const ZeroProbabilityError&) {
        trace.append(m + 1, position_name(position), ScoreStep{kInf, 0.0, 0.0});
      }
    }
    observe_case(tree, staging, state, x);
  }
  return trace;
}

LooReport loo_situation_monitor(const CegModel& model, const Dataset& data, int stage, int level) {
  model.validate();
  check_stage(model, stage);
  LooReport report;
  report.stage = stage;
  report.level = level;
  const auto& members = model.staging().stage(stage).situations;
  const Vector& alpha = model.priors[stage];
  if (level < 0 || level >= alpha.size()) {
    throw InputError(InputError::Kind::UnknownLevel, "level of interest out of range");
  }
  if (members.size() < 2) {
    spdlog::info("stage {} has a single situation; leave-one-out monitor skipped", stage);
    report.skipped = true;
    return report;
  }
  const auto counts = situation_counts(model.tree(), data);
  CountVector total = CountVector::Zero(alpha.size());
  for (int v : members) total += counts[v];
  const double full = log_dirichlet_multinomial(alpha, total);
  for (int v : members) {
    LooEntry e;
    e.situation = v;
    e.n = counts[v].sum();
    const CountVector rest = total - counts[v];
    e.q = log_dirichlet_multinomial(alpha, rest) - full;
    const double a = alpha[level] + static_cast<double>(rest[level]);
    const double b = alpha.sum() + static_cast<double>(rest.sum()) - a;
    e.expected_prop = a / (a + b);
    if (e.n == 0) {
      e.zero_count = true;
      e.observed_prop = std::numeric_limits<double>::quiet_NaN();
      e.lower = e.upper = std::numeric_limits<double>::quiet_NaN();
    } else {
      e.observed_prop = static_cast<double>(counts[v][level]) / static_cast<double>(e.n);
      double cdf = 0.0;
      bool have_lower = false;
      for (std::int64_t j = 0; j <= e.n; ++j) {
        cdf += beta_binomial({a, b}, e.n, j);
        if (!have_lower && cdf >= 0.025) {
          e.lower = static_cast<double>(j) / static_cast<double>(e.n);
          have_lower = true;
        }
        if (cdf >= 0.975) {
          e.upper = static_cast<double>(j) / static_cast<double>(e.n);
          break;
        }
      }
      if (cdf < 0.975) e.upper = 1.0;
    }
    report.entries.push_back(e);
  }
  return report;
}

std::vector<OrderEntry> situation_order_monitor(const CegModel& model, const Dataset& data, int stage,
                                                std::span<const int> ordering, int level) {
  model.validate();
  check_stage(model, stage);
  const auto& members = model.staging().stage(stage).situations;
  std::vector<int> sorted(ordering.begin(), ordering.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted != members) {
    throw InputError(InputError::Kind::InvalidArgument, "ordering is not a permutation of the stage's situations");
  }
  const Vector& alpha = model.priors[stage];
  if (level < 0 || level >= alpha.size()) {
    throw InputError(InputError::Kind::UnknownLevel, "level of interest out of range");
  }
  const auto counts = situation_counts(model.tree(), data);
  BetaState beta{alpha[level], alpha.sum() - alpha[level]};
  std::vector<OrderEntry> out;
  int index = 0;
  for (int v : ordering) {
    OrderEntry e;
    e.situation = v;
    e.order_index = ++index;
    e.n = counts[v].sum();
    e.k = counts[v][level];
    const double lp = log_beta_binomial(beta, e.n, e.k);
    e.prob = std::exp(lp);
    e.surprise = -lp;
    out.push_back(e);
    beta.alpha += static_cast<double>(e.k);
    beta.beta += static_cast<double>(e.n - e.k);
  }
  return out;
}

}  // namespace cegmon
