#include "cegmon/tree.hpp"

#include "cegmon/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace cegmon {

namespace {

InputError model_error(const std::string& what) {
  return InputError(InputError::Kind::InvalidModel, what);
}

}  // namespace

int VariableSpec::level_index(std::string_view level) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return static_cast<int>(i);
  }
  return -1;
}

void validate_variables(std::span<const VariableSpec> vars) {
  if (vars.empty()) throw model_error("at least one variable is required");
  std::set<std::string> names;
  for (const auto& v : vars) {
    if (v.name.empty()) throw model_error("variable with empty name");
    if (!names.insert(v.name).second) throw model_error("duplicate variable name '" + v.name + "'");
    if (v.levels.size() < 2) {
      throw model_error("variable '" + v.name + "' needs at least two levels");
    }
    std::set<std::string> seen;
    for (const auto& l : v.levels) {
      if (l.empty() || l.find(EventTree::kPathSeparator) != std::string::npos) {
        throw model_error("variable '" + v.name + "' has invalid level name '" + l + "'");
      }
      if (!seen.insert(l).second) {
        throw model_error("variable '" + v.name + "' repeats level '" + l + "'");
      }
    }
  }
}

int find_variable(std::span<const VariableSpec> vars, std::string_view name) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

EventTree build_event_tree(std::vector<VariableSpec> vars) {
  validate_variables(vars);
  EventTree t;
  t.variables_ = std::move(vars);
  const int n = static_cast<int>(t.variables_.size());
  t.cuts_.resize(n);
  t.vertices_.push_back(Vertex{});
  // Breadth-first expansion keeps ids sorted by depth and, within a depth, by
  // the mixed-radix value of the path.
  for (std::size_t i = 0; i < t.vertices_.size(); ++i) {
    const int depth = t.vertices_[i].depth;
    if (depth == n) {
      t.leaves_.push_back(static_cast<int>(i));
      continue;
    }
    t.situations_.push_back(static_cast<int>(i));
    t.cuts_[depth].push_back(static_cast<int>(i));
    const int k = t.variables_[depth].cardinality();
    for (int l = 0; l < k; ++l) {
      Vertex c;
      c.parent = static_cast<int>(i);
      c.level = l;
      c.depth = depth + 1;
      t.vertices_[i].children.push_back(static_cast<int>(t.vertices_.size()));
      t.vertices_.push_back(std::move(c));
    }
  }
  return t;
}

TreeEdge EventTree::edge(int id) const {
  if (id <= 0 || id >= num_vertices()) {
    throw InputError(InputError::Kind::InvalidArgument, "unknown edge id " + std::to_string(id));
  }
  return {vertices_[id].parent, id, vertices_[id].level};
}

std::vector<int> EventTree::path(int v) const {
  std::vector<int> p;
  for (int u = v; u != 0; u = vertices_.at(u).parent) p.push_back(vertices_[u].level);
  std::reverse(p.begin(), p.end());
  return p;
}

std::string EventTree::path_id(int v) const {
  const auto p = path(v);
  std::string s;
  for (std::size_t d = 0; d < p.size(); ++d) {
    if (d) s += kPathSeparator;
    s += variables_[d].levels[p[d]];
  }
  return s;
}

int EventTree::find(std::span<const int> p) const {
  int v = 0;
  for (int l : p) {
    const auto& ch = vertices_[v].children;
    if (l < 0 || l >= static_cast<int>(ch.size())) return -1;
    v = ch[l];
  }
  return v;
}

int EventTree::find(std::string_view id) const {
  if (id.empty()) return 0;
  std::vector<int> p;
  std::size_t start = 0;
  while (start <= id.size()) {
    auto end = id.find(kPathSeparator, start);
    if (end == std::string_view::npos) end = id.size();
    const auto d = p.size();
    if (d >= variables_.size()) return -1;
    const int l = variables_[d].level_index(id.substr(start, end - start));
    if (l < 0) return -1;
    p.push_back(l);
    start = end + 1;
  }
  return find(p);
}

int EventTree::leaf_of(std::span<const int> observation) const {
  int v = 0;
  while (!vertices_[v].is_leaf()) v = vertices_[v].children.at(observation[vertices_[v].depth]);
  return v;
}

std::vector<int> EventTree::situations_on_path(std::span<const int> observation) const {
  std::vector<int> out;
  int v = 0;
  while (!vertices_[v].is_leaf()) {
    out.push_back(v);
    v = vertices_[v].children.at(observation[vertices_[v].depth]);
  }
  return out;
}

std::vector<int> EventTree::edge_event_paths(int edge_id) const {
  const int child = edge(edge_id).child;
  std::vector<int> out;
  std::vector<int> stack{child};
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    if (vertices_[v].is_leaf()) {
      out.push_back(v);
      continue;
    }
    for (auto it = vertices_[v].children.rbegin(); it != vertices_[v].children.rend(); ++it) {
      stack.push_back(*it);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Staging::Staging(const EventTree& tree, std::vector<Stage> stages) {
  stage_of_.assign(tree.num_vertices(), -1);
  std::vector<int> nulls_per_cut(tree.num_cuts(), 0);
  for (auto& s : stages) {
    if (s.situations.empty()) throw model_error("empty stage");
    std::sort(s.situations.begin(), s.situations.end());
    for (int v : s.situations) {
      if (v < 0 || v >= tree.num_vertices() || !tree.is_situation(v)) {
        throw model_error("stage member " + std::to_string(v) + " is not a situation");
      }
      if (tree.vertex(v).depth != tree.vertex(s.situations.front()).depth) {
        throw model_error("stage mixes situations from different cuts: '" +
                          tree.path_id(s.situations.front()) + "' and '" + tree.path_id(v) + "'");
      }
      if (tree.vertex(v).children.size() != tree.vertex(s.situations.front()).children.size()) {
        throw model_error("stage members have different out-degree");
      }
    }
    s.cut = tree.vertex(s.situations.front()).depth;
    if (s.null && ++nulls_per_cut[s.cut] > 1) throw model_error("more than one null stage in a cut");
  }
  std::sort(stages.begin(), stages.end(), [](const Stage& a, const Stage& b) {
    return std::tie(a.cut, a.null, a.situations.front()) < std::tie(b.cut, b.null, b.situations.front());
  });
  for (std::size_t i = 0; i < stages.size(); ++i) {
    for (int v : stages[i].situations) {
      if (stage_of_[v] != -1) {
        throw model_error("situation '" + tree.path_id(v) + "' belongs to two stages");
      }
      stage_of_[v] = static_cast<int>(i);
    }
    out_degree_.push_back(static_cast<int>(tree.vertex(stages[i].situations.front()).children.size()));
  }
  for (int v : tree.situations()) {
    if (stage_of_[v] == -1) throw model_error("situation '" + tree.path_id(v) + "' has no stage");
  }
  stages_ = std::move(stages);
}

Staging Staging::saturated(const EventTree& tree) {
  std::vector<Stage> stages;
  for (int v : tree.situations()) stages.push_back(Stage{tree.vertex(v).depth, {v}, false});
  return Staging(tree, std::move(stages));
}

std::vector<int> Staging::stages_in_cut(int cut) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (stages_[i].cut == cut) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool Staging::same_cut_partition(const Staging& other, int cut) const {
  auto blocks = [cut](const Staging& s) {
    std::set<std::vector<int>> b;
    for (const auto& st : s.stages_) {
      if (st.cut == cut) b.insert(st.situations);
    }
    return b;
  };
  return blocks(*this) == blocks(other);
}

bool operator==(const Staging& a, const Staging& b) {
  if (a.stages_.size() != b.stages_.size()) return false;
  for (std::size_t i = 0; i < a.stages_.size(); ++i) {
    if (a.stages_[i].situations != b.stages_[i].situations || a.stages_[i].null != b.stages_[i].null) {
      return false;
    }
  }
  return true;
}

void StagedTree::validate() const {
  if (!has_probabilities()) return;
  if (static_cast<int>(theta.size()) != staging.num_stages()) {
    throw model_error("probability vectors do not match the number of stages");
  }
  for (int i = 0; i < staging.num_stages(); ++i) {
    const auto& t = theta[i];
    if (t.size() != staging.out_degree(i)) throw model_error("probability vector has wrong length");
    if ((t.array() < 0.0).any()) throw model_error("negative edge probability");
    if (std::abs(t.sum() - 1.0) > 1e-12) throw model_error("floret probabilities do not sum to one");
  }
}

std::vector<int> compute_positions(const EventTree& tree, const Staging& staging) {
  const int n = tree.num_vertices();
  constexpr int kSink = std::numeric_limits<int>::max();
  std::vector<int> raw(n, kSink);
  std::map<std::vector<int>, int> signatures;
  // Vertices are breadth-first, so a reverse sweep sees children first.
  for (int v = n - 1; v >= 0; --v) {
    const auto& vx = tree.vertex(v);
    if (vx.is_leaf()) continue;
    std::vector<int> key;
    key.reserve(vx.children.size() + 1);
    key.push_back(staging.stage_of(v));
    for (int c : vx.children) key.push_back(raw[c]);
    auto [it, inserted] = signatures.try_emplace(std::move(key), static_cast<int>(signatures.size()));
    raw[v] = it->second;
  }
  // Renumber: by cut, then by smallest member (first seen in id order).
  std::map<int, int> renumber;
  std::vector<int> out(n);
  for (int v : tree.situations()) {
    auto [it, inserted] = renumber.try_emplace(raw[v], static_cast<int>(renumber.size()));
    out[v] = it->second;
  }
  const int sink = static_cast<int>(renumber.size());
  for (int v : tree.leaves()) out[v] = sink;
  return out;
}

ChainEventGraph to_ceg(const StagedTree& st) {
  st.validate();
  const auto& tree = st.tree;
  ChainEventGraph g;
  g.position_of_ = compute_positions(tree, st.staging);
  const int sink = g.position_of_[tree.leaves().front()];
  g.positions_.resize(sink + 1);
  g.by_cut_.resize(tree.num_cuts() + 1);
  for (int v : tree.situations()) {
    auto& p = g.positions_[g.position_of_[v]];
    if (p.situations.empty()) {
      p.cut = tree.vertex(v).depth;
      p.stage = st.staging.stage_of(v);
      for (int c : tree.vertex(v).children) p.next.push_back(g.position_of_[c]);
      g.by_cut_[p.cut].push_back(g.position_of_[v]);
    }
    p.situations.push_back(v);
  }
  g.positions_[sink].cut = tree.num_cuts();
  g.positions_[sink].stage = -1;
  g.positions_[sink].situations = {};
  g.by_cut_[tree.num_cuts()].push_back(sink);
  for (int w = 0; w < sink; ++w) {
    const auto& p = g.positions_[w];
    for (std::size_t l = 0; l < p.next.size(); ++l) {
      const double th = st.has_probabilities() ? st.theta[p.stage][static_cast<Eigen::Index>(l)]
                                               : std::numeric_limits<double>::quiet_NaN();
      g.edges_.push_back(CegEdge{w, p.next[l], static_cast<int>(l), th});
    }
  }
  return g;
}

}  // namespace cegmon
