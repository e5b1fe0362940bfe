#ifndef CEGMON_TREE_HPP
#define CEGMON_TREE_HPP

#include "cegmon/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cegmon {

/// A categorical variable. The order of a variable list fixes the
/// stratification of the event tree built from it.
struct VariableSpec {
  std::string name;
  std::vector<std::string> levels;

  int cardinality() const { return static_cast<int>(levels.size()); }
  /// Index of `level`, or -1.
  int level_index(std::string_view level) const;
};

/// Throws InputError on fewer than two levels, duplicate names or levels, or
/// names containing the path separator.
void validate_variables(std::span<const VariableSpec> vars);

int find_variable(std::span<const VariableSpec> vars, std::string_view name);

struct Vertex {
  int parent = -1;
  int level = -1;  // label of the incoming edge
  int depth = 0;   // for a situation: index of the variable it emits
  std::vector<int> children;  // indexed by level, empty for leaves

  bool is_leaf() const { return children.empty(); }
};

struct TreeEdge {
  int parent;
  int child;
  int level;
};

/// Directed rooted tree of situations and leaves. Vertex ids are assigned in
/// breadth-first order with children in level order, so the root is 0.
/// Edges are identified by the id of their child vertex.
class EventTree {
 public:
  static constexpr char kPathSeparator = '/';

  EventTree() = default;

  const std::vector<VariableSpec>& variables() const { return variables_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return num_vertices() - 1; }
  int num_cuts() const { return static_cast<int>(cuts_.size()); }
  int root() const { return 0; }

  const Vertex& vertex(int id) const { return vertices_.at(id); }
  bool is_situation(int id) const { return !vertices_.at(id).is_leaf(); }
  const std::vector<int>& situations() const { return situations_; }
  const std::vector<int>& leaves() const { return leaves_; }
  /// Situations emitting variable `depth`.
  const std::vector<int>& cut(int depth) const { return cuts_.at(depth); }

  int child(int v, int level) const { return vertices_[v].children.at(level); }
  TreeEdge edge(int id) const;

  /// Level indices from the root to `v`.
  std::vector<int> path(int v) const;
  /// Level names joined by '/', the empty string for the root.
  std::string path_id(int v) const;
  /// Vertex reached by following `path` from the root, or -1.
  int find(std::span<const int> path) const;
  int find(std::string_view path_id) const;

  /// Leaf reached by a complete observation.
  int leaf_of(std::span<const int> observation) const;
  /// Situations visited by a complete observation, root first.
  std::vector<int> situations_on_path(std::span<const int> observation) const;

  /// Root-to-leaf paths through edge `id`, as leaf ids. Throws on unknown ids.
  std::vector<int> edge_event_paths(int edge_id) const;

  friend EventTree build_event_tree(std::vector<VariableSpec> vars);

 private:
  std::vector<VariableSpec> variables_;
  std::vector<Vertex> vertices_;
  std::vector<int> situations_;
  std::vector<int> leaves_;
  std::vector<std::vector<int>> cuts_;
};

/// Stratified event tree over an ordered variable list.
EventTree build_event_tree(std::vector<VariableSpec> vars);

struct Stage {
  int cut = 0;
  std::vector<int> situations;  // sorted
  bool null = false;            // pools unpopulated situations of the cut
};

/// A within-cut partition of every cut's situations into stages. Stage ids
/// are canonical: ordered by cut, then null flag, then smallest member.
class Staging {
 public:
  Staging() = default;
  /// Validates disjointness, coverage, the within-cut constraint and equal
  /// out-degree; throws InputError otherwise.
  Staging(const EventTree& tree, std::vector<Stage> stages);

  static Staging saturated(const EventTree& tree);

  int num_stages() const { return static_cast<int>(stages_.size()); }
  const std::vector<Stage>& stages() const { return stages_; }
  const Stage& stage(int id) const { return stages_.at(id); }
  int stage_of(int situation) const { return stage_of_.at(situation); }
  std::vector<int> stages_in_cut(int cut) const;
  /// Number of emanating edges of every member of `id`.
  int out_degree(int id) const { return out_degree_.at(id); }

  /// Same blocks in one cut, ignoring stage numbering.
  bool same_cut_partition(const Staging& other, int cut) const;

  friend bool operator==(const Staging& a, const Staging& b);

 private:
  std::vector<Stage> stages_;
  std::vector<int> stage_of_;
  std::vector<int> out_degree_;
};

/// Event tree with a staging and, optionally, the shared floret probabilities
/// of each stage (`theta` empty means structure only).
struct StagedTree {
  EventTree tree;
  Staging staging;
  std::vector<Vector> theta;

  bool has_probabilities() const { return !theta.empty(); }
  /// Throws InputError if a floret vector has the wrong size, a negative
  /// entry, or does not sum to one within 1e-12.
  void validate() const;
};

/// Vertex of a chain event graph. Edges leave in level order.
struct Position {
  int cut = 0;
  int stage = -1;               // colour; -1 for the sink
  std::vector<int> situations;  // tree situations merged into this position
  std::vector<int> next;        // target position per level
};

struct CegEdge {
  int from;
  int to;
  int level;
  double theta;  // NaN when the staged tree carries no probabilities
};

/// Quotient of a staged tree by its positions. Position 0 is the root and the
/// last position is the sink.
class ChainEventGraph {
 public:
  const std::vector<Position>& positions() const { return positions_; }
  const Position& position(int id) const { return positions_.at(id); }
  int num_positions() const { return static_cast<int>(positions_.size()); }
  int root() const { return 0; }
  int sink() const { return num_positions() - 1; }
  const std::vector<CegEdge>& edges() const { return edges_; }
  /// Position of a tree vertex; leaves map to the sink.
  int position_of(int vertex) const { return position_of_.at(vertex); }
  const std::vector<int>& position_map() const { return position_of_; }
  /// Positions in topological order (by cut), sink last.
  const std::vector<int>& positions_in_cut(int cut) const { return by_cut_.at(cut); }

  friend ChainEventGraph to_ceg(const StagedTree& st);

 private:
  std::vector<Position> positions_;
  std::vector<CegEdge> edges_;
  std::vector<int> position_of_;
  std::vector<std::vector<int>> by_cut_;
};

/// Maps each vertex to a position id by bottom-up canonical signatures of
/// (stage, child position per level). Leaves share one id. Ids are dense and
/// ordered by cut then smallest member situation; the sink takes the last id.
std::vector<int> compute_positions(const EventTree& tree, const Staging& staging);

ChainEventGraph to_ceg(const StagedTree& st);

}  // namespace cegmon

#endif  // CEGMON_TREE_HPP
