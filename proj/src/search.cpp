#include "cegmon/search.hpp"

#include "cegmon/bn.hpp"
#include "cegmon/ceg_model.hpp"
#include "cegmon/error.hpp"
#include "cegmon/score.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <utility>

namespace cegmon {

double score_merge(const DirichletState& state, const Staging& staging, int a, int b) {
  if (a == b) throw InputError(InputError::Kind::InvalidArgument, "cannot merge a stage with itself");
  if (staging.stage(a).cut != staging.stage(b).cut) {
    throw InputError(InputError::Kind::InvalidArgument, "stages lie in different cuts");
  }
  if (staging.out_degree(a) != staging.out_degree(b)) {
    throw InputError(InputError::Kind::InvalidArgument, "stages have different out-degree");
  }
  const Vector alpha = state.alpha(a) + state.alpha(b);
  const CountVector y = state.counts(a) + state.counts(b);
  return log_dirichlet_multinomial(alpha, y) - log_dirichlet_multinomial(state.alpha(a), state.counts(a)) -
         log_dirichlet_multinomial(state.alpha(b), state.counts(b));
}

namespace {

struct Block {
  int cut = 0;
  std::vector<int> members;
  Vector alpha;
  CountVector counts;
  double lml = 0.0;
  bool null = false;
};

std::string block_label(const EventTree& tree, const Block& b) {
  std::string out;
  for (int v : b.members) {
    if (!out.empty()) out += '|';
    out += tree.path_id(v);
  }
  return out;
}

}  // namespace

SearchResult ahc_search(const EventTree& tree, const Dataset& data, double ess, const SearchOptions& opts) {
  if (!(ess > 0.0)) throw InputError(InputError::Kind::InvalidArgument, "ess must be positive");
  const auto counts = situation_counts(tree, data);
  auto situation_alpha = [&](int v) {
    const auto k = static_cast<Eigen::Index>(tree.vertex(v).children.size());
    return Vector::Constant(k, ess / static_cast<double>(k));
  };

  std::vector<Block> blocks;
  std::vector<int> null_of_cut(tree.num_cuts(), -1);
  for (int v : tree.situations()) {
    const int cut = tree.vertex(v).depth;
    if (opts.pool_unpopulated && counts[v].sum() == 0) {
      if (null_of_cut[cut] < 0) {
        null_of_cut[cut] = static_cast<int>(blocks.size());
        blocks.push_back(Block{cut, {}, Vector::Zero(situation_alpha(v).size()),
                               CountVector::Zero(counts[v].size()), 0.0, true});
      }
      Block& b = blocks[null_of_cut[cut]];
      b.members.push_back(v);
      b.alpha += situation_alpha(v);
      continue;
    }
    blocks.push_back(Block{cut, {v}, situation_alpha(v), counts[v], 0.0, false});
  }
  for (auto& b : blocks) b.lml = log_dirichlet_multinomial(b.alpha, b.counts);
  auto total = [&] {
    double s = 0.0;
    for (const auto& b : blocks) s += b.lml;
    return s;
  };

  SearchResult result;
  double current = total();
  for (;;) {
    int best_i = -1;
    int best_j = -1;
    double best = 0.0;
    double best_lml = 0.0;
    std::pair<std::string, std::string> best_key;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].null) continue;
      for (std::size_t j = i + 1; j < blocks.size(); ++j) {
        if (blocks[j].null || blocks[j].cut != blocks[i].cut) continue;
        if (blocks[j].alpha.size() != blocks[i].alpha.size()) continue;
        const double merged =
            log_dirichlet_multinomial(Vector(blocks[i].alpha + blocks[j].alpha), CountVector(blocks[i].counts + blocks[j].counts));
        const double delta = merged - blocks[i].lml - blocks[j].lml;
        if (!(delta > 0.0)) continue;
        auto key = std::minmax(tree.path_id(blocks[i].members.front()), tree.path_id(blocks[j].members.front()));
        std::pair<std::string, std::string> k{key.first, key.second};
        const double tol = 1e-12 * std::max(1.0, std::abs(best));
        if (best_i < 0 || delta > best + tol) {
          best_i = static_cast<int>(i);
          best_j = static_cast<int>(j);
          best = delta;
          best_lml = merged;
          best_key = std::move(k);
        } else if (std::abs(delta - best) <= tol) {
          spdlog::debug("tie in merge gain {} between ({}, {}) and ({}, {})", delta, best_key.first,
                        best_key.second, k.first, k.second);
          if (k < best_key) {
            best_i = static_cast<int>(i);
            best_j = static_cast<int>(j);
            best_lml = merged;
            best_key = std::move(k);
          }
        }
      }
    }
    if (best_i < 0) break;
    Block& a = blocks[best_i];
    Block& b = blocks[best_j];
    MergeStep step;
    step.cut = a.cut;
    step.block_a = block_label(tree, a);
    step.block_b = block_label(tree, b);
    step.delta = best;
    a.members.insert(a.members.end(), b.members.begin(), b.members.end());
    std::sort(a.members.begin(), a.members.end());
    a.alpha += b.alpha;
    a.counts += b.counts;
    a.lml = best_lml;
    blocks.erase(blocks.begin() + best_j);
    current += best;
    step.score = current;
    result.history.push_back(std::move(step));
  }

  std::vector<Stage> stages;
  for (const auto& b : blocks) stages.push_back(Stage{b.cut, b.members, b.null});
  result.staging = Staging(tree, std::move(stages));
  result.priors.resize(blocks.size());
  for (const auto& b : blocks) result.priors[result.staging.stage_of(b.members.front())] = b.alpha;
  result.log_marginal_likelihood = total();
  return result;
}

void write_merge_history_csv(std::ostream& os, const EventTree& tree, const std::vector<MergeStep>& history) {
  os << "step,cut,block_a,block_b,delta,score\r\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    os << i + 1 << ',' << csv_field(tree.variables()[h.cut].name) << ',' << csv_field(h.block_a) << ','
       << csv_field(h.block_b) << ',' << format_double(h.delta) << ',' << format_double(h.score) << "\r\n";
  }
}

}  // namespace cegmon
