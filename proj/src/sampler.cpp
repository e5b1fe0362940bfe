#include "cegmon/sampler.hpp"

#include "cegmon/error.hpp"
#include "cegmon/rng.hpp"

namespace cegmon {

Dataset sample_from_ceg(const StagedTree& st, long n, std::uint64_t seed) {
  if (!st.has_probabilities()) {
    throw InputError(InputError::Kind::InvalidModel, "sampling needs floret probabilities for every stage");
  }
  if (n < 0) throw InputError(InputError::Kind::InvalidArgument, "sample size must be nonnegative");
  st.validate();
  const auto& tree = st.tree;
  CountedStream rng(seed);
  CaseMatrix cases(n, static_cast<Eigen::Index>(tree.variables().size()));
  for (long m = 0; m < n; ++m) {
    int v = tree.root();
    while (!tree.vertex(v).is_leaf()) {
      const int level = rng.categorical(st.theta[st.staging.stage_of(v)]);
      cases(m, tree.vertex(v).depth) = level;
      v = tree.child(v, level);
    }
  }
  return Dataset(tree.variables(), std::move(cases), Provenance{"sample", "generated", seed});
}

Dataset sample_from_bn(const DiscreteBN& bn, const std::vector<Vector>& rows, long n, std::uint64_t seed) {
  if (static_cast<int>(rows.size()) != bn.prior().num_stages()) {
    throw InputError(InputError::Kind::InvalidModel, "one probability vector per BN row is required");
  }
  if (n < 0) throw InputError(InputError::Kind::InvalidArgument, "sample size must be nonnegative");
  CountedStream rng(seed);
  CaseMatrix cases = CaseMatrix::Zero(n, bn.num_nodes());
  for (long m = 0; m < n; ++m) {
    for (int node : bn.topological_order()) {
      std::span<const int> x{cases.data() + m * cases.cols(), static_cast<std::size_t>(cases.cols())};
      const int row = bn.row(node, bn.config_index(node, x));
      cases(m, node) = rng.categorical(rows[row]);
    }
  }
  return Dataset(bn.variables(), std::move(cases), Provenance{"sample", "generated", seed});
}

}  // namespace cegmon
