#ifndef CEGMON_SAMPLER_HPP
#define CEGMON_SAMPLER_HPP

#include "cegmon/bn.hpp"
#include "cegmon/dataset.hpp"
#include "cegmon/tree.hpp"

#include <cstdint>
#include <vector>

namespace cegmon {

/// n independent root-to-leaf walks. Throws InputError when the staged tree
/// has no floret probabilities.
Dataset sample_from_ceg(const StagedTree& st, long n, std::uint64_t seed);

/// Ancestral sampling with one probability vector per BN row (indexed as
/// DiscreteBN::row).
Dataset sample_from_bn(const DiscreteBN& bn, const std::vector<Vector>& rows, long n, std::uint64_t seed);

}  // namespace cegmon

#endif  // CEGMON_SAMPLER_HPP
