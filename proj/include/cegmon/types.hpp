#ifndef CEGMON_TYPES_HPP
#define CEGMON_TYPES_HPP

#include <Eigen/Core>

#include <cstdint>

namespace cegmon {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vector = VectorX<double>;
using CountVector = VectorX<std::int64_t>;

// One complete observation per row, entries are level indices.
using CaseMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace cegmon

#endif  // CEGMON_TYPES_HPP
