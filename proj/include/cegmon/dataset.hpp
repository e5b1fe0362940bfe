#ifndef CEGMON_DATASET_HPP
#define CEGMON_DATASET_HPP

#include "cegmon/tree.hpp"
#include "cegmon/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cegmon {

struct Provenance {
  std::string source;
  std::string ordering = "file";
  std::optional<std::uint64_t> seed;
};

/// Complete categorical observations in prequential order.
class Dataset {
 public:
  Dataset() = default;
  /// Throws InputError if a level index is out of range.
  Dataset(std::vector<VariableSpec> vars, CaseMatrix cases, Provenance provenance = {});

  const std::vector<VariableSpec>& variables() const { return vars_; }
  int num_variables() const { return static_cast<int>(vars_.size()); }
  long size() const { return static_cast<long>(cases_.rows()); }
  bool empty() const { return cases_.rows() == 0; }

  std::span<const int> row(long m) const {
    return {cases_.data() + m * cases_.cols(), static_cast<std::size_t>(cases_.cols())};
  }
  const CaseMatrix& cases() const { return cases_; }
  const Provenance& provenance() const { return provenance_; }

  /// Rows [0, n).
  Dataset head(long n) const;
  /// Counts per level of one variable.
  CountVector level_counts(int variable) const;

  void write_csv(std::ostream& os) const;

 private:
  std::vector<VariableSpec> vars_;
  CaseMatrix cases_;
  Provenance provenance_;
};

/// RFC 4180 records, header included.
std::vector<std::vector<std::string>> read_csv_records(std::istream& is);

/// Reads columns named after `vars` (extra columns are ignored) into the
/// order of `vars`. Throws InputError with kind MissingColumn, UnknownLevel or
/// EmptyFile.
Dataset load_csv(const std::filesystem::path& path, std::span<const VariableSpec> vars);
Dataset load_csv(std::istream& is, std::span<const VariableSpec> vars, std::string source = "<stream>");

/// Variables from a CSV header, levels in order of first appearance.
std::vector<VariableSpec> infer_variables(const std::filesystem::path& path);

/// Stable sort by the level index of `covariate`.
Dataset order_by(const Dataset& data, std::string_view covariate);
/// Seeded uniform shuffle.
Dataset shuffle(const Dataset& data, std::uint64_t seed);

}  // namespace cegmon

#endif  // CEGMON_DATASET_HPP
