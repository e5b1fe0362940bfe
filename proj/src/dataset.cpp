#include "cegmon/dataset.hpp"

#include "cegmon/error.hpp"
#include "cegmon/rng.hpp"
#include "cegmon/score.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

namespace cegmon {

Dataset::Dataset(std::vector<VariableSpec> vars, CaseMatrix cases, Provenance provenance)
    : vars_(std::move(vars)), cases_(std::move(cases)), provenance_(std::move(provenance)) {
  if (cases_.rows() > 0 && cases_.cols() != static_cast<Eigen::Index>(vars_.size())) {
    throw InputError(InputError::Kind::InvalidArgument, "case matrix width does not match variables");
  }
  if (cases_.rows() == 0) cases_.resize(0, static_cast<Eigen::Index>(vars_.size()));
  for (Eigen::Index j = 0; j < cases_.cols(); ++j) {
    const int k = vars_[j].cardinality();
    for (Eigen::Index m = 0; m < cases_.rows(); ++m) {
      if (cases_(m, j) < 0 || cases_(m, j) >= k) {
        throw InputError(InputError::Kind::UnknownLevel,
                         "row " + std::to_string(m + 1) + ", column '" + vars_[j].name + "': level index out of range");
      }
    }
  }
}

Dataset Dataset::head(long n) const {
  n = std::clamp<long>(n, 0, size());
  return Dataset(vars_, cases_.topRows(n), provenance_);
}

CountVector Dataset::level_counts(int variable) const {
  CountVector c = CountVector::Zero(vars_.at(variable).cardinality());
  for (long m = 0; m < size(); ++m) ++c[row(m)[variable]];
  return c;
}

void Dataset::write_csv(std::ostream& os) const {
  for (std::size_t j = 0; j < vars_.size(); ++j) os << (j ? "," : "") << csv_field(vars_[j].name);
  os << "\r\n";
  for (long m = 0; m < size(); ++m) {
    const auto r = row(m);
    for (std::size_t j = 0; j < vars_.size(); ++j) os << (j ? "," : "") << csv_field(vars_[j].levels[r[j]]);
    os << "\r\n";
  }
}

std::vector<std::vector<std::string>> read_csv_records(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A lone empty field is a blank line.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (is.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          quoted = true;
          field_started = true;
        } else {
          field += c;
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (is.peek() == '\n') is.get(c);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (!field.empty() || field_started || !record.empty()) end_record();
  return records;
}

Dataset load_csv(std::istream& is, std::span<const VariableSpec> vars, std::string source) {
  const auto records = read_csv_records(is);
  if (records.empty()) throw InputError(InputError::Kind::EmptyFile, source + ": empty file");
  const auto& header = records.front();
  std::vector<int> column(vars.size(), -1);
  for (std::size_t j = 0; j < vars.size(); ++j) {
    auto it = std::find(header.begin(), header.end(), vars[j].name);
    if (it == header.end()) {
      throw InputError(InputError::Kind::MissingColumn, source + ": missing column '" + vars[j].name + "'");
    }
    column[j] = static_cast<int>(it - header.begin());
  }
  CaseMatrix cases(static_cast<Eigen::Index>(records.size() - 1), static_cast<Eigen::Index>(vars.size()));
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const auto c = static_cast<std::size_t>(column[j]);
      const std::string value = c < rec.size() ? rec[c] : std::string();
      const int level = vars[j].level_index(value);
      if (level < 0) {
        throw InputError(InputError::Kind::UnknownLevel, source + ": row " + std::to_string(r) + ", column '" +
                                                             vars[j].name + "': unknown level '" + value + "'");
      }
      cases(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(j)) = level;
    }
  }
  return Dataset({vars.begin(), vars.end()}, std::move(cases), Provenance{std::move(source), "file", std::nullopt});
}

Dataset load_csv(const std::filesystem::path& path, std::span<const VariableSpec> vars) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(InputError::Kind::Io, "cannot open '" + path.string() + "'");
  return load_csv(in, vars, path.string());
}

std::vector<VariableSpec> infer_variables(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(InputError::Kind::Io, "cannot open '" + path.string() + "'");
  const auto records = read_csv_records(in);
  if (records.empty()) throw InputError(InputError::Kind::EmptyFile, path.string() + ": empty file");
  std::vector<VariableSpec> vars;
  for (const auto& name : records.front()) vars.push_back({name, {}});
  for (std::size_t r = 1; r < records.size(); ++r) {
    for (std::size_t j = 0; j < vars.size() && j < records[r].size(); ++j) {
      if (vars[j].level_index(records[r][j]) < 0) vars[j].levels.push_back(records[r][j]);
    }
  }
  return vars;
}

namespace {

Dataset permuted(const Dataset& data, const std::vector<long>& order, Provenance prov) {
  CaseMatrix cases(data.cases().rows(), data.cases().cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    cases.row(static_cast<Eigen::Index>(i)) = data.cases().row(order[i]);
  }
  return Dataset(data.variables(), std::move(cases), std::move(prov));
}

}  // namespace

Dataset order_by(const Dataset& data, std::string_view covariate) {
  const int j = find_variable(data.variables(), covariate);
  if (j < 0) {
    throw InputError(InputError::Kind::UnknownVariable, "unknown covariate '" + std::string(covariate) + "'");
  }
  std::vector<long> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(),
                   [&](long a, long b) { return data.row(a)[j] < data.row(b)[j]; });
  Provenance prov = data.provenance();
  prov.ordering = "order-by:" + std::string(covariate);
  return permuted(data, order, std::move(prov));
}

Dataset shuffle(const Dataset& data, std::uint64_t seed) {
  CountedStream rng(seed, /*stream=*/1);
  std::vector<long> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0L);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  Provenance prov = data.provenance();
  prov.ordering = "shuffle";
  prov.seed = seed;
  return permuted(data, order, std::move(prov));
}

}  // namespace cegmon
