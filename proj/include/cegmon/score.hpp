#ifndef CEGMON_SCORE_HPP
#define CEGMON_SCORE_HPP

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cegmon {

/// Logarithmic score of one observation with its expectation and variance
/// under the predictive that produced it (natural logarithms).
struct ScoreStep {
  double S = 0.0;
  double E = 0.0;
  double V = 0.0;

  bool infinite() const { return std::isinf(S); }
};

/// Scores outcome `observed` under probability vector `p`. A zero-probability
/// outcome gives S = +inf instead of throwing.
template <typename Derived>
ScoreStep score(const Eigen::MatrixBase<Derived>& p, int observed) {
  using std::log;
  ScoreStep step;
  double second = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double pk = static_cast<double>(p(k));
    if (pk > 0.0) {
      const double l = log(pk);
      step.E -= pk * l;
      second += pk * l * l;
    }
  }
  step.V = second - step.E * step.E;
  const double po = static_cast<double>(p(observed));
  step.S = po > 0.0 ? -log(po) : std::numeric_limits<double>::infinity();
  return step;
}

/// For predictives over large outcome spaces where only the observed
/// probability and the first two moments of the surprise are at hand.
inline ScoreStep score_from_moments(double p_observed, double mean, double second) {
  return {p_observed > 0.0 ? -std::log(p_observed) : std::numeric_limits<double>::infinity(), mean,
          second - mean * mean};
}

struct TraceRow {
  long m = 0;  // 1-based observation index in the prequential order
  std::string target;
  ScoreStep step;
  std::optional<double> z;  // cumulative standardized statistic after this row
  std::map<std::string, double> extras;
};

/// Ordered score record of one monitor with running standardization.
class MonitorTrace {
 public:
  void append(long m, std::string target, const ScoreStep& step, std::map<std::string, double> extras = {});

  const std::vector<TraceRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  std::size_t size() const { return rows_.size(); }
  /// True once an infinite surprise has been recorded.
  bool flagged() const { return flagged_; }

  double sum_s() const { return sum_s_; }
  double sum_e() const { return sum_e_; }
  double sum_v() const { return sum_v_; }
  std::optional<double> final_z() const { return rows_.empty() ? std::nullopt : rows_.back().z; }

 private:
  std::vector<TraceRow> rows_;
  double sum_s_ = 0.0;
  double sum_e_ = 0.0;
  double sum_v_ = 0.0;
  bool flagged_ = false;
};

/// (ΣS - ΣE) / sqrt(ΣV), undefined when ΣV = 0. Throws on an empty trace.
std::optional<double> cumulative_z(const MonitorTrace& trace);

inline constexpr double kSuspicionThreshold = 1.96;

/// Shortest round-trip decimal; "inf"/"-inf" for infinities, "NA" for NaN.
std::string format_double(double x);

/// `m,target,S,E,V,Z_cum`
void write_trace_csv(std::ostream& os, const MonitorTrace& trace);
/// `m,target,<extra...>` for any per-row extras (raw predictives and the like).
void write_trace_extras_csv(std::ostream& os, const MonitorTrace& trace);

/// Quotes a CSV field when needed.
std::string csv_field(const std::string& s);

}  // namespace cegmon

#endif  // CEGMON_SCORE_HPP
