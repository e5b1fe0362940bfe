#include "cegmon/score.hpp"

#include "cegmon/error.hpp"

#include <charconv>
#include <set>

namespace cegmon {

void MonitorTrace::append(long m, std::string target, const ScoreStep& step,
                          std::map<std::string, double> extras) {
  sum_s_ += step.S;
  sum_e_ += step.E;
  sum_v_ += step.V;
  if (step.infinite()) flagged_ = true;
  TraceRow row{m, std::move(target), step, std::nullopt, std::move(extras)};
  if (std::isinf(sum_s_)) {
    row.z = std::numeric_limits<double>::infinity();
  } else if (sum_v_ > 0.0) {
    row.z = (sum_s_ - sum_e_) / std::sqrt(sum_v_);
  }
  rows_.push_back(std::move(row));
}

std::optional<double> cumulative_z(const MonitorTrace& trace) {
  if (trace.empty()) throw InputError(InputError::Kind::InvalidArgument, "cumulative_z of an empty trace");
  if (std::isinf(trace.sum_s())) return std::numeric_limits<double>::infinity();
  if (!(trace.sum_v() > 0.0)) return std::nullopt;
  return (trace.sum_s() - trace.sum_e()) / std::sqrt(trace.sum_v());
}

std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_trace_csv(std::ostream& os, const MonitorTrace& trace) {
  os << "m,target,S,E,V,Z_cum\r\n";
  for (const auto& r : trace.rows()) {
    os << r.m << ',' << csv_field(r.target) << ',' << format_double(r.step.S) << ','
       << format_double(r.step.E) << ',' << format_double(r.step.V) << ','
       << (r.z ? format_double(*r.z) : std::string("NA")) << "\r\n";
  }
}

void write_trace_extras_csv(std::ostream& os, const MonitorTrace& trace) {
  std::set<std::string> keys;
  for (const auto& r : trace.rows()) {
    for (const auto& [k, v] : r.extras) keys.insert(k);
  }
  os << "m,target";
  for (const auto& k : keys) os << ',' << csv_field(k);
  os << "\r\n";
  for (const auto& r : trace.rows()) {
    os << r.m << ',' << csv_field(r.target);
    for (const auto& k : keys) {
      auto it = r.extras.find(k);
      os << ',' << (it == r.extras.end() ? std::string("NA") : format_double(it->second));
    }
    os << "\r\n";
  }
}

}  // namespace cegmon
