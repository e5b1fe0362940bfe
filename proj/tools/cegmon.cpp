// cegmon command-line front end.
#include "cegmon/bn.hpp"
#include "cegmon/ceg_model.hpp"
#include "cegmon/ceg_monitor.hpp"
#include "cegmon/dataset.hpp"
#include "cegmon/error.hpp"
#include "cegmon/model_io.hpp"
#include "cegmon/sampler.hpp"
#include "cegmon/score.hpp"
#include "cegmon/search.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace cegmon;
using nlohmann::ordered_json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitFlagged = 3;

struct DataOptions {
  std::string data;
  std::string order_by;
  std::optional<std::uint64_t> shuffle_seed;
  std::string summary;  // empty: stdout
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
  cmd->add_option("--data", o.data, "Case file (CSV with header)")->required()->check(CLI::ExistingFile);
  auto* ob = cmd->add_option("--order-by", o.order_by, "Stable-sort cases by this variable's level order");
  cmd->add_option("--shuffle-seed", o.shuffle_seed, "Shuffle cases with this seed")->excludes(ob);
  cmd->add_option("--summary", o.summary, "Write the JSON summary here instead of stdout");
}

Dataset prepare(const DataOptions& o, std::span<const VariableSpec> vars) {
  Dataset d = load_csv(o.data, vars);
  if (!o.order_by.empty()) d = order_by(d, o.order_by);
  if (o.shuffle_seed) d = shuffle(d, *o.shuffle_seed);
  return d;
}

ordered_json provenance_json(const Dataset& d) {
  ordered_json p;
  p["source"] = d.provenance().source;
  p["ordering"] = d.provenance().ordering;
  if (d.provenance().seed) p["seed"] = *d.provenance().seed;
  p["cases"] = d.size();
  return p;
}

void emit_summary(const DataOptions& o, const ordered_json& j) {
  const std::string text = j.dump(2) + "\n";
  if (o.summary.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.summary, std::ios::binary);
  if (!out) throw InputError(InputError::Kind::Io, "cannot write '" + o.summary + "'");
  out << text;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(InputError::Kind::Io, "cannot write '" + path + "'");
  return out;
}

ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

ordered_json trace_summary(const MonitorTrace& t) {
  ordered_json j;
  j["rows"] = t.size();
  j["sum_S"] = number(t.sum_s());
  j["sum_E"] = number(t.sum_e());
  j["sum_V"] = number(t.sum_v());
  const auto z = t.final_z();
  j["final_Z"] = z ? number(*z) : ordered_json(nullptr);
  j["flagged"] = t.flagged();
  j["suspicious"] = z && std::abs(*z) > kSuspicionThreshold;
  return j;
}

bool is_ceg_document(const std::string& path) {
  const auto doc = ordered_json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw InputError(InputError::Kind::InvalidModel, "'" + path + "' is not a JSON object");
  return doc.contains("staging");
}

std::vector<VariableSpec> read_variables_file(const std::string& path) {
  const auto doc = ordered_json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw InputError(InputError::Kind::InvalidModel, "variables file must hold a JSON list of {name, levels}");
  }
  std::vector<VariableSpec> vars;
  try {
    for (const auto& v : doc) vars.push_back({v.at("name").get<std::string>(), v.at("levels").get<std::vector<std::string>>()});
  } catch (const ordered_json::exception& e) {
    throw InputError(InputError::Kind::InvalidModel, e.what());
  }
  validate_variables(vars);
  return vars;
}

int variable_index(std::span<const VariableSpec> vars, const std::string& name) {
  const int i = find_variable(vars, name);
  if (i < 0) throw InputError(InputError::Kind::UnknownVariable, "unknown variable '" + name + "'");
  return i;
}

int level_of(const VariableSpec& var, const std::string& level) {
  const int i = var.level_index(level);
  if (i < 0) throw InputError(InputError::Kind::UnknownLevel, "'" + level + "' is not a level of " + var.name);
  return i;
}

int situation_of(const EventTree& tree, const std::string& path) {
  const int v = tree.find(path);
  if (v < 0 || !tree.is_situation(v)) throw InputError(InputError::Kind::InvalidArgument, "'" + path + "' is not a situation");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

// ---------------------------------------------------------------------------

struct FitArgs {
  DataOptions data;
  std::string variables;
  std::string out;
  std::string history;
  double ess = 3.0;
  bool pool = false;
};

int run_fit(const FitArgs& a) {
  const auto vars = a.variables.empty() ? infer_variables(a.data.data) : read_variables_file(a.variables);
  const Dataset d = prepare(a.data, vars);
  const EventTree tree = build_event_tree(vars);
  const SearchResult r = ahc_search(tree, d, a.ess, SearchOptions{a.pool});
  const CegModel model{StagedTree{tree, r.staging, {}}, r.priors};
  open_out(a.out) << serialize_ceg_model(model);
  if (!a.history.empty()) {
    auto h = open_out(a.history);
    write_merge_history_csv(h, tree, r.history);
  }
  ordered_json j;
  j["command"] = "fit";
  j["data"] = provenance_json(d);
  j["ess"] = a.ess;
  j["log_marginal_likelihood"] = r.log_marginal_likelihood;
  j["stages"] = r.staging.num_stages();
  j["merges"] = r.history.size();
  j["model"] = a.out;
  emit_summary(a.data, j);
  return 0;
}

struct ScoreArgs {
  DataOptions data;
  std::string model_a;
  std::string model_b;
  std::string trace_a;
  std::string trace_b;
  double ess = 3.0;
};

struct Scored {
  std::string kind;
  GlobalMonitorResult result;
};

Scored score_model(const std::string& path, const DataOptions& o, double ess) {
  if (is_ceg_document(path)) {
    const CegModel m = load_ceg_model(path, ess);
    return {"ceg", ceg_global_monitor(m, prepare(o, m.tree().variables()))};
  }
  const BnModel m = load_bn_model(path, ess);
  return {"bn", bn_global_monitor(m.bn, prepare(o, m.bn.variables()))};
}

int run_score(const ScoreArgs& a) {
  ordered_json j;
  j["command"] = "score";
  bool flagged = false;
  std::vector<double> totals;
  for (const auto& [path, trace_path, key] :
       {std::tuple{a.model_a, a.trace_a, "model_a"}, std::tuple{a.model_b, a.trace_b, "model_b"}}) {
    if (path.empty()) continue;
    const Scored s = score_model(path, a.data, a.ess);
    if (!trace_path.empty()) {
      auto out = open_out(trace_path);
      write_trace_csv(out, s.result.trace);
    }
    ordered_json m;
    m["path"] = path;
    m["kind"] = s.kind;
    m["global_monitor"] = number(s.result.total);
    m["log_marginal_likelihood"] = number(-s.result.total);
    m["final_Z"] = s.result.trace.final_z() ? number(*s.result.trace.final_z()) : ordered_json(nullptr);
    j[key] = m;
    totals.push_back(s.result.total);
    flagged = flagged || s.result.trace.flagged();
  }
  if (totals.size() == 2) {
    const double delta = totals[1] - totals[0];
    j["log_bayes_factor_a_over_b"] = number(delta);
    j["bayes_factor_a_over_b"] = number(std::exp(delta));
  }
  emit_summary(a.data, j);
  return flagged ? kExitFlagged : 0;
}

struct MonitorArgs {
  DataOptions data;
  std::string model;
  std::string out;
  double ess = 3.0;
  // node / parent-child
  std::string node;
  std::string mode = "marginal";
  std::string parents;
  // staging
  std::string cut;
  std::string candidates_out;
  int max_full_split = 12;
  // position
  std::string position = "all";
  // situation monitors
  std::string stage;
  std::string level;
  std::string ordering;
};

int run_node(const MonitorArgs& a) {
  const BnModel m = load_bn_model(a.model, a.ess);
  const Dataset d = prepare(a.data, m.bn.variables());
  const int node = variable_index(m.bn.variables(), a.node);
  const MonitorTrace t =
      a.mode == "conditional" ? conditional_node_monitor(m.bn, d, node) : marginal_node_monitor(m.bn, d, node);
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    write_trace_csv(out, t);
  }
  ordered_json j;
  j["command"] = "monitor node";
  j["data"] = provenance_json(d);
  j["node"] = a.node;
  j["mode"] = a.mode;
  j["trace"] = trace_summary(t);
  emit_summary(a.data, j);
  return t.flagged() ? kExitFlagged : 0;
}

int run_parent_child(const MonitorArgs& a) {
  const BnModel m = load_bn_model(a.model, a.ess);
  const auto& vars = m.bn.variables();
  const Dataset d = prepare(a.data, vars);
  const int node = variable_index(vars, a.node);
  const auto& parents = m.bn.parents(node);
  std::vector<int> levels(parents.size(), -1);
  for (const auto& item : split(a.parents, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError(InputError::Kind::InvalidArgument, "expected NAME=LEVEL, got '" + item + "'");
    const int var = variable_index(vars, item.substr(0, eq));
    const auto it = std::find(parents.begin(), parents.end(), var);
    if (it == parents.end()) {
      throw InputError(InputError::Kind::InvalidArgument, vars[var].name + " is not a parent of " + a.node);
    }
    levels[it - parents.begin()] = level_of(vars[var], item.substr(eq + 1));
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0) throw InputError(InputError::Kind::InvalidArgument, "no level given for parent " + vars[parents[i]].name);
  }
  const MonitorTrace t = parent_child_monitor(m.bn, d, node, levels);
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    write_trace_csv(out, t);
  }
  ordered_json j;
  j["command"] = "monitor parent-child";
  j["data"] = provenance_json(d);
  j["node"] = a.node;
  j["parents"] = a.parents;
  j["trace"] = trace_summary(t);
  emit_summary(a.data, j);
  return t.flagged() ? kExitFlagged : 0;
}

int run_staging(const MonitorArgs& a) {
  const CegModel m = load_ceg_model(a.model, a.ess);
  const auto& tree = m.tree();
  const Dataset d = prepare(a.data, tree.variables());
  const int cut = variable_index(tree.variables(), a.cut);
  const auto r = staging_monitor(m, d, cut, default_staging_candidates(m, cut, HasseOptions{a.max_full_split}));
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    out << "m,candidate_id,posterior\r\n";
    for (Eigen::Index row = 0; row < r.posterior.rows(); ++row) {
      for (Eigen::Index c = 0; c < r.posterior.cols(); ++c) {
        out << row << ',' << c << ',' << format_double(r.posterior(row, c)) << "\r\n";
      }
    }
  }
  ordered_json cands = ordered_json::array();
  for (std::size_t c = 0; c < r.candidates.size(); ++c) {
    ordered_json blocks = ordered_json::array();
    for (int s : r.candidates[c].stages_in_cut(cut)) {
      ordered_json ids = ordered_json::array();
      for (int v : r.candidates[c].stage(s).situations) ids.push_back(tree.path_id(v));
      blocks.push_back(std::move(ids));
    }
    ordered_json item;
    item["candidate_id"] = c;
    item["blocks"] = std::move(blocks);
    cands.push_back(std::move(item));
  }
  if (!a.candidates_out.empty()) open_out(a.candidates_out) << ordered_json{{"cut", a.cut}, {"candidates", cands}}.dump(2) << "\n";
  const long last = r.posterior.rows() - 1;
  ordered_json j;
  j["command"] = "monitor staging";
  j["data"] = provenance_json(d);
  j["cut"] = a.cut;
  j["candidates"] = r.candidates.size();
  j["final_leader"] = r.leader(last);
  j["final_posterior"] = r.posterior(last, r.leader(last));
  emit_summary(a.data, j);
  return 0;
}

int run_position(const MonitorArgs& a) {
  const CegModel m = load_ceg_model(a.model, a.ess);
  const Dataset d = prepare(a.data, m.tree().variables());
  const ChainEventGraph ceg = to_ceg(m.staged);
  std::vector<int> targets;
  if (a.position == "all") {
    for (int w = 0; w < ceg.sink(); ++w) targets.push_back(w);
  } else {
    if (a.position.size() < 2 || a.position[0] != 'w') {
      throw InputError(InputError::Kind::InvalidArgument, "position must look like w3 or be 'all'");
    }
    targets.push_back(std::stoi(a.position.substr(1)));
  }
  std::ofstream out;
  if (!a.out.empty()) out = open_out(a.out);
  ordered_json per = ordered_json::object();
  bool flagged = false;
  bool header = true;
  for (int w : targets) {
    const MonitorTrace t =
        a.mode == "conditional" ? position_monitor_conditional(m, d, w) : position_monitor_marginal(m, d, w);
    if (out.is_open()) {
      std::ostringstream ss;
      write_trace_csv(ss, t);
      std::string text = ss.str();
      if (!header) text = text.substr(text.find('\n') + 1);
      out << text;
      header = false;
    }
    per["w" + std::to_string(w)] = trace_summary(t);
    flagged = flagged || t.flagged();
  }
  ordered_json j;
  j["command"] = "monitor position";
  j["data"] = provenance_json(d);
  j["mode"] = a.mode;
  j["positions"] = std::move(per);
  emit_summary(a.data, j);
  return flagged ? kExitFlagged : 0;
}

int stage_from_path(const CegModel& m, const std::string& path) {
  return m.staging().stage_of(situation_of(m.tree(), path));
}

int level_for_stage(const CegModel& m, int stage, const std::string& level) {
  const auto& var = m.tree().variables()[m.staging().stage(stage).cut];
  // Default level of interest: the last one.
  return level.empty() ? var.cardinality() - 1 : level_of(var, level);
}

int run_loo(const MonitorArgs& a) {
  const CegModel m = load_ceg_model(a.model, a.ess);
  const Dataset d = prepare(a.data, m.tree().variables());
  const int stage = stage_from_path(m, a.stage);
  const int level = level_for_stage(m, stage, a.level);
  const LooReport r = loo_situation_monitor(m, d, stage, level);
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    out << "stage,situation,n,Q,expected_prop,observed_prop\r\n";
    for (const auto& e : r.entries) {
      out << stage << ',' << csv_field(m.tree().path_id(e.situation)) << ',' << e.n << ',' << format_double(e.q) << ','
          << format_double(e.expected_prop) << ',' << format_double(e.observed_prop) << "\r\n";
    }
  }
  ordered_json j;
  j["command"] = "monitor situation-loo";
  j["data"] = provenance_json(d);
  j["stage"] = stage;
  j["level"] = m.tree().variables()[m.staging().stage(stage).cut].levels[level];
  j["skipped"] = r.skipped;
  ordered_json entries = ordered_json::array();
  for (const auto& e : r.entries) {
    ordered_json item;
    item["situation"] = m.tree().path_id(e.situation);
    item["n"] = e.n;
    item["Q"] = e.q;
    item["expected_prop"] = number(e.expected_prop);
    item["observed_prop"] = number(e.observed_prop);
    item["band"] = {number(e.lower), number(e.upper)};
    entries.push_back(std::move(item));
  }
  j["entries"] = std::move(entries);
  emit_summary(a.data, j);
  return 0;
}

int run_order(const MonitorArgs& a) {
  const CegModel m = load_ceg_model(a.model, a.ess);
  const Dataset d = prepare(a.data, m.tree().variables());
  const int stage = stage_from_path(m, a.stage);
  const int level = level_for_stage(m, stage, a.level);
  std::vector<int> ordering;
  if (a.ordering.empty()) {
    ordering = m.staging().stage(stage).situations;
  } else {
    for (const auto& p : split(a.ordering, ';')) ordering.push_back(situation_of(m.tree(), p));
  }
  const auto entries = situation_order_monitor(m, d, stage, ordering, level);
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    out << "stage,situation,order_index,n,k,prob,surprise\r\n";
    for (const auto& e : entries) {
      out << stage << ',' << csv_field(m.tree().path_id(e.situation)) << ',' << e.order_index << ',' << e.n << ','
          << e.k << ',' << format_double(e.prob) << ',' << format_double(e.surprise) << "\r\n";
    }
  }
  ordered_json j;
  j["command"] = "monitor situation-order";
  j["data"] = provenance_json(d);
  j["stage"] = stage;
  ordered_json probs = ordered_json::array();
  for (const auto& e : entries) probs.push_back(number(e.prob));
  j["probabilities"] = std::move(probs);
  emit_summary(a.data, j);
  return 0;
}

struct SampleArgs {
  std::string model;
  std::string fit_data;
  std::string out;
  long n = 0;
  std::uint64_t seed = 0;
  double ess = 3.0;
};

int run_sample(const SampleArgs& a) {
  const CegModel m = load_ceg_model(a.model, a.ess);
  StagedTree st = m.staged;
  if (!a.fit_data.empty()) st = with_posterior_means(m, load_csv(a.fit_data, m.tree().variables()));
  const Dataset d = sample_from_ceg(st, a.n, a.seed);
  auto out = open_out(a.out);
  d.write_csv(out);
  return 0;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("cegmon");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CEGMON_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Prequential diagnostics for chain event graphs and discrete Bayesian networks"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Greedy agglomerative staging search");
  add_data_options(fit_cmd, fit.data);
  fit_cmd->add_option("--variables", fit.variables, "JSON list of {name, levels}; default: inferred from the data");
  fit_cmd->add_option("--ess", fit.ess, "Equivalent sample size");
  fit_cmd->add_option("--out", fit.out, "Model JSON")->required();
  fit_cmd->add_option("--history", fit.history, "Merge history CSV");
  fit_cmd->add_flag("--pool-unpopulated", fit.pool, "Pool situations without data into a null stage per cut");

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Global monitor totals and Bayes factor");
  add_data_options(score_cmd, score.data);
  score_cmd->add_option("--model-a", score.model_a, "CEG or BN model JSON")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--model-b", score.model_b, "Second model")->check(CLI::ExistingFile);
  score_cmd->add_option("--trace-a", score.trace_a, "Trace CSV for model A");
  score_cmd->add_option("--trace-b", score.trace_b, "Trace CSV for model B");
  score_cmd->add_option("--ess", score.ess, "Equivalent sample size for models without priors");

  auto* monitor = app.add_subcommand("monitor", "Prequential monitors");
  monitor->require_subcommand(1);
  MonitorArgs mon;
  auto common = [&](CLI::App* c) {
    add_data_options(c, mon.data);
    c->add_option("--model", mon.model, "Model JSON")->required()->check(CLI::ExistingFile);
    c->add_option("--out", mon.out, "Trace CSV");
    c->add_option("--ess", mon.ess, "Equivalent sample size for models without priors");
  };
  auto* node_cmd = monitor->add_subcommand("node", "Marginal or conditional node monitor (BN)");
  common(node_cmd);
  node_cmd->add_option("--node", mon.node, "Variable to monitor")->required();
  node_cmd->add_option("--mode", mon.mode)->check(CLI::IsMember({"marginal", "conditional"}));
  auto* pc_cmd = monitor->add_subcommand("parent-child", "Parent-child monitor (BN)");
  common(pc_cmd);
  pc_cmd->add_option("--node", mon.node, "Child variable")->required();
  pc_cmd->add_option("--parents", mon.parents, "NAME=LEVEL,...")->required();
  auto* staging_cmd = monitor->add_subcommand("staging", "Staging monitor over Hasse neighbours of one cut (CEG)");
  common(staging_cmd);
  staging_cmd->add_option("--cut", mon.cut, "Variable whose cut is monitored")->required();
  staging_cmd->add_option("--candidates-out", mon.candidates_out, "Sidecar JSON listing candidate blocks");
  staging_cmd->add_option("--max-full-split", mon.max_full_split, "Largest block split in every way");
  auto* pos_cmd = monitor->add_subcommand("position", "Position monitors (CEG)");
  common(pos_cmd);
  pos_cmd->add_option("--position", mon.position, "w<id> or all");
  pos_cmd->add_option("--mode", mon.mode)->check(CLI::IsMember({"marginal", "conditional"}));
  auto* loo_cmd = monitor->add_subcommand("situation-loo", "Leave-one-out situation monitor (CEG)");
  common(loo_cmd);
  loo_cmd->add_option("--stage", mon.stage, "Path-id of any situation in the stage")->required();
  loo_cmd->add_option("--level", mon.level, "Level of interest; default: last");
  auto* order_cmd = monitor->add_subcommand("situation-order", "Ordered situation monitor (CEG)");
  common(order_cmd);
  order_cmd->add_option("--stage", mon.stage, "Path-id of any situation in the stage")->required();
  order_cmd->add_option("--level", mon.level, "Level of interest; default: last");
  order_cmd->add_option("--ordering", mon.ordering, "Member path-ids separated by ';'");

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Draw cases from a CEG");
  sample_cmd->add_option("--model", sample.model, "CEG model JSON")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--fit-data", sample.fit_data, "Use posterior means after this data")->check(CLI::ExistingFile);
  sample_cmd->add_option("--n", sample.n, "Number of cases")->required();
  sample_cmd->add_option("--seed", sample.seed, "Random seed")->required();
  sample_cmd->add_option("--out", sample.out, "Output CSV")->required();
  sample_cmd->add_option("--ess", sample.ess, "Equivalent sample size for models without priors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*score_cmd) return run_score(score);
    if (*sample_cmd) return run_sample(sample);
    if (*node_cmd) return run_node(mon);
    if (*pc_cmd) return run_parent_child(mon);
    if (*staging_cmd) return run_staging(mon);
    if (*pos_cmd) return run_position(mon);
    if (*loo_cmd) return run_loo(mon);
    if (*order_cmd) return run_order(mon);
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const ZeroProbabilityError& e) {
    spdlog::error("{}", e.what());
    return kExitFlagged;
  } catch (const CapacityError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  }
  return 0;
}
