#include "cegmon/model_io.hpp"

#include "cegmon/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace cegmon {

using nlohmann::ordered_json;

namespace {

InputError bad(const std::string& what) { return InputError(InputError::Kind::InvalidModel, what); }

void reject_unknown(const ordered_json& doc, const std::set<std::string>& allowed) {
  if (!doc.is_object()) throw bad("model document must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) throw bad("unknown field '" + key + "'");
  }
}

ordered_json parse_document(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw bad(std::string("malformed JSON: ") + e.what());
  }
}

std::vector<VariableSpec> read_variables(const ordered_json& doc) {
  if (!doc.contains("variables")) throw bad("missing field 'variables'");
  std::vector<VariableSpec> vars;
  for (const auto& v : doc.at("variables")) {
    reject_unknown(v, {"name", "levels"});
    vars.push_back(VariableSpec{v.at("name").get<std::string>(), v.at("levels").get<std::vector<std::string>>()});
  }
  validate_variables(vars);
  return vars;
}

ordered_json write_variables(const std::vector<VariableSpec>& vars) {
  ordered_json out = ordered_json::array();
  for (const auto& v : vars) {
    ordered_json item;
    item["name"] = v.name;
    item["levels"] = v.levels;
    out.push_back(std::move(item));
  }
  return out;
}

Vector to_vector(const ordered_json& j) {
  const auto xs = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

ordered_json from_vector(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

int situation_by_path(const EventTree& tree, const std::string& path) {
  const int v = tree.find(path);
  if (v < 0 || !tree.is_situation(v)) throw bad("'" + path + "' is not a situation path-id");
  return v;
}

// Stages of one cut in file order: listed stages first, the null stage last.
std::vector<int> cut_stage_order(const Staging& staging, int cut) {
  std::vector<int> out;
  int null_stage = -1;
  for (int s : staging.stages_in_cut(cut)) {
    if (staging.stage(s).null) {
      null_stage = s;
    } else {
      out.push_back(s);
    }
  }
  if (null_stage >= 0) out.push_back(null_stage);
  return out;
}

template <typename F>
auto wrap_json_errors(F&& f) {
  try {
    return f();
  } catch (const ordered_json::exception& e) {
    throw bad(std::string("invalid model document: ") + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(InputError::Kind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CegModel parse_ceg_model(const std::string& text, double ess) {
  const ordered_json doc = parse_document(text);
  return wrap_json_errors([&] {
    reject_unknown(doc, {"variables", "staging", "null_stage", "priors", "probabilities"});
    EventTree tree = build_event_tree(read_variables(doc));
    if (!doc.contains("staging")) throw bad("missing field 'staging'");
    const auto& staging_doc = doc.at("staging");
    if (static_cast<int>(staging_doc.size()) != tree.num_cuts()) throw bad("'staging' needs one entry per cut");

    std::vector<Stage> stages;
    // (cut, position in file order) of each stage, to pair with priors.
    std::vector<std::vector<std::vector<int>>> listed(tree.num_cuts());
    for (int cut = 0; cut < tree.num_cuts(); ++cut) {
      for (const auto& block : staging_doc[cut]) {
        Stage st{cut, {}, false};
        for (const auto& p : block) st.situations.push_back(situation_by_path(tree, p.get<std::string>()));
        listed[cut].push_back(st.situations);
        stages.push_back(std::move(st));
      }
    }
    if (doc.contains("null_stage")) {
      std::vector<Stage> nulls(tree.num_cuts());
      for (const auto& p : doc.at("null_stage")) {
        const int v = situation_by_path(tree, p.get<std::string>());
        nulls[tree.vertex(v).depth].situations.push_back(v);
      }
      for (int cut = 0; cut < tree.num_cuts(); ++cut) {
        if (nulls[cut].situations.empty()) continue;
        nulls[cut].cut = cut;
        nulls[cut].null = true;
        listed[cut].push_back(nulls[cut].situations);
        stages.push_back(std::move(nulls[cut]));
      }
    }
    Staging staging(tree, std::move(stages));

    auto per_stage = [&](const char* key) {
      const auto& d = doc.at(key);
      if (static_cast<int>(d.size()) != tree.num_cuts()) throw bad(std::string("'") + key + "' needs one entry per cut");
      std::vector<Vector> out(staging.num_stages());
      for (int cut = 0; cut < tree.num_cuts(); ++cut) {
        if (d[cut].size() != listed[cut].size()) {
          throw bad(std::string("'") + key + "' needs one vector per stage of cut " + std::to_string(cut));
        }
        for (std::size_t b = 0; b < listed[cut].size(); ++b) {
          out[staging.stage_of(listed[cut][b].front())] = to_vector(d[cut][b]);
        }
      }
      return out;
    };

    CegModel model;
    model.priors = doc.contains("priors") ? per_stage("priors") : reference_stage_priors(tree, staging, ess);
    std::vector<Vector> theta;
    if (doc.contains("probabilities")) theta = per_stage("probabilities");
    model.staged = StagedTree{std::move(tree), std::move(staging), std::move(theta)};
    model.validate();
    return model;
  });
}

CegModel load_ceg_model(const std::filesystem::path& path, double ess) {
  return parse_ceg_model(read_text_file(path), ess);
}

std::string serialize_ceg_model(const CegModel& model) {
  const auto& tree = model.tree();
  const auto& staging = model.staging();
  ordered_json doc;
  doc["variables"] = write_variables(tree.variables());
  ordered_json stag = ordered_json::array();
  ordered_json nulls = ordered_json::array();
  ordered_json priors = ordered_json::array();
  ordered_json probs = ordered_json::array();
  for (int cut = 0; cut < tree.num_cuts(); ++cut) {
    ordered_json blocks = ordered_json::array();
    ordered_json pc = ordered_json::array();
    ordered_json qc = ordered_json::array();
    for (int s : cut_stage_order(staging, cut)) {
      ordered_json ids = ordered_json::array();
      for (int v : staging.stage(s).situations) ids.push_back(tree.path_id(v));
      if (staging.stage(s).null) {
        for (auto& id : ids) nulls.push_back(id);
      } else {
        blocks.push_back(std::move(ids));
      }
      pc.push_back(from_vector(model.priors[s]));
      if (model.staged.has_probabilities()) qc.push_back(from_vector(model.staged.theta[s]));
    }
    stag.push_back(std::move(blocks));
    priors.push_back(std::move(pc));
    probs.push_back(std::move(qc));
  }
  doc["staging"] = std::move(stag);
  if (!nulls.empty()) doc["null_stage"] = std::move(nulls);
  doc["priors"] = std::move(priors);
  if (model.staged.has_probabilities()) doc["probabilities"] = std::move(probs);
  return doc.dump(2) + "\n";
}

BnModel parse_bn_model(const std::string& text, double ess) {
  const ordered_json doc = parse_document(text);
  return wrap_json_errors([&] {
    reject_unknown(doc, {"variables", "edges", "ess", "priors"});
    auto vars = read_variables(doc);
    std::vector<std::pair<int, int>> edges;
    if (doc.contains("edges")) {
      for (const auto& e : doc.at("edges")) {
        if (e.size() != 2) throw bad("each edge is a [parent, child] pair");
        const int p = find_variable(vars, e[0].get<std::string>());
        const int c = find_variable(vars, e[1].get<std::string>());
        if (p < 0 || c < 0) {
          throw InputError(InputError::Kind::UnknownVariable,
                           "edge names an unknown variable: " + e.dump());
        }
        edges.emplace_back(p, c);
      }
    }
    if (doc.contains("ess") && doc.contains("priors")) throw bad("give either 'ess' or 'priors', not both");
    if (doc.contains("priors")) {
      const auto& pd = doc.at("priors");
      std::vector<std::vector<Vector>> priors(vars.size());
      for (const auto& [name, rows] : pd.items()) {
        const int node = find_variable(vars, name);
        if (node < 0) throw InputError(InputError::Kind::UnknownVariable, "priors name unknown variable '" + name + "'");
        for (const auto& r : rows) priors[node].push_back(to_vector(r));
      }
      for (std::size_t i = 0; i < vars.size(); ++i) {
        if (!pd.contains(vars[i].name)) throw bad("priors missing for '" + vars[i].name + "'");
      }
      return BnModel{DiscreteBN(std::move(vars), std::move(edges), priors), std::nullopt};
    }
    const double e = doc.contains("ess") ? doc.at("ess").get<double>() : ess;
    return BnModel{DiscreteBN(std::move(vars), std::move(edges), e), e};
  });
}

BnModel load_bn_model(const std::filesystem::path& path, double ess) {
  return parse_bn_model(read_text_file(path), ess);
}

std::string serialize_bn_model(const BnModel& model) {
  const auto& bn = model.bn;
  ordered_json doc;
  doc["variables"] = write_variables(bn.variables());
  ordered_json edges = ordered_json::array();
  for (const auto& [p, c] : bn.edges()) edges.push_back({bn.variables()[p].name, bn.variables()[c].name});
  doc["edges"] = std::move(edges);
  if (model.ess) {
    doc["ess"] = *model.ess;
  } else {
    ordered_json priors = ordered_json::object();
    const auto rows = bn.prior_rows();
    for (int i = 0; i < bn.num_nodes(); ++i) {
      ordered_json node = ordered_json::array();
      for (const auto& r : rows[i]) node.push_back(from_vector(r));
      priors[bn.variables()[i].name] = std::move(node);
    }
    doc["priors"] = std::move(priors);
  }
  return doc.dump(2) + "\n";
}

}  // namespace cegmon
