#ifndef CEGMON_MODEL_IO_HPP
#define CEGMON_MODEL_IO_HPP

#include "cegmon/bn.hpp"
#include "cegmon/ceg_model.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace cegmon {

// CEG model document:
//   {"variables": [{"name", "levels"}...],
//    "staging": [[[path-id...] per stage] per cut],
//    "null_stage": [path-id...],                      optional
//    "priors": [[[alpha...] per stage] per cut],      null stage last in its cut
//    "probabilities": same shape as priors}           optional
// Stages within a cut are listed by smallest member. Unknown keys are rejected.

/// Missing `priors` fall back to the reference prior with `ess`.
CegModel parse_ceg_model(const std::string& text, double ess = 3.0);
CegModel load_ceg_model(const std::filesystem::path& path, double ess = 3.0);
/// Canonical form: fixed key order, two-space indent, trailing newline.
std::string serialize_ceg_model(const CegModel& model);

// BN model document:
//   {"variables": [...], "edges": [[parent, child]...], "ess": x}
// or with "priors": {node: [[alpha...] per parent configuration]} instead of
// "ess". Missing both means the reference prior with the caller's ess.
struct BnModel {
  DiscreteBN bn;
  std::optional<double> ess;
};

BnModel parse_bn_model(const std::string& text, double ess = 3.0);
BnModel load_bn_model(const std::filesystem::path& path, double ess = 3.0);
std::string serialize_bn_model(const BnModel& model);

/// Reads a whole file; throws InputError(Io) when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cegmon

#endif  // CEGMON_MODEL_IO_HPP
