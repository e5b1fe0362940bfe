#ifndef CEGMON_ERROR_HPP
#define CEGMON_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cegmon {

// Bad user input: malformed files, unknown names, invalid structures.
class InputError : public std::runtime_error {
 public:
  enum class Kind {
    InvalidArgument,
    InvalidModel,
    UnknownVariable,
    UnknownLevel,
    MissingColumn,
    EmptyFile,
    Io,
  };

  InputError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// Evidence or observations that have probability zero under the model.
class ZeroProbabilityError : public std::runtime_error {
 public:
  ZeroProbabilityError(int blocked_cut, const std::string& what)
      : std::runtime_error(what), blocked_cut_(blocked_cut) {}

  int blocked_cut() const noexcept { return blocked_cut_; }

 private:
  int blocked_cut_;
};

// A computation that would exceed a configured size cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cegmon

#endif  // CEGMON_ERROR_HPP
