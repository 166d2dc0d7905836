#pragma once

#include <stdexcept>
#include <string>

namespace dgmlab {

// Bad input: malformed measures, matrices, configs, mismatched grids.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failure while computing: non-finite states, CFL cap exceeded, LP breakdown.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested operation has no implementation for the given family/size.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace dgmlab
