#pragma once

#include <stdexcept>
#include <string>

namespace addax {

// Invalid run/problem configuration (bad partition, unknown key, ...).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced a non-finite value. Carries enough context to
// locate the offending step or evaluation.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what, long step = -1)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace addax
