#pragma once

#include <stdexcept>
#include <string>

namespace rgarch {

/// Invalid user input: malformed data, inconsistent shapes, parameters
/// outside their domain.  CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative routine (optimizer, EM loop) exhausted its budget without
/// meeting its stopping rule.  CLI maps this to exit code 3.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rgarch
