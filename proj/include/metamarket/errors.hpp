#pragma once

#include <stdexcept>
#include <string>

namespace metamarket {

// Bad user input: malformed config, observation file, unknown key.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Linear solve failed its residual check.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

// A trace was requested on a subset the path never occupies.
class EmptyTraceError : public std::runtime_error {
 public:
  explicit EmptyTraceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace metamarket
