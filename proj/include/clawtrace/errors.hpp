#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace clawtrace {

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedSessionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownModelError : std::runtime_error {
  explicit UnknownModelError(const std::string& model)
      : std::runtime_error("unknown model in pricing table: " + model),
        model(model) {}
  std::string model;
};

struct LinkageCycleError : std::runtime_error {
  explicit LinkageCycleError(std::vector<std::string> cycle_keys);
  std::vector<std::string> cycle;
};

struct PairingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by merge when the assembled skill document violates post-checks.
struct PostCheckFailure : std::runtime_error {
  explicit PostCheckFailure(std::vector<std::string> violation_list);
  std::vector<std::string> violations;
};

}  // namespace clawtrace
