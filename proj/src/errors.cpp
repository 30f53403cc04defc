#include "clawtrace/errors.hpp"

#include <sstream>

namespace clawtrace {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::ostringstream os;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) os << sep;
    os << parts[i];
  }
  return os.str();
}

}  // namespace

LinkageCycleError::LinkageCycleError(std::vector<std::string> cycle_keys)
    : std::runtime_error("sub-agent linkage cycle: " + join(cycle_keys, " -> ")),
      cycle(std::move(cycle_keys)) {}

PostCheckFailure::PostCheckFailure(std::vector<std::string> violation_list)
    : std::runtime_error("skill document post-check failed: " +
                         join(violation_list, "; ")),
      violations(std::move(violation_list)) {}

}  // namespace clawtrace
