#pragma once

#include <string>

#include "clawtrace/tracecard.hpp"

namespace clawtrace {

struct YamlError : std::runtime_error {
  YamlError(const std::string& msg, int line, int col)
      : std::runtime_error("yaml:" + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line = 0;
  int col = 0;
};

// Deterministic card YAML: fixed key order, quoted free strings, bare
// enums, exact decimal costs, shortest round-trip doubles. Equal cards
// produce byte-identical output.
std::string emit_yaml(const TraceCard& card);

// Accepts the emitted form plus the compact style where several
// "key: value" pairs share a line separated by two or more spaces.
// Errors carry line and column.
TraceCard parse_yaml(const std::string& text);

// Shortest decimal rendering that parses back to the same double.
std::string format_double(double value);

}  // namespace clawtrace
