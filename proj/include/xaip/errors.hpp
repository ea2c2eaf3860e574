#pragma once

#include <stdexcept>
#include <string>

namespace xaip {

/// Invalid configuration value; the message names the violated bound.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A transition was requested on a damaged or finished episode.
class TerminalStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed decision tree (dangling child, unknown node id, cycles).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be decoded (bad JSON document, wrong schema id).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xaip
