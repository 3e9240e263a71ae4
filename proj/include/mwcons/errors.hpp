#pragma once

#include <stdexcept>
#include <string>

namespace mwcons {

/// An edge weight whose eigenvalues straddle zero beyond tolerance. Such
/// weights have no sign/magnitude decomposition and cannot enter a network.
class IndefiniteWeightError : public std::runtime_error {
public:
  explicit IndefiniteWeightError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Scenario text that does not conform to the file grammar.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// A grammatically valid scenario that violates a semantic requirement
/// (imbalanced network, missing leader data, parameter constraint, ...).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A state or auxiliary variable became NaN/Inf during integration.
class NonFiniteStateError : public std::runtime_error {
public:
  explicit NonFiniteStateError(const std::string& what)
      : std::runtime_error(what) {}
};

/// The per-agent event rate exceeded the configured runaway threshold.
class ZenoGuardError : public std::runtime_error {
public:
  explicit ZenoGuardError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A plot was requested for a record that has no data of that kind.
class EmptySeriesError : public std::runtime_error {
public:
  explicit EmptySeriesError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace mwcons
