#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gsd {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension_error"; }
};

/// A parameter lies outside the domain an operation accepts.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

/// A node has zero degree where a normalized operator needs a positive one.
class IsolatedNodeError : public Error {
 public:
  IsolatedNodeError(std::int64_t node, const std::string& context)
      : Error(context + ": node " + std::to_string(node) + " is isolated (degree 0)"),
        node_(node) {}
  std::int64_t node() const noexcept { return node_; }
  const char* kind() const noexcept override { return "isolated_node"; }

 private:
  std::int64_t node_;
};

/// A dense solve or factorization failed.
class SolverError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "solver_error"; }
};

/// A statistic is undefined for the supplied data (e.g. constant input).
class DegenerateError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate"; }
};

/// Malformed input file, with the offending line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::int64_t line, const std::string& what)
      : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::int64_t line() const noexcept { return line_; }
  const char* kind() const noexcept override { return "parse_error"; }

 private:
  std::int64_t line_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }
  const char* kind() const noexcept override { return "divergence"; }

 private:
  int epoch_;
};

}  // namespace gsd
