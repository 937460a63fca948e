#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace finsler {

enum class ErrorKind {
  kSyntax,
  kUnknownIdentifier,
  kDomain,
  kDegenerateMetric,
  kSignatureMismatch,
  kSingularForceMatrix,
  kStepRejectionLimit,
  kIntegration,
  kSceneParse,
  kHomogeneityViolation,
  kInvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Base of every error raised by the library. Sweeps catch this type and
/// tally the kind instead of aborting.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::vector<std::string> expected,
              const std::string& found);
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept {
    return expected_;
  }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::size_t offset, const std::string& name)
      : Error(ErrorKind::kUnknownIdentifier,
              "unknown identifier '" + name + "' at offset " +
                  std::to_string(offset)),
        offset_(offset),
        name_(name) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::size_t offset_;
  std::string name_;
};

/// Raised when a function is evaluated outside the set where it is defined
/// (or, for derivative jets, outside the set where it is smooth).
class DomainError : public Error {
 public:
  DomainError(const std::string& subexpression, const std::string& reason)
      : Error(ErrorKind::kDomain,
              "domain error in '" + subexpression + "': " + reason),
        subexpression_(subexpression) {}
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

class DegenerateMetric : public Error {
 public:
  explicit DegenerateMetric(double det)
      : Error(ErrorKind::kDegenerateMetric,
              "degenerate metric: |det g| = " + std::to_string(det)),
        det_(det) {}
  double det() const noexcept { return det_; }

 private:
  double det_;
};

class SignatureMismatch : public Error {
 public:
  SignatureMismatch(const std::string& expected, const std::string& found)
      : Error(ErrorKind::kSignatureMismatch,
              "metric signature mismatch: expected " + expected + ", found " +
                  found) {}
};

class SingularForceMatrix : public Error {
 public:
  explicit SingularForceMatrix(double det)
      : Error(ErrorKind::kSingularForceMatrix,
              "force matrix I - (q/c) Ftilde is singular: |det| = " +
                  std::to_string(det)) {}
};

class SceneParseError : public Error {
 public:
  SceneParseError(std::size_t line, std::size_t column, const std::string& msg)
      : Error(ErrorKind::kSceneParse, "line " + std::to_string(line) +
                                          ", column " + std::to_string(column) +
                                          ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class HomogeneityViolation : public Error {
 public:
  /// `measured` is the degree estimated from the same two evaluations.
  HomogeneityViolation(const std::string& field, double expected,
                       double measured, double residual);
  const std::string& field() const noexcept { return field_; }
  double expected_degree() const noexcept { return expected_; }
  double measured_degree() const noexcept { return measured_; }
  double residual() const noexcept { return residual_; }

 private:
  std::string field_;
  double expected_;
  double measured_;
  double residual_;
};

}  // namespace finsler
