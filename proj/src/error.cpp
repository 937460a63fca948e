#include "finsler/error.hpp"

#include <cmath>
#include <cstdio>

namespace finsler {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSyntax: return "SyntaxError";
    case ErrorKind::kUnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::kDomain: return "DomainError";
    case ErrorKind::kDegenerateMetric: return "DegenerateMetric";
    case ErrorKind::kSignatureMismatch: return "SignatureMismatch";
    case ErrorKind::kSingularForceMatrix: return "SingularForceMatrix";
    case ErrorKind::kStepRejectionLimit: return "StepRejectionLimit";
    case ErrorKind::kIntegration: return "IntegrationError";
    case ErrorKind::kSceneParse: return "ParseError";
    case ErrorKind::kHomogeneityViolation: return "HomogeneityViolation";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

namespace {

std::string syntax_message(std::size_t offset,
                           const std::vector<std::string>& expected,
                           const std::string& found) {
  std::string msg = "syntax error at offset " + std::to_string(offset) +
                    ": expected ";
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i > 0) msg += i + 1 == expected.size() ? " or " : ", ";
    msg += expected[i];
  }
  msg += ", found " + found;
  return msg;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected,
                         const std::string& found)
    : Error(ErrorKind::kSyntax, syntax_message(offset, expected, found)),
      offset_(offset),
      expected_(std::move(expected)) {}

namespace {

std::string homogeneity_message(const std::string& field, double expected,
                                double measured, double residual) {
  char buf[256];
  if (std::isfinite(measured)) {
    std::snprintf(buf, sizeof buf,
                  "field %s is not %g-homogeneous in y (measured degree %.6g, "
                  "residual %.3e)",
                  field.c_str(), expected, measured, residual);
  } else {
    std::snprintf(buf, sizeof buf,
                  "field %s is not %g-homogeneous in y (residual %.3e)",
                  field.c_str(), expected, residual);
  }
  return buf;
}

}  // namespace

HomogeneityViolation::HomogeneityViolation(const std::string& field,
                                           double expected, double measured,
                                           double residual)
    : Error(ErrorKind::kHomogeneityViolation,
            homogeneity_message(field, expected, measured, residual)),
      field_(field),
      expected_(expected),
      measured_(measured),
      residual_(residual) {}

}  // namespace finsler
