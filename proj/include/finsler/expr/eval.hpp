#pragma once

#include <array>
#include <cmath>
#include <string>

#include "finsler/error.hpp"
#include "finsler/expr/ast.hpp"
#include "finsler/expr/jet.hpp"

namespace finsler::expr {

/// Plain evaluation in double precision.
double evaluate(const ScalarField& field, const Point& point);

/// Value and all partial derivatives up to `order` (<= 4), exact up to
/// rounding. Throws DomainError where the field is undefined or, for
/// order >= 1, not smooth (sqrt at 0, abs at 0, ...).
Jet eval_jet(const ScalarField& field, const Point& point, int order);

/// Central-difference approximation of the same jet. Every differentiation
/// level uses a second-order central stencil of width `step`; evaluation
/// runs in binary128 so rounding stays far below the truncation error.
Jet fd_jet(const ScalarField& field, const Point& point, int order,
           double step);

/// |field(x, s*y) - s^degree * field(x, y)|.
double check_homogeneity(const ScalarField& field, double degree,
                         const Point& point, double scale);

/// Plain evaluation on an arbitrary floating type. The domain rules match
/// evaluate(): used with __float128 by the finite-difference oracle.
template <typename Real>
Real evaluate_as(const Node& n, const std::array<Real, kNumVars>& point);

namespace detail {

template <typename Real>
struct Math;

template <>
struct Math<double> {
  static double sqrt(double v) { return std::sqrt(v); }
  static double sin(double v) { return std::sin(v); }
  static double cos(double v) { return std::cos(v); }
  static double exp(double v) { return std::exp(v); }
  static double log(double v) { return std::log(v); }
  static double abs(double v) { return std::fabs(v); }
  static double pow(double a, double b) { return std::pow(a, b); }
  static bool finite(double v) { return std::isfinite(v); }
};

bool is_integer(double v);

[[noreturn]] void domain_fail(const Node& n, const std::string& reason);

}  // namespace detail

template <typename Real>
Real evaluate_as(const Node& n, const std::array<Real, kNumVars>& point) {
  using M = detail::Math<Real>;
  auto check = [&](Real v) {
    if (!M::finite(v)) detail::domain_fail(n, "non-finite result");
    return v;
  };
  switch (n.op) {
    case Op::kNumber: return Real(n.number);
    case Op::kVariable: return point[n.var];
    case Op::kNeg: return -evaluate_as<Real>(n.args[0], point);
    case Op::kAdd:
      return check(evaluate_as<Real>(n.args[0], point) +
                   evaluate_as<Real>(n.args[1], point));
    case Op::kSub:
      return check(evaluate_as<Real>(n.args[0], point) -
                   evaluate_as<Real>(n.args[1], point));
    case Op::kMul:
      return check(evaluate_as<Real>(n.args[0], point) *
                   evaluate_as<Real>(n.args[1], point));
    case Op::kDiv: {
      const Real den = evaluate_as<Real>(n.args[1], point);
      if (den == Real(0)) detail::domain_fail(n, "division by zero");
      return check(evaluate_as<Real>(n.args[0], point) / den);
    }
    case Op::kPow:
    case Op::kCall:
      break;
  }
  if (n.op == Op::kPow || n.func == Func::kPow) {
    const Real base = evaluate_as<Real>(n.args[0], point);
    const Real ex = evaluate_as<Real>(n.args[1], point);
    const bool integral = detail::is_integer(static_cast<double>(ex));
    if (base < Real(0) && !integral) {
      detail::domain_fail(n, "negative base with non-integer exponent");
    }
    if (base == Real(0) && ex < Real(0)) {
      detail::domain_fail(n, "zero base with negative exponent");
    }
    return check(M::pow(base, ex));
  }
  const Real u = evaluate_as<Real>(n.args[0], point);
  switch (n.func) {
    case Func::kSqrt:
      if (u < Real(0)) detail::domain_fail(n, "sqrt of a negative value");
      return M::sqrt(u);
    case Func::kSin: return M::sin(u);
    case Func::kCos: return M::cos(u);
    case Func::kExp: return check(M::exp(u));
    case Func::kLog:
      if (u <= Real(0)) detail::domain_fail(n, "log of a nonpositive value");
      return M::log(u);
    case Func::kAbs: return M::abs(u);
    case Func::kPow: break;
  }
  detail::domain_fail(n, "unsupported function");
}

}  // namespace finsler::expr
