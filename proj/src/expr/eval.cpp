#include "finsler/expr/eval.hpp"

#include <cmath>

namespace finsler::expr {
namespace detail {

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

void domain_fail(const Node& n, const std::string& reason) {
  throw DomainError(print(n), reason + " (offset " + std::to_string(n.offset) +
                                  ")");
}

}  // namespace detail

namespace {

bool has_variables(const Node& n) {
  if (n.op == Op::kVariable) return true;
  for (const auto& a : n.args) {
    if (has_variables(a)) return true;
  }
  return false;
}

Jet checked(const Node& n, Jet j) {
  for (double c : j.coefficients()) {
    if (!std::isfinite(c)) detail::domain_fail(n, "non-finite result");
  }
  return j;
}

// Taylor coefficients of u^p about u0 (u0 may be 0 only for p a
// nonnegative integer).
Jet power(const Node& n, const Jet& u, double p) {
  const double u0 = u.value();
  const bool integral = detail::is_integer(p);
  if (!integral && u0 <= 0.0) {
    detail::domain_fail(n, "non-integer power of a nonpositive value");
  }
  if (integral && p < 0.0 && u0 == 0.0) {
    detail::domain_fail(n, "negative power of zero");
  }
  const int order = u.order();
  std::array<double, kMaxOrder + 1> t{};
  t[0] = std::pow(u0, p);
  double binom = 1.0;
  for (int k = 1; k <= order; ++k) {
    binom *= (p - (k - 1)) / k;
    t[k] = binom == 0.0 ? 0.0 : binom * std::pow(u0, p - k);
  }
  return compose(u, std::span<const double>(t.data(), order + 1));
}

Jet eval_node(const Node& n, const Point& p, int order) {
  switch (n.op) {
    case Op::kNumber: return Jet(n.number, order);
    case Op::kVariable: return Jet::variable(n.var, p[n.var], order);
    case Op::kNeg: return -eval_node(n.args[0], p, order);
    case Op::kAdd:
      return checked(n, eval_node(n.args[0], p, order) +
                            eval_node(n.args[1], p, order));
    case Op::kSub:
      return checked(n, eval_node(n.args[0], p, order) -
                            eval_node(n.args[1], p, order));
    case Op::kMul:
      return checked(n, eval_node(n.args[0], p, order) *
                            eval_node(n.args[1], p, order));
    case Op::kDiv: {
      const Jet den = eval_node(n.args[1], p, order);
      if (den.value() == 0.0) detail::domain_fail(n, "division by zero");
      return checked(n, eval_node(n.args[0], p, order) / den);
    }
    case Op::kPow:
    case Op::kCall:
      break;
  }
  if (n.op == Op::kPow || n.func == Func::kPow) {
    const Jet base = eval_node(n.args[0], p, order);
    if (!has_variables(n.args[1])) {
      const double ex = evaluate_as<double>(n.args[1], p);
      return checked(n, power(n, base, ex));
    }
    if (base.value() <= 0.0) {
      detail::domain_fail(n, "variable exponent needs a positive base");
    }
    const Jet ex = eval_node(n.args[1], p, order);
    std::array<double, kMaxOrder + 1> t{};
    const double l0 = std::log(base.value());
    t[0] = l0;
    double inv = 1.0;
    for (int k = 1; k <= order; ++k) {
      inv /= base.value();
      t[k] = ((k % 2 == 1) ? 1.0 : -1.0) * inv / k;
    }
    const Jet log_base = compose(base, std::span<const double>(t.data(), order + 1));
    const Jet w = ex * log_base;
    const double e0 = std::exp(w.value());
    for (int k = 0; k <= order; ++k) {
      double f = 1.0;
      for (int i = 2; i <= k; ++i) f *= i;
      t[k] = e0 / f;
    }
    Jet out = compose(w, std::span<const double>(t.data(), order + 1));
    out.coefficients()[0] = std::pow(base.value(), ex.value());
    return checked(n, std::move(out));
  }

  const Jet u = eval_node(n.args[0], p, order);
  const double u0 = u.value();
  std::array<double, kMaxOrder + 1> t{};
  const auto series = [&] { return std::span<const double>(t.data(), order + 1); };
  switch (n.func) {
    case Func::kSqrt: {
      if (u0 <= 0.0) detail::domain_fail(n, "sqrt needs a positive argument");
      t[0] = std::sqrt(u0);
      for (int k = 1; k <= order; ++k) t[k] = t[k - 1] * (1.5 - k) / (k * u0);
      return checked(n, compose(u, series()));
    }
    case Func::kSin:
    case Func::kCos: {
      const double s = std::sin(u0);
      const double c = std::cos(u0);
      // Derivative cycle of sin: s, c, -s, -c; cos starts one step later.
      const double cyc[4] = {s, c, -s, -c};
      const int shift = n.func == Func::kSin ? 0 : 1;
      double f = 1.0;
      for (int k = 0; k <= order; ++k) {
        if (k > 0) f *= k;
        t[k] = cyc[(k + shift) % 4] / f;
      }
      return checked(n, compose(u, series()));
    }
    case Func::kExp: {
      const double e0 = std::exp(u0);
      double f = 1.0;
      for (int k = 0; k <= order; ++k) {
        if (k > 0) f *= k;
        t[k] = e0 / f;
      }
      return checked(n, compose(u, series()));
    }
    case Func::kLog: {
      if (u0 <= 0.0) detail::domain_fail(n, "log of a nonpositive value");
      t[0] = std::log(u0);
      double inv = 1.0;
      for (int k = 1; k <= order; ++k) {
        inv /= u0;
        t[k] = ((k % 2 == 1) ? 1.0 : -1.0) * inv / k;
      }
      return checked(n, compose(u, series()));
    }
    case Func::kAbs: {
      if (u0 == 0.0) detail::domain_fail(n, "abs is not differentiable at 0");
      return u0 > 0.0 ? u : -u;
    }
    case Func::kPow: break;
  }
  detail::domain_fail(n, "unsupported function");
}

}  // namespace

double evaluate(const ScalarField& field, const Point& point) {
  return evaluate_as<double>(field.root(), point);
}

Jet eval_jet(const ScalarField& field, const Point& point, int order) {
  if (order < 0 || order > kMaxOrder) {
    throw Error(ErrorKind::kInvalidArgument, "jet order must be in [0, 4]");
  }
  if (order == 0) return Jet(evaluate(field, point), 0);
  return eval_node(field.root(), point, order);
}

double check_homogeneity(const ScalarField& field, double degree,
                         const Point& point, double scale) {
  Point scaled = point;
  for (int a = 0; a < 4; ++a) scaled[yvar(a)] *= scale;
  const double base = evaluate(field, point);
  const double moved = evaluate(field, scaled);
  return std::fabs(moved - std::pow(scale, degree) * base);
}

}  // namespace finsler::expr
