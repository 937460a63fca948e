#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "finsler/expr/ast.hpp"

namespace finsler::expr {

inline constexpr int kMaxOrder = 4;

using MultiIndex = std::array<std::uint8_t, kNumVars>;

int total_degree(const MultiIndex& alpha);

/// Truncated multivariate Taylor expansion in the eight variables
/// (x0..x3, y0..y3) about a point, up to a total order <= 4.
///
/// Coefficients are stored for every monomial of degree <= order in graded
/// order, so a jet of lower order is a prefix of one of higher order. The
/// partial derivative for multi-index alpha is alpha! times the coefficient,
/// which makes mixed partials symmetric by construction.
///
/// Arithmetic between jets of different order truncates to the smaller one.
class Jet {
 public:
  Jet() : Jet(0.0, 0) {}
  Jet(double value, int order);

  static Jet constant(double value, int order) { return Jet(value, order); }
  static Jet variable(int var, double value, int order);

  int order() const { return order_; }
  double value() const { return c_[0]; }

  std::span<const double> coefficients() const { return c_; }
  std::span<double> coefficients() { return c_; }

  /// d^|alpha| f / dz^alpha; zero beyond the stored order is not implied,
  /// requesting it throws std::out_of_range.
  double partial(const MultiIndex& alpha) const;
  /// Partial along a list of variable indices, e.g. {yvar(0), yvar(1)}.
  double partial(std::initializer_list<int> vars) const;

  /// All partial derivatives with their multi-indices, graded order.
  std::vector<std::pair<MultiIndex, double>> partials() const;

  /// Exact derivative with respect to one variable; order drops by one.
  Jet derivative(int var) const;
  Jet truncated(int order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }

 private:
  int order_;
  std::vector<double> c_;
};

/// f(u) for a univariate f given its Taylor coefficients at u.value():
/// taylor[n] = f^(n)(u0) / n!, n = 0..u.order().
Jet compose(const Jet& u, std::span<const double> taylor);

/// Number of monomials with total degree <= order in eight variables.
std::size_t monomial_count(int order);
const MultiIndex& monomial(std::size_t index);
std::size_t monomial_index(const MultiIndex& alpha);

}  // namespace finsler::expr
