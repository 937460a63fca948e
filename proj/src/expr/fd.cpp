// Finite-difference jet oracle. Independent of the Taylor-jet engine: it
// only uses plain pointwise evaluation, carried out in binary128.

#include <quadmath.h>

#include <cstdint>
#include <unordered_map>

#include "finsler/expr/eval.hpp"

namespace finsler::expr {
namespace detail {

template <>
struct Math<__float128> {
  using Q = __float128;
  static Q sqrt(Q v) { return sqrtq(v); }
  static Q sin(Q v) { return sinq(v); }
  static Q cos(Q v) { return cosq(v); }
  static Q exp(Q v) { return expq(v); }
  static Q log(Q v) { return logq(v); }
  static Q abs(Q v) { return fabsq(v); }
  static Q pow(Q a, Q b) { return powq(a, b); }
  static bool finite(Q v) { return finiteq(v) != 0; }
};

}  // namespace detail

namespace {

using Quad = __float128;

struct Stencil {
  int size;
  int offsets[5];
  double weights[5];
};

// Second-order central stencils for d^m/dz^m, m = 0..4, in units of step^-m.
constexpr Stencil kStencils[kMaxOrder + 1] = {
    {1, {0}, {1.0}},
    {2, {-1, 1}, {-0.5, 0.5}},
    {3, {-1, 0, 1}, {1.0, -2.0, 1.0}},
    {4, {-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
    {5, {-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
};

class Sampler {
 public:
  Sampler(const Node& root, const Point& point, double step)
      : root_(root), step_(step) {
    for (int v = 0; v < kNumVars; ++v) base_[v] = point[v];
  }

  Quad at(const std::array<int, kNumVars>& offset) {
    std::uint32_t key = 0;
    for (int v = 0; v < kNumVars; ++v) {
      key = key * 5u + static_cast<std::uint32_t>(offset[v] + 2);
    }
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::array<Quad, kNumVars> p = base_;
    for (int v = 0; v < kNumVars; ++v) p[v] += Quad(offset[v]) * Quad(step_);
    const Quad value = evaluate_as<Quad>(root_, p);
    cache_.emplace(key, value);
    return value;
  }

 private:
  const Node& root_;
  double step_;
  std::array<Quad, kNumVars> base_{};
  std::unordered_map<std::uint32_t, Quad> cache_;
};

// Tensor-product stencil sum over the variables with nonzero order.
Quad stencil_sum(Sampler& s, const MultiIndex& alpha, int var,
                 std::array<int, kNumVars>& offset) {
  if (var == kNumVars) return s.at(offset);
  const Stencil& st = kStencils[alpha[var]];
  Quad sum = 0;
  for (int i = 0; i < st.size; ++i) {
    offset[var] = st.offsets[i];
    sum += Quad(st.weights[i]) * stencil_sum(s, alpha, var + 1, offset);
  }
  offset[var] = 0;
  return sum;
}

}  // namespace

Jet fd_jet(const ScalarField& field, const Point& point, int order,
           double step) {
  if (order < 0 || order > kMaxOrder) {
    throw Error(ErrorKind::kInvalidArgument, "jet order must be in [0, 4]");
  }
  if (!(step > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "fd step must be positive");
  }
  Sampler sampler(field.root(), point, step);
  Jet out(0.0, order);
  auto coeffs = out.coefficients();
  const Quad h = step;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    const MultiIndex& alpha = monomial(n);
    std::array<int, kNumVars> offset{};
    Quad d = stencil_sum(sampler, alpha, 0, offset);
    Quad scale = 1;
    for (auto e : alpha) {
      for (int k = 0; k < e; ++k) d /= h;
      for (int k = 2; k <= e; ++k) scale *= k;
    }
    coeffs[n] = static_cast<double>(d / scale);
  }
  return out;
}

}  // namespace finsler::expr
