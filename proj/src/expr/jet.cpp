#include "finsler/expr/jet.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace finsler::expr {
namespace {

struct Triple {
  std::uint16_t i, j, k;
};

struct DerivEntry {
  std::uint16_t dst, src;
  double factor;
};

std::uint32_t pack(const MultiIndex& a) {
  std::uint32_t key = 0;
  for (int v = 0; v < kNumVars; ++v) key = key * 8u + a[v];
  return key;
}

struct Tables {
  std::vector<MultiIndex> monos;
  std::array<std::size_t, kMaxOrder + 1> count{};
  std::unordered_map<std::uint32_t, std::uint16_t> index;
  std::vector<Triple> triples;
  std::array<std::size_t, kMaxOrder + 1> triple_count{};
  std::vector<std::size_t> group_begin;  // per k, into triples; size+1
  std::array<std::vector<DerivEntry>, kNumVars> deriv;

  Tables() {
    // Graded enumeration: all multi-indices of degree d, for d = 0..max.
    for (int d = 0; d <= kMaxOrder; ++d) {
      MultiIndex a{};
      enumerate(a, 0, d);
      count[d] = monos.size();
    }
    for (std::size_t n = 0; n < monos.size(); ++n) {
      index.emplace(pack(monos[n]), static_cast<std::uint16_t>(n));
    }
    for (std::size_t i = 0; i < monos.size(); ++i) {
      for (std::size_t j = 0; j < monos.size(); ++j) {
        if (total_degree(monos[i]) + total_degree(monos[j]) > kMaxOrder) {
          continue;
        }
        MultiIndex s{};
        for (int v = 0; v < kNumVars; ++v) {
          s[v] = static_cast<std::uint8_t>(monos[i][v] + monos[j][v]);
        }
        triples.push_back({static_cast<std::uint16_t>(i),
                           static_cast<std::uint16_t>(j), index.at(pack(s))});
      }
    }
    std::stable_sort(triples.begin(), triples.end(),
                     [](const Triple& a, const Triple& b) { return a.k < b.k; });
    group_begin.assign(monos.size() + 1, 0);
    for (const auto& t : triples) ++group_begin[t.k + 1];
    for (std::size_t k = 0; k < monos.size(); ++k) {
      group_begin[k + 1] += group_begin[k];
    }
    for (int d = 0; d <= kMaxOrder; ++d) triple_count[d] = group_begin[count[d]];

    for (int v = 0; v < kNumVars; ++v) {
      for (std::size_t dst = 0; dst < count[kMaxOrder - 1]; ++dst) {
        MultiIndex a = monos[dst];
        const double factor = a[v] + 1.0;
        ++a[v];
        deriv[v].push_back({static_cast<std::uint16_t>(dst), index.at(pack(a)),
                            factor});
      }
    }
  }

  void enumerate(MultiIndex& a, int var, int remaining) {
    if (var == kNumVars - 1) {
      a[var] = static_cast<std::uint8_t>(remaining);
      monos.push_back(a);
      a[var] = 0;
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      a[var] = static_cast<std::uint8_t>(e);
      enumerate(a, var + 1, remaining - e);
    }
    a[var] = 0;
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

void check_order(int order) {
  if (order < 0 || order > kMaxOrder) {
    throw std::out_of_range("jet order must be in [0, 4]");
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

int total_degree(const MultiIndex& alpha) {
  int d = 0;
  for (auto e : alpha) d += e;
  return d;
}

std::size_t monomial_count(int order) {
  check_order(order);
  return tables().count[order];
}

const MultiIndex& monomial(std::size_t index) { return tables().monos.at(index); }

std::size_t monomial_index(const MultiIndex& alpha) {
  if (total_degree(alpha) > kMaxOrder) {
    throw std::out_of_range("multi-index degree exceeds the jet cap");
  }
  return tables().index.at(pack(alpha));
}

Jet::Jet(double value, int order) : order_(order) {
  check_order(order);
  c_.assign(tables().count[order], 0.0);
  c_[0] = value;
}

Jet Jet::variable(int var, double value, int order) {
  Jet j(value, order);
  if (order >= 1) j.c_[1 + var] = 1.0;  // degree-1 monomials follow the constant
  return j;
}

double Jet::partial(const MultiIndex& alpha) const {
  const int d = total_degree(alpha);
  if (d > order_) throw std::out_of_range("partial beyond jet order");
  double scale = 1.0;
  for (auto e : alpha) scale *= factorial(e);
  return scale * c_[monomial_index(alpha)];
}

double Jet::partial(std::initializer_list<int> vars) const {
  MultiIndex alpha{};
  for (int v : vars) ++alpha[v];
  return partial(alpha);
}

std::vector<std::pair<MultiIndex, double>> Jet::partials() const {
  std::vector<std::pair<MultiIndex, double>> out;
  out.reserve(c_.size());
  for (std::size_t n = 0; n < c_.size(); ++n) {
    const auto& alpha = tables().monos[n];
    double scale = 1.0;
    for (auto e : alpha) scale *= factorial(e);
    out.emplace_back(alpha, scale * c_[n]);
  }
  return out;
}

Jet Jet::derivative(int var) const {
  if (order_ == 0) throw std::out_of_range("derivative of an order-0 jet");
  Jet out(0.0, order_ - 1);
  const auto& entries = tables().deriv[var];
  const std::size_t n = out.c_.size();
  for (std::size_t e = 0; e < n; ++e) {
    out.c_[entries[e].dst] = entries[e].factor * c_[entries[e].src];
  }
  return out;
}

Jet Jet::truncated(int order) const {
  if (order > order_) throw std::out_of_range("cannot raise jet order");
  Jet out(0.0, order);
  std::copy_n(c_.begin(), out.c_.size(), out.c_.begin());
  return out;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (auto& v : out.c_) v = -v;
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t n = 0; n < c_.size(); ++n) c_[n] += o.c_[n];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t n = 0; n < c_.size(); ++n) c_[n] -= o.c_[n];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& v : c_) v *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  const int order = std::min(a.order_, b.order_);
  Jet out(0.0, order);
  const auto& t = tables();
  const std::size_t n = t.triple_count[order];
  const double* pa = a.c_.data();
  const double* pb = b.c_.data();
  double* po = out.c_.data();
  for (std::size_t e = 0; e < n; ++e) {
    const Triple& tr = t.triples[e];
    po[tr.k] += pa[tr.i] * pb[tr.j];
  }
  return out;
}

Jet operator/(const Jet& a, const Jet& b) {
  // Solve q * b = a degree by degree; q_0 = a_0 / b_0 exactly.
  const int order = std::min(a.order_, b.order_);
  Jet q(0.0, order);
  const auto& t = tables();
  const double b0 = b.c_[0];
  for (std::size_t k = 0; k < q.c_.size(); ++k) {
    double s = a.c_[k];
    for (std::size_t e = t.group_begin[k]; e < t.group_begin[k + 1]; ++e) {
      const Triple& tr = t.triples[e];
      if (tr.i != 0) s -= b.c_[tr.i] * q.c_[tr.j];
    }
    q.c_[k] = s / b0;
  }
  return q;
}

Jet compose(const Jet& u, std::span<const double> taylor) {
  // Horner in h = u - u0, which has no constant term, so the value
  // coefficient of the result is exactly taylor[0].
  const int order = u.order();
  Jet h = u;
  h.coefficients()[0] = 0.0;
  Jet out(taylor[order], order);
  for (int m = order - 1; m >= 0; --m) {
    out = out * h;
    out.coefficients()[0] += taylor[m];
  }
  return out;
}

}  // namespace finsler::expr
