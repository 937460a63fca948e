#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "finsler/expr/jet.hpp"

namespace finsler {

inline constexpr int kDim = 4;

using Vec4 = std::array<double, kDim>;
using Mat4 = std::array<Vec4, kDim>;
/// Rank-3 array indexed [i][j][k].
using Tensor3 = std::array<Mat4, kDim>;

using JetVec4 = std::array<expr::Jet, kDim>;
using JetMat4 = std::array<JetVec4, kDim>;
using JetTensor3 = std::array<JetMat4, kDim>;

inline double value_of(double v) { return v; }
inline double value_of(const expr::Jet& j) { return j.value(); }

inline Vec4 values(const JetVec4& v) {
  Vec4 out{};
  for (int i = 0; i < kDim; ++i) out[i] = v[i].value();
  return out;
}

inline Mat4 values(const JetMat4& m) {
  Mat4 out{};
  for (int i = 0; i < kDim; ++i) out[i] = values(m[i]);
  return out;
}

inline Tensor3 values(const JetTensor3& t) {
  Tensor3 out{};
  for (int i = 0; i < kDim; ++i) out[i] = values(t[i]);
  return out;
}

inline Mat4 identity4() {
  Mat4 m{};
  for (int i = 0; i < kDim; ++i) m[i][i] = 1.0;
  return m;
}

inline Vec4 mat_vec(const Mat4& m, const Vec4& v) {
  Vec4 out{};
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) out[i] += m[i][j] * v[j];
  }
  return out;
}

inline Mat4 mat_mul(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int i = 0; i < kDim; ++i) {
    for (int k = 0; k < kDim; ++k) {
      for (int j = 0; j < kDim; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

inline double dot(const Vec4& a, const Vec4& b) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const Vec4& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::fabs(e));
  return m;
}

inline double max_abs(const Mat4& a) {
  double m = 0.0;
  for (const auto& r : a) m = std::max(m, max_abs(r));
  return m;
}

inline double max_abs(const Tensor3& t) {
  double m = 0.0;
  for (const auto& s : t) m = std::max(m, max_abs(s));
  return m;
}

/// LU factorization with partial pivoting (pivot choice by value), usable
/// on doubles and on jets. Returns false if a pivot is exactly zero.
template <typename T>
struct Lu {
  std::array<std::array<T, kDim>, kDim> lu;
  std::array<int, kDim> perm{};
  int sign = 1;
  bool ok = true;

  explicit Lu(std::array<std::array<T, kDim>, kDim> m) : lu(std::move(m)) {
    for (int i = 0; i < kDim; ++i) perm[i] = i;
    for (int col = 0; col < kDim; ++col) {
      int piv = col;
      for (int r = col + 1; r < kDim; ++r) {
        if (std::fabs(value_of(lu[r][col])) > std::fabs(value_of(lu[piv][col]))) {
          piv = r;
        }
      }
      if (value_of(lu[piv][col]) == 0.0) {
        ok = false;
        return;
      }
      if (piv != col) {
        std::swap(lu[piv], lu[col]);
        std::swap(perm[piv], perm[col]);
        sign = -sign;
      }
      for (int r = col + 1; r < kDim; ++r) {
        T factor = lu[r][col] / lu[col][col];
        for (int c = col + 1; c < kDim; ++c) lu[r][c] -= factor * lu[col][c];
        lu[r][col] = std::move(factor);
      }
    }
  }

  T determinant() const {
    T d = lu[0][0];
    for (int i = 1; i < kDim; ++i) d = d * lu[i][i];
    if (sign < 0) d = -d;
    return d;
  }

  std::array<T, kDim> solve(const std::array<T, kDim>& b) const {
    std::array<T, kDim> x;
    for (int i = 0; i < kDim; ++i) {
      T s = b[perm[i]];
      for (int j = 0; j < i; ++j) s -= lu[i][j] * x[j];
      x[i] = s;
    }
    for (int i = kDim - 1; i >= 0; --i) {
      T s = x[i];
      for (int j = i + 1; j < kDim; ++j) s -= lu[i][j] * x[j];
      x[i] = s / lu[i][i];
    }
    return x;
  }

  /// Inverse, built column by column from unit right-hand sides shaped
  /// like `zero` and `one` (which carry the jet order).
  std::array<std::array<T, kDim>, kDim> inverse(const T& zero,
                                                const T& one) const {
    std::array<std::array<T, kDim>, kDim> inv;
    for (int c = 0; c < kDim; ++c) {
      std::array<T, kDim> e;
      for (int r = 0; r < kDim; ++r) e[r] = r == c ? one : zero;
      const auto col = solve(e);
      for (int r = 0; r < kDim; ++r) inv[r][c] = col[r];
    }
    return inv;
  }
};

}  // namespace finsler
