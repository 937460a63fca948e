#pragma once

// Shared helpers for the test executables: fixture loading, seeded draws,
// comparison helpers and independent long-double oracles.

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "finsler/scene.hpp"
#include "finsler/tensor.hpp"

#ifndef FINSLER_SOURCE_DIR
#define FINSLER_SOURCE_DIR "."
#endif

namespace testing {

using finsler::kDim;
using finsler::Mat4;
using finsler::Tensor3;
using finsler::Vec4;

inline std::string scene_path(const std::string& name) {
  return std::string(FINSLER_SOURCE_DIR) + "/scenes/" + name + ".scene";
}

inline std::string fixture_path(const std::string& name) {
  return std::string(FINSLER_SOURCE_DIR) + "/tests/fixtures/" + name + ".scene";
}

inline finsler::scene::Scene load(const std::string& name) {
  return finsler::scene::load_scene(scene_path(name));
}

/// |a - b| <= tol * max(1, |b|)
inline bool close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b));
}

inline double worst(const Vec4& a, const Vec4& b) {
  double w = 0.0;
  for (int i = 0; i < kDim; ++i) {
    w = std::max(w, std::fabs(a[i] - b[i]) / std::max(1.0, std::fabs(b[i])));
  }
  return w;
}

inline double worst(const Mat4& a, const Mat4& b) {
  double w = 0.0;
  for (int i = 0; i < kDim; ++i) w = std::max(w, worst(a[i], b[i]));
  return w;
}

inline double worst(const Tensor3& a, const Tensor3& b) {
  double w = 0.0;
  for (int i = 0; i < kDim; ++i) w = std::max(w, worst(a[i], b[i]));
  return w;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(gen_);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

using Draw = finsler::scene::PointSampler::Draw;

inline std::vector<Draw> draws(const finsler::scene::Scene& s, int n,
                               std::uint64_t seed) {
  finsler::scene::PointSampler sampler(s.space, s.sampling, seed);
  std::vector<Draw> out;
  for (int i = 0; i < n; ++i) out.push_back(sampler.next());
  return out;
}

// Long-double oracles on plain C++ callables, independent of the jet
// engine and of the expression evaluator.

using LD = long double;
using X = std::array<LD, 4>;
using MetricFn = std::function<std::array<std::array<LD, 4>, 4>(const X&)>;
using ScalarFn = std::function<LD(const X&)>;

inline X shifted(X x, int k, LD h) {
  x[k] += h;
  return x;
}

/// Fourth-order central difference of f along coordinate k.
inline LD d(const ScalarFn& f, const X& x, int k, LD h = 1e-3L) {
  return (-f(shifted(x, k, 2 * h)) + 8 * f(shifted(x, k, h)) -
          8 * f(shifted(x, k, -h)) + f(shifted(x, k, -2 * h))) /
         (12 * h);
}

inline std::array<std::array<LD, 4>, 4> inverse(
    std::array<std::array<LD, 4>, 4> a) {
  std::array<std::array<LD, 4>, 4> inv{};
  for (int i = 0; i < 4; ++i) inv[i][i] = 1;
  for (int c = 0; c < 4; ++c) {
    int p = c;
    for (int r = c + 1; r < 4; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    }
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const LD piv = a[c][c];
    for (int k = 0; k < 4; ++k) {
      a[c][k] /= piv;
      inv[c][k] /= piv;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == c) continue;
      const LD f = a[r][c];
      for (int k = 0; k < 4; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

/// Christoffel symbols gamma[i][j][k] = gamma^i_jk of a metric a(x).
inline std::array<std::array<std::array<LD, 4>, 4>, 4> christoffel(
    const MetricFn& a, const X& x) {
  std::array<std::array<std::array<LD, 4>, 4>, 4> da{};  // da[k][i][j]
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        da[k][i][j] = d([&](const X& p) { return a(p)[i][j]; }, x, k);
      }
    }
  }
  const auto ai = inverse(a(x));
  std::array<std::array<std::array<LD, 4>, 4>, 4> g{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 4; ++k) {
        LD s = 0;
        for (int l = 0; l < 4; ++l) {
          s += ai[i][l] * (da[j][l][k] + da[k][l][j] - da[l][j][k]);
        }
        g[i][j][k] = s / 2;
      }
    }
  }
  return g;
}

/// Riemann tensor R[a][b][j][k] = R^a_bjk
///   = d_j gamma^a_kb - d_k gamma^a_jb + gamma^a_jm gamma^m_kb
///     - gamma^a_km gamma^m_jb.
inline std::array<std::array<std::array<std::array<LD, 4>, 4>, 4>, 4> riemann(
    const MetricFn& a, const X& x) {
  const auto g = christoffel(a, x);
  std::array<std::array<std::array<std::array<LD, 4>, 4>, 4>, 4> dg{};
  for (int j = 0; j < 4; ++j) {
    // Nested differences: inner step 1e-3, outer 1e-2 keeps rounding small.
    const auto plus2 = christoffel(a, shifted(x, j, 2e-2L));
    const auto plus1 = christoffel(a, shifted(x, j, 1e-2L));
    const auto minus1 = christoffel(a, shifted(x, j, -1e-2L));
    const auto minus2 = christoffel(a, shifted(x, j, -2e-2L));
    for (int i = 0; i < 4; ++i) {
      for (int b = 0; b < 4; ++b) {
        for (int k = 0; k < 4; ++k) {
          dg[j][i][b][k] = (-plus2[i][b][k] + 8 * plus1[i][b][k] -
                            8 * minus1[i][b][k] + minus2[i][b][k]) /
                           (12 * 1e-2L);
        }
      }
    }
  }
  std::array<std::array<std::array<std::array<LD, 4>, 4>, 4>, 4> R{};
  for (int A = 0; A < 4; ++A) {
    for (int b = 0; b < 4; ++b) {
      for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
          LD s = dg[j][A][k][b] - dg[k][A][j][b];
          for (int m = 0; m < 4; ++m) {
            s += g[A][j][m] * g[m][k][b] - g[A][k][m] * g[m][j][b];
          }
          R[A][b][j][k] = s;
        }
      }
    }
  }
  return R;
}

}  // namespace testing
