#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "finsler/expr/ast.hpp"
#include "finsler/expr/jet.hpp"
#include "finsler/tensor.hpp"

namespace finsler::geometry {

/// Metric inertia (counts of positive and negative eigenvalues).
struct Signature {
  int plus = 1;
  int minus = 3;

  /// Accepts strings such as "+---" or "(+,-,-,-)".
  static Signature parse(const std::string& text);
  std::string to_string() const;
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// The pair (F, L1) with particle and coupling constants: a whole scene's
/// geometry and field in one immutable value.
struct SpaceDef {
  expr::ScalarField F;
  /// Generator of the direction-dependent potential; zero field for vacuum.
  expr::ScalarField L1;
  double q = 1.0;
  double c = 1.0;
  /// Fibre unit constant, u = y / H.
  double H = 1.0;
  /// beta / (4 alpha).
  double coupling = 1.0;
  Signature signature;

  double charge_ratio() const { return q / c; }
};

expr::Point make_point(const Vec4& x, const Vec4& y);

inline constexpr double kDegenerateDet = 1e-12;

/// Null-cone guard used when drawing samples: F^2 >= 1e-3 |y|^2.
inline constexpr double kAdmissibleRatio = 1e-3;

bool admissible(const SpaceDef& space, const Vec4& x, const Vec4& y);

/// Jet-valued geometric tower at one point (x, y).
///
/// With F^2 expanded to order n the members carry these orders:
/// g, g_inv, sqrtG, G: n-2; N, L: n-3; R, N_trace_dot: n-4. Members whose
/// order would be negative are left empty (has_connection / has_curvature).
struct GeometryJets {
  int order = 0;
  Vec4 x{};
  Vec4 y{};
  expr::Jet F;
  expr::Jet F2;
  JetVec4 y_coord;
  JetMat4 g;
  JetMat4 g_inv;
  expr::Jet det_g;
  expr::Jet sqrtG;
  /// y_i = (1/2) d(F^2)/dy^i
  JetVec4 y_lower;
  JetVec4 G;
  /// N[i][j] = N^i_j
  JetMat4 N;
  /// L[i][j][k] = L^i_jk
  JetTensor3 L;
  /// R[a][j][k] = R^a_jk
  JetTensor3 R;
  /// N_trace_dot[j] = dN^a_j / dy^a
  JetVec4 N_trace_dot;

  bool has_connection() const { return order >= 3; }
  bool has_curvature() const { return order >= 4; }

  /// delta_i f = f_{,i} - N^a_i f_{.a}; the result has order
  /// min(f.order() - 1, order - 3).
  JetVec4 delta(const expr::Jet& f) const;
  /// Vertical derivative d f / dy^a.
  static JetVec4 vertical(const expr::Jet& f);
};

/// Builds the tower with F^2 expanded to `order` (2..4). Throws
/// DegenerateMetric, SignatureMismatch or DomainError.
GeometryJets build_geometry(const SpaceDef& space, const Vec4& x, const Vec4& y,
                            int order);

struct MetricSample {
  Mat4 g{};
  Mat4 g_inv{};
  double F_value = 0.0;
};

struct ConnectionSample {
  Mat4 N{};
  Vec4 N_trace_dot{};
};

struct GeometrySample {
  Vec4 x{};
  Vec4 y{};
  Mat4 g{};
  Mat4 g_inv{};
  double F_value = 0.0;
  Vec4 G_spray{};
  Mat4 N{};
  Tensor3 L_chern{};
  Tensor3 R_curv{};
  double sqrtG = 0.0;
  Vec4 N_trace_dot{};
};

GeometrySample to_sample(const GeometryJets& jets);

MetricSample metric(const SpaceDef& space, const Vec4& x, const Vec4& y);
Vec4 spray(const SpaceDef& space, const Vec4& x, const Vec4& y);
ConnectionSample nonlinear_connection(const SpaceDef& space, const Vec4& x,
                                      const Vec4& y);
Vec4 adapted_derivative(const SpaceDef& space, const expr::ScalarField& f,
                        const Vec4& x, const Vec4& y);
Tensor3 chern(const SpaceDef& space, const Vec4& x, const Vec4& y);
Tensor3 curvature(const SpaceDef& space, const Vec4& x, const Vec4& y);
GeometrySample sample_geometry(const SpaceDef& space, const Vec4& x,
                               const Vec4& y);

/// Components (V^i, Vtilde^a) of a vector field on TM in the adapted frame
/// V = V^i delta_i + Vtilde^a d/dy^a.
struct TMVectorField {
  std::array<expr::ScalarField, kDim> horizontal;
  std::array<expr::ScalarField, kDim> vertical;
};

/// A TM vector field known only pointwise: returns (V^0..V^3, Vt^0..Vt^3).
using SampledTMField =
    std::function<std::array<double, 2 * kDim>(const Vec4& x, const Vec4& y)>;

/// div V = (1/sqrtG) delta_i(V^i sqrtG) - N^a_{i.a} V^i
///         + (1/sqrtG) (Vt^a sqrtG)_{.a}, from exact jets.
double divergence(const SpaceDef& space, const TMVectorField& V, const Vec4& x,
                  const Vec4& y);

/// Same formula with the outer derivatives of V taken by central
/// differences of width `step` in every one of the eight coordinates.
double divergence_fd(const SpaceDef& space, const SampledTMField& V,
                     const Vec4& x, const Vec4& y, double step);

}  // namespace finsler::geometry
