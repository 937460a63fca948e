#pragma once

#include "finsler/em.hpp"
#include "finsler/geometry.hpp"
#include "finsler/tensor.hpp"

namespace finsler::maxwell {

using geometry::SpaceDef;

/// Component residuals of dF = 0 in the adapted frame.
struct MaxwellResiduals {
  /// hhh[i][j][k] = F_{ij|k} + F_{ki|j} + F_{jk|i}
  ///              + R^b_jk Ft_ib + R^b_ki Ft_jb + R^b_ij Ft_kb
  Tensor3 hhh{};
  /// hhv[a][j][k] = Ft_{aj|k} + Ft_{ka|j} + F_{jk.a}
  Tensor3 hhv{};
  /// hvv[k][a][b] = Ft_{ka.b} + Ft_{bk.a}
  Tensor3 hvv{};
  double max_abs = 0.0;
};

struct CurrentSample {
  Vec4 x{};
  Vec4 y{};
  /// J^i
  Vec4 J_h{};
  /// Jtilde^a
  Vec4 J_v{};
  /// zeta^i = (1/sqrtG) (Ft^{ia} sqrtG)_{.a}, coupling independent
  Vec4 zeta{};
  /// (1/sqrtG) { (F^{ij} sqrtG)_{;j} - F^{ij} N^a_{j.a} sqrtG }
  Vec4 classical{};
  /// div J; only filled by continuity_residual / sample_currents.
  double continuity = 0.0;
};

/// Outer step used for the divergence of the current field.
inline constexpr double kContinuityStep = 1e-3;

/// Everything at one point from a single F^2 order-4 / L1 order-3 tower.
/// Points are taken in fibre units u = y / H.
struct FieldPoint {
  geometry::GeometryJets geo;
  em::EMJets em;
};

FieldPoint build_field_point(const SpaceDef& space, const Vec4& x,
                             const Vec4& y);

MaxwellResiduals homogeneous_residuals(const SpaceDef& space, const Vec4& x,
                                       const Vec4& y);
MaxwellResiduals homogeneous_residuals(const FieldPoint& p);

struct HorizontalCurrent {
  Vec4 J_h{};
  Vec4 zeta{};
  Vec4 classical{};
};

HorizontalCurrent horizontal_current(const SpaceDef& space, const Vec4& x,
                                     const Vec4& y);
Vec4 vertical_current(const SpaceDef& space, const Vec4& x, const Vec4& y);

/// J^i and Jtilde^a at one point without the continuity residual.
CurrentSample currents(const SpaceDef& space, const Vec4& x, const Vec4& y);
CurrentSample currents(const SpaceDef& space, const FieldPoint& p);

/// div J for J = (J^i, Jtilde^a), via geometry::divergence_fd.
double continuity_residual(const SpaceDef& space, const Vec4& x, const Vec4& y,
                           double step = kContinuityStep);

/// currents() plus the continuity residual.
CurrentSample sample_currents(const SpaceDef& space, const Vec4& x,
                              const Vec4& y, double step = kContinuityStep);

}  // namespace finsler::maxwell
