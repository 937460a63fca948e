#pragma once

#include "finsler/expr/ast.hpp"
#include "finsler/geometry.hpp"
#include "finsler/tensor.hpp"

namespace finsler::em {

using geometry::GeometryJets;
using geometry::SpaceDef;

/// Jet-valued electromagnetic quantities at one point. With L1 expanded to
/// order m and the geometry to order n: A has order m-1, A_v and F_hv
/// order m-2, F_hh and its raised forms order min(m-2, n-3).
struct EMJets {
  /// A_i = dL1/dy^i
  JetVec4 A;
  /// A_v[i][a] = A_{i.a}
  JetMat4 A_v;
  /// A_h[j][i] = A_{j|i}, Chern horizontal covariant derivative
  JetMat4 A_h;
  /// F_hh[i][j] = F_ij = A_{j|i} - A_{i|j}
  JetMat4 F_hh;
  /// F_hv[i][a] = Ftilde_ia = -A_{i.a}
  JetMat4 F_hv;
  /// F_mixed[i][h] = F^i_h = g^{ik} F_kh
  JetMat4 F_mixed;
  /// Ft_mixed[i][a] = Ftilde^i_a = g^{ik} Ftilde_ka
  JetMat4 Ft_mixed;
  /// F_up[i][j] = F^{ij}
  JetMat4 F_up;
  /// Ft_up[i][a] = Ftilde^{ia} = g^{ik} g^{al} Ftilde_kl
  JetMat4 Ft_up;
};

/// Requires geometry of order >= 3 and 2 <= order_L1 <= 4.
EMJets build_em(const SpaceDef& space, const GeometryJets& geo, int order_L1);

struct EMSample {
  Vec4 x{};
  Vec4 y{};
  Vec4 A{};
  Mat4 A_hderiv{};
  Mat4 A_vderiv{};
  Mat4 F_hh{};
  Mat4 F_hv{};
  Mat4 F_mixed_up{};
  Mat4 Ft_mixed_up{};
  Mat4 F_up{};
  Mat4 Ft_up{};
  Mat4 omega_hh{};
  Mat4 omega_hv{};
};

EMSample to_sample(const SpaceDef& space, const GeometryJets& geo,
                   const EMJets& em);

struct PotentialSample {
  Vec4 A{};
  Mat4 A_vderiv{};
};

PotentialSample potential(const SpaceDef& space, const Vec4& x, const Vec4& y);

/// Full electromagnetic sample: both tensor blocks, raised variants and
/// the gravito-electromagnetic form.
EMSample em_tensor(const SpaceDef& space, const Vec4& x, const Vec4& y);

struct OmegaSample {
  Mat4 omega_hh{};
  Mat4 omega_hv{};
};

/// omega_ij = (q/c) F_ij, omega~_ia = (q/c) Ftilde_ia - g_ia.
OmegaSample gravito_em_form(const SpaceDef& space, const Vec4& x,
                            const Vec4& y);

/// Returns a copy of `space` with L1 + lambda_{,i} y^i; lambda must depend
/// on x only.
SpaceDef gauge_shift(const SpaceDef& space, const expr::ScalarField& lambda);

/// L1 replaced by its linearization A_i(x, y_ref) y^i at a fixed direction.
SpaceDef isotropic_truncation(const SpaceDef& space, const Vec4& y_ref);

/// L1_iso + s (L1 - L1_iso): scales the anisotropic remainder.
SpaceDef scale_anisotropy(const SpaceDef& space, const Vec4& y_ref, double s);

}  // namespace finsler::em
