#include "finsler/maxwell.hpp"

#include <cmath>

#include "finsler/error.hpp"

namespace finsler::maxwell {

using expr::Jet;
using expr::yvar;
using geometry::GeometryJets;

namespace {

Vec4 fibre(const SpaceDef& space, const Vec4& y) {
  if (space.H == 1.0) return y;
  Vec4 u = y;
  for (double& e : u) e /= space.H;
  return u;
}

}  // namespace

FieldPoint build_field_point(const SpaceDef& space, const Vec4& x,
                             const Vec4& y) {
  FieldPoint p{geometry::build_geometry(space, x, fibre(space, y), 4), {}};
  p.em = em::build_em(space, p.geo, 3);
  return p;
}

MaxwellResiduals homogeneous_residuals(const FieldPoint& p) {
  const GeometryJets& geo = p.geo;
  const em::EMJets& e = p.em;
  const Tensor3 L = values(geo.L);
  const Tensor3 R = values(geo.R);
  const Mat4 F = values(e.F_hh);
  const Mat4 Ft = values(e.F_hv);

  // B[b][a][k] = N^b_{k.a}, the Berwald coefficients: the vertical index of
  // Ftilde is carried by them, which is what the adapted-frame exterior
  // derivative produces.
  Tensor3 B{};
  for (int b = 0; b < kDim; ++b) {
    for (int k = 0; k < kDim; ++k) {
      for (int a = 0; a < kDim; ++a) {
        B[b][a][k] = geo.N[b][k].derivative(yvar(a)).value();
      }
    }
  }

  // DF[i][j][k] = F_{ij|k}
  Tensor3 DF{};
  // DFt[j][a][k] = Ft_{ja|k}
  Tensor3 DFt{};
  // Fy[j][k][a] = F_{jk.a}
  Tensor3 Fy{};
  // Fty[k][a][b] = Ft_{ka.b}
  Tensor3 Fty{};
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      const JetVec4 dF = geo.delta(e.F_hh[i][j]);
      const JetVec4 dFt = geo.delta(e.F_hv[i][j]);
      for (int k = 0; k < kDim; ++k) {
        double f = dF[k].value();
        double ft = dFt[k].value();
        for (int m = 0; m < kDim; ++m) {
          f -= L[m][i][k] * F[m][j] + L[m][j][k] * F[i][m];
          ft -= L[m][i][k] * Ft[m][j] + B[m][j][k] * Ft[i][m];
        }
        DF[i][j][k] = f;
        DFt[i][j][k] = ft;
        Fy[i][j][k] = e.F_hh[i][j].derivative(yvar(k)).value();
        Fty[i][j][k] = e.F_hv[i][j].derivative(yvar(k)).value();
      }
    }
  }

  MaxwellResiduals r;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      for (int k = 0; k < kDim; ++k) {
        double curv = 0.0;
        for (int b = 0; b < kDim; ++b) {
          curv += R[b][j][k] * Ft[i][b] + R[b][k][i] * Ft[j][b] +
                  R[b][i][j] * Ft[k][b];
        }
        r.hhh[i][j][k] = DF[i][j][k] + DF[k][i][j] + DF[j][k][i] + curv;
        // Index roles: a = i, then j, k horizontal. Ft_{aj} = -Ft_{ja}.
        const int a = i;
        r.hhv[a][j][k] = -DFt[j][a][k] + DFt[k][a][j] + Fy[j][k][a];
        // Index roles: k = i, a = j, b = k. Ft_{bk} = -Ft_{kb}.
        r.hvv[i][j][k] = Fty[i][j][k] - Fty[i][k][j];
      }
    }
  }
  r.max_abs = std::max({max_abs(r.hhh), max_abs(r.hhv), max_abs(r.hvv)});
  return r;
}

MaxwellResiduals homogeneous_residuals(const SpaceDef& space, const Vec4& x,
                                       const Vec4& y) {
  return homogeneous_residuals(build_field_point(space, x, y));
}

CurrentSample currents(const SpaceDef& space, const FieldPoint& p) {
  if (space.coupling == 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "coupling must be nonzero");
  }
  const GeometryJets& geo = p.geo;
  const em::EMJets& e = p.em;
  const Jet W = geo.sqrtG.truncated(1);
  const double w = W.value();
  CurrentSample s;
  s.x = geo.x;
  s.y = geo.y;
  for (int i = 0; i < kDim; ++i) {
    double div_h = 0.0;
    double trace = 0.0;
    double div_v = 0.0;
    double div_vert_current = 0.0;
    for (int j = 0; j < kDim; ++j) {
      div_h += geo.delta(e.F_up[i][j] * W)[j].value();
      trace += e.F_up[i][j].value() * geo.N_trace_dot[j].value();
      div_v += (e.Ft_up[i][j] * W).derivative(yvar(j)).value();
      // Jtilde^a with a = i: Ft^{ai} = -Ft^{ia}, summed over horizontal j.
      div_vert_current -= geo.delta(e.Ft_up[j][i] * W)[j].value();
    }
    s.classical[i] = div_h / w - trace;
    s.zeta[i] = div_v / w;
    s.J_h[i] = (s.classical[i] + s.zeta[i]) / space.coupling;
    s.J_v[i] = div_vert_current / w / space.coupling;
  }
  return s;
}

CurrentSample currents(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  return currents(space, build_field_point(space, x, y));
}

HorizontalCurrent horizontal_current(const SpaceDef& space, const Vec4& x,
                                     const Vec4& y) {
  const CurrentSample s = currents(space, x, y);
  return {s.J_h, s.zeta, s.classical};
}

Vec4 vertical_current(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  return currents(space, x, y).J_v;
}

double continuity_residual(const SpaceDef& space, const Vec4& x, const Vec4& y,
                           double step) {
  // Work directly in fibre units; the current field is sampled there too.
  SpaceDef unit = space;
  unit.H = 1.0;
  const geometry::SampledTMField J = [&unit](const Vec4& xs, const Vec4& us) {
    const CurrentSample c = currents(unit, xs, us);
    std::array<double, 2 * kDim> v{};
    for (int i = 0; i < kDim; ++i) {
      v[i] = c.J_h[i];
      v[kDim + i] = c.J_v[i];
    }
    return v;
  };
  return geometry::divergence_fd(unit, J, x, fibre(space, y), step);
}

CurrentSample sample_currents(const SpaceDef& space, const Vec4& x,
                              const Vec4& y, double step) {
  CurrentSample s = currents(space, x, y);
  s.continuity = continuity_residual(space, x, y, step);
  return s;
}

}  // namespace finsler::maxwell
