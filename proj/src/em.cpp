#include "finsler/em.hpp"

#include "finsler/error.hpp"
#include "finsler/expr/eval.hpp"
#include "finsler/expr/symbolic.hpp"

namespace finsler::em {

using expr::Jet;
using expr::yvar;

EMJets build_em(const SpaceDef& space, const GeometryJets& geo, int order_L1) {
  if (!geo.has_connection()) {
    throw Error(ErrorKind::kInvalidArgument,
                "electromagnetic tensor needs geometry of order >= 3");
  }
  if (order_L1 < 2 || order_L1 > expr::kMaxOrder) {
    throw Error(ErrorKind::kInvalidArgument, "L1 jets must have order 2..4");
  }
  EMJets e;
  const Jet L1 = expr::eval_jet(space.L1, geometry::make_point(geo.x, geo.y),
                                order_L1);
  e.A = GeometryJets::vertical(L1);
  for (int i = 0; i < kDim; ++i) {
    for (int a = i; a < kDim; ++a) {
      e.A_v[i][a] = e.A[i].derivative(yvar(a));
      if (a != i) e.A_v[a][i] = e.A_v[i][a];
    }
  }
  for (int i = 0; i < kDim; ++i) {
    for (int a = 0; a < kDim; ++a) e.F_hv[i][a] = -e.A_v[i][a];
  }

  // dA[j][i] = delta_i A_j
  JetMat4 dA;
  for (int j = 0; j < kDim; ++j) dA[j] = geo.delta(e.A[j]);
  for (int j = 0; j < kDim; ++j) {
    for (int i = 0; i < kDim; ++i) {
      Jet acc = dA[j][i];
      for (int k = 0; k < kDim; ++k) acc -= geo.L[k][j][i] * e.A[k];
      e.A_h[j][i] = std::move(acc);
    }
  }
  // The Chern coefficients are symmetric, so F_ij reduces to
  // delta_i A_j - delta_j A_i; built antisymmetric exactly.
  for (int i = 0; i < kDim; ++i) {
    e.F_hh[i][i] = Jet(0.0, dA[0][0].order());
    for (int j = i + 1; j < kDim; ++j) {
      e.F_hh[i][j] = dA[j][i] - dA[i][j];
      e.F_hh[j][i] = -e.F_hh[i][j];
    }
  }

  const JetMat4& gi = geo.g_inv;
  for (int i = 0; i < kDim; ++i) {
    for (int h = 0; h < kDim; ++h) {
      Jet f = gi[i][0] * e.F_hh[0][h];
      Jet ft = gi[i][0] * e.F_hv[0][h];
      for (int k = 1; k < kDim; ++k) {
        f += gi[i][k] * e.F_hh[k][h];
        ft += gi[i][k] * e.F_hv[k][h];
      }
      e.F_mixed[i][h] = std::move(f);
      e.Ft_mixed[i][h] = std::move(ft);
    }
  }
  // F^{ij} = F^i_l g^{lj} (g^{-1} symmetric); same for the mixed block.
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      Jet f = e.F_mixed[i][0] * gi[0][j];
      Jet ft = e.Ft_mixed[i][0] * gi[0][j];
      for (int l = 1; l < kDim; ++l) {
        f += e.F_mixed[i][l] * gi[l][j];
        ft += e.Ft_mixed[i][l] * gi[l][j];
      }
      e.F_up[i][j] = std::move(f);
      e.Ft_up[i][j] = std::move(ft);
    }
  }
  return e;
}

EMSample to_sample(const SpaceDef& space, const GeometryJets& geo,
                   const EMJets& e) {
  EMSample s;
  s.x = geo.x;
  s.y = geo.y;
  s.A = values(e.A);
  s.A_hderiv = values(e.A_h);
  s.A_vderiv = values(e.A_v);
  s.F_hh = values(e.F_hh);
  s.F_hv = values(e.F_hv);
  s.F_mixed_up = values(e.F_mixed);
  s.Ft_mixed_up = values(e.Ft_mixed);
  s.F_up = values(e.F_up);
  s.Ft_up = values(e.Ft_up);
  const double k = space.charge_ratio();
  const Mat4 g = values(geo.g);
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      s.omega_hh[i][j] = k * s.F_hh[i][j];
      s.omega_hv[i][j] = k * s.F_hv[i][j] - g[i][j];
    }
  }
  return s;
}

PotentialSample potential(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  const Jet L1 = expr::eval_jet(space.L1, geometry::make_point(x, y), 2);
  PotentialSample s;
  for (int i = 0; i < kDim; ++i) {
    const Jet Ai = L1.derivative(yvar(i));
    s.A[i] = Ai.value();
    for (int a = 0; a < kDim; ++a) s.A_vderiv[i][a] = Ai.derivative(yvar(a)).value();
  }
  return s;
}

EMSample em_tensor(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  const GeometryJets geo = geometry::build_geometry(space, x, y, 3);
  return to_sample(space, geo, build_em(space, geo, 2));
}

OmegaSample gravito_em_form(const SpaceDef& space, const Vec4& x,
                            const Vec4& y) {
  const EMSample s = em_tensor(space, x, y);
  return {s.omega_hh, s.omega_hv};
}

SpaceDef gauge_shift(const SpaceDef& space, const expr::ScalarField& lambda) {
  if (lambda.depends_on_y()) {
    throw Error(ErrorKind::kInvalidArgument,
                "gauge function must depend on x only");
  }
  expr::Node shift = expr::Node::num(0.0);
  for (int i = 0; i < kDim; ++i) {
    shift = expr::add(std::move(shift),
                      expr::mul(expr::differentiate(lambda.root(), expr::xvar(i)),
                                expr::Node::variable(yvar(i))));
  }
  SpaceDef out = space;
  out.L1 = expr::ScalarField(expr::add(space.L1.root(), std::move(shift)));
  return out;
}

namespace {

expr::Node linearized_potential(const SpaceDef& space, const Vec4& y_ref) {
  expr::Node sum = expr::Node::num(0.0);
  for (int i = 0; i < kDim; ++i) {
    expr::Node Ai = expr::differentiate(space.L1.root(), yvar(i));
    for (int a = 0; a < kDim; ++a) Ai = expr::substitute(Ai, yvar(a), y_ref[a]);
    sum = expr::add(std::move(sum),
                    expr::mul(std::move(Ai), expr::Node::variable(yvar(i))));
  }
  return sum;
}

}  // namespace

SpaceDef isotropic_truncation(const SpaceDef& space, const Vec4& y_ref) {
  SpaceDef out = space;
  out.L1 = expr::ScalarField(linearized_potential(space, y_ref));
  return out;
}

SpaceDef scale_anisotropy(const SpaceDef& space, const Vec4& y_ref, double s) {
  expr::Node iso = linearized_potential(space, y_ref);
  expr::Node rest = expr::sub(space.L1.root(), iso);
  SpaceDef out = space;
  out.L1 = expr::ScalarField(
      expr::add(std::move(iso), expr::mul(expr::Node::num(s), std::move(rest))));
  return out;
}

}  // namespace finsler::em
