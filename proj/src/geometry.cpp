#include "finsler/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "finsler/error.hpp"
#include "finsler/expr/eval.hpp"

namespace finsler::geometry {

using expr::Jet;
using expr::xvar;
using expr::yvar;

Signature Signature::parse(const std::string& text) {
  Signature s{0, 0};
  for (char ch : text) {
    if (ch == '+') {
      ++s.plus;
    } else if (ch == '-') {
      ++s.minus;
    } else if (ch != '(' && ch != ')' && ch != ',' && ch != ' ') {
      throw Error(ErrorKind::kInvalidArgument,
                  "bad signature character in '" + text + "'");
    }
  }
  if (s.plus + s.minus != kDim) {
    throw Error(ErrorKind::kInvalidArgument,
                "signature must have four entries: '" + text + "'");
  }
  return s;
}

std::string Signature::to_string() const {
  return std::string(plus, '+') + std::string(minus, '-');
}

expr::Point make_point(const Vec4& x, const Vec4& y) {
  expr::Point p{};
  for (int i = 0; i < kDim; ++i) {
    p[xvar(i)] = x[i];
    p[yvar(i)] = y[i];
  }
  return p;
}

bool admissible(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  try {
    const double F = expr::evaluate(space.F, make_point(x, y));
    if (!(F > 0.0)) return false;
    if (F * F < kAdmissibleRatio * dot(y, y)) return false;
    (void)build_geometry(space, x, y, 2);
    return true;
  } catch (const Error&) {
    return false;
  }
}

namespace {

Signature inertia(const Mat4& g) {
  Eigen::Matrix4d m;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) m(i, j) = g[i][j];
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(
      m, Eigen::EigenvaluesOnly);
  Signature s{0, 0};
  for (int i = 0; i < kDim; ++i) {
    if (solver.eigenvalues()[i] > 0.0) {
      ++s.plus;
    } else {
      ++s.minus;
    }
  }
  return s;
}

}  // namespace

JetVec4 GeometryJets::vertical(const Jet& f) {
  JetVec4 out;
  for (int a = 0; a < kDim; ++a) out[a] = f.derivative(yvar(a));
  return out;
}

JetVec4 GeometryJets::delta(const Jet& f) const {
  const JetVec4 fy = vertical(f);
  JetVec4 out;
  for (int i = 0; i < kDim; ++i) {
    Jet d = f.derivative(xvar(i));
    for (int a = 0; a < kDim; ++a) d -= N[a][i] * fy[a];
    out[i] = std::move(d);
  }
  return out;
}

GeometryJets build_geometry(const SpaceDef& space, const Vec4& x, const Vec4& y,
                            int order) {
  if (order < 2 || order > expr::kMaxOrder) {
    throw Error(ErrorKind::kInvalidArgument,
                "geometry needs F^2 jets of order 2..4");
  }
  GeometryJets t;
  t.order = order;
  t.x = x;
  t.y = y;
  const expr::Point p = make_point(x, y);
  t.F = expr::eval_jet(space.F, p, order);
  t.F2 = t.F * t.F;
  for (int i = 0; i < kDim; ++i) {
    t.y_coord[i] = Jet::variable(yvar(i), y[i], order);
  }

  JetVec4 dF2 = GeometryJets::vertical(t.F2);
  for (int i = 0; i < kDim; ++i) t.y_lower[i] = 0.5 * dF2[i];
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      t.g[i][j] = 0.5 * dF2[i].derivative(yvar(j));
      if (j != i) t.g[j][i] = t.g[i][j];
    }
  }

  const Lu<Jet> lu(t.g);
  t.det_g = lu.ok ? lu.determinant() : Jet(0.0, order - 2);
  if (!lu.ok || std::fabs(t.det_g.value()) < kDegenerateDet) {
    throw DegenerateMetric(t.det_g.value());
  }
  const Signature found = inertia(values(t.g));
  if (!(found == space.signature)) {
    throw SignatureMismatch(space.signature.to_string(), found.to_string());
  }
  t.g_inv = lu.inverse(Jet(0.0, order - 2), Jet(1.0, order - 2));
  t.sqrtG = t.det_g.value() < 0.0 ? -t.det_g : t.det_g;

  // G^i = 1/4 g^{il} ((F^2)_{.l,k} y^k - (F^2)_{,l})
  JetVec4 s;
  for (int l = 0; l < kDim; ++l) {
    Jet acc = -t.F2.derivative(xvar(l));
    for (int k = 0; k < kDim; ++k) {
      acc += dF2[l].derivative(xvar(k)) * t.y_coord[k];
    }
    s[l] = std::move(acc);
  }
  for (int i = 0; i < kDim; ++i) {
    Jet acc(0.0, order - 2);
    for (int l = 0; l < kDim; ++l) acc += t.g_inv[i][l] * s[l];
    t.G[i] = 0.25 * acc;
  }
  if (order < 3) return t;

  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) t.N[i][j] = t.G[i].derivative(yvar(j));
  }

  // dg[h][j][k] = delta_k g_hj
  JetTensor3 dg;
  for (int h = 0; h < kDim; ++h) {
    for (int j = h; j < kDim; ++j) {
      dg[h][j] = t.delta(t.g[h][j]);
      if (j != h) dg[j][h] = dg[h][j];
    }
  }
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      for (int k = j; k < kDim; ++k) {
        Jet acc(0.0, order - 3);
        for (int h = 0; h < kDim; ++h) {
          acc += t.g_inv[i][h] * (dg[h][j][k] + dg[h][k][j] - dg[j][k][h]);
        }
        t.L[i][j][k] = 0.5 * acc;
        if (k != j) t.L[i][k][j] = t.L[i][j][k];
      }
    }
  }
  if (order < 4) return t;

  // R^a_jk = delta_k N^a_j - delta_j N^a_k
  std::array<JetMat4, kDim> dN;  // dN[a][j][k] = delta_k N^a_j
  for (int a = 0; a < kDim; ++a) {
    for (int j = 0; j < kDim; ++j) dN[a][j] = t.delta(t.N[a][j]);
  }
  for (int a = 0; a < kDim; ++a) {
    for (int j = 0; j < kDim; ++j) {
      t.R[a][j][j] = Jet(0.0, 0);
      for (int k = j + 1; k < kDim; ++k) {
        t.R[a][j][k] = dN[a][j][k] - dN[a][k][j];
        t.R[a][k][j] = -t.R[a][j][k];
      }
    }
  }
  for (int j = 0; j < kDim; ++j) {
    Jet acc(0.0, 0);
    for (int a = 0; a < kDim; ++a) acc += t.N[a][j].derivative(yvar(a));
    t.N_trace_dot[j] = std::move(acc);
  }
  return t;
}

GeometrySample to_sample(const GeometryJets& t) {
  GeometrySample s;
  s.x = t.x;
  s.y = t.y;
  s.g = values(t.g);
  s.g_inv = values(t.g_inv);
  s.F_value = t.F.value();
  s.G_spray = values(t.G);
  s.sqrtG = t.sqrtG.value();
  if (t.has_connection()) {
    s.N = values(t.N);
    s.L_chern = values(t.L);
  }
  if (t.has_curvature()) {
    s.R_curv = values(t.R);
    s.N_trace_dot = values(t.N_trace_dot);
  }
  return s;
}

MetricSample metric(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  const GeometryJets t = build_geometry(space, x, y, 2);
  return {values(t.g), values(t.g_inv), t.F.value()};
}

Vec4 spray(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  return values(build_geometry(space, x, y, 2).G);
}

ConnectionSample nonlinear_connection(const SpaceDef& space, const Vec4& x,
                                      const Vec4& y) {
  const GeometryJets t = build_geometry(space, x, y, 4);
  return {values(t.N), values(t.N_trace_dot)};
}

Vec4 adapted_derivative(const SpaceDef& space, const expr::ScalarField& f,
                        const Vec4& x, const Vec4& y) {
  const GeometryJets t = build_geometry(space, x, y, 3);
  return values(t.delta(expr::eval_jet(f, make_point(x, y), 1)));
}

Tensor3 chern(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  return values(build_geometry(space, x, y, 3).L);
}

Tensor3 curvature(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  return values(build_geometry(space, x, y, 4).R);
}

GeometrySample sample_geometry(const SpaceDef& space, const Vec4& x,
                               const Vec4& y) {
  return to_sample(build_geometry(space, x, y, 4));
}

double divergence(const SpaceDef& space, const TMVectorField& V, const Vec4& x,
                  const Vec4& y) {
  const GeometryJets t = build_geometry(space, x, y, 4);
  const expr::Point p = make_point(x, y);
  const Jet W = t.sqrtG.truncated(1);
  double horizontal = 0.0;
  double vertical = 0.0;
  double trace = 0.0;
  for (int i = 0; i < kDim; ++i) {
    const Jet Vi = expr::eval_jet(V.horizontal[i], p, 1);
    horizontal += t.delta(Vi * W)[i].value();
    trace += t.N_trace_dot[i].value() * Vi.value();
    const Jet Va = expr::eval_jet(V.vertical[i], p, 1);
    vertical += (Va * W).derivative(yvar(i)).value();
  }
  return (horizontal + vertical) / W.value() - trace;
}

double divergence_fd(const SpaceDef& space, const SampledTMField& V,
                     const Vec4& x, const Vec4& y, double step) {
  const GeometrySample here = sample_geometry(space, x, y);
  const auto weighted = [&](const Vec4& xs, const Vec4& ys) {
    auto v = V(xs, ys);
    const double W = build_geometry(space, xs, ys, 2).sqrtG.value();
    for (auto& e : v) e *= W;
    return v;
  };
  // d[var][comp]: central difference of (V sqrtG) along coordinate var.
  std::array<std::array<double, 2 * kDim>, 2 * kDim> d{};
  for (int var = 0; var < 2 * kDim; ++var) {
    Vec4 xp = x, xm = x, yp = y, ym = y;
    if (var < kDim) {
      xp[var] += step;
      xm[var] -= step;
    } else {
      yp[var - kDim] += step;
      ym[var - kDim] -= step;
    }
    const auto plus = weighted(xp, yp);
    const auto minus = weighted(xm, ym);
    for (int c = 0; c < 2 * kDim; ++c) {
      d[var][c] = (plus[c] - minus[c]) / (2.0 * step);
    }
  }
  const auto v = V(x, y);
  double horizontal = 0.0;
  double vertical = 0.0;
  double trace = 0.0;
  for (int i = 0; i < kDim; ++i) {
    double di = d[i][i];
    for (int a = 0; a < kDim; ++a) di -= here.N[a][i] * d[kDim + a][i];
    horizontal += di;
    trace += here.N_trace_dot[i] * v[i];
    vertical += d[kDim + i][kDim + i];
  }
  return (horizontal + vertical) / here.sqrtG - trace;
}

}  // namespace finsler::geometry
