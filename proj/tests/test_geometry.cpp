#include <doctest.h>

#include <cmath>
#include <string>

#include "finsler/dynamics.hpp"
#include "finsler/error.hpp"
#include "finsler/expr/eval.hpp"
#include "finsler/geometry.hpp"
#include "support.hpp"

using namespace finsler;
using namespace finsler::geometry;
using testing::LD;
using testing::X;

namespace {

SpaceDef space_of(const std::string& F, const std::string& L1 = "") {
  SpaceDef s;
  s.F = expr::ScalarField::parse(F);
  if (!L1.empty()) s.L1 = expr::ScalarField::parse(L1);
  return s;
}

const char* kMinkowski = "sqrt(y0^2 - y1^2 - y2^2 - y3^2)";
const char* kCurved =
    "sqrt((1 + 0.1*x1^2)*y0^2 - (1 + 0.05*x2^2)*y1^2 - (1 + 0.1*x0^2)*y2^2 - "
    "y3^2)";

// The curved scene's metric, coded by hand.
std::array<std::array<LD, 4>, 4> curved_metric(const X& x) {
  std::array<std::array<LD, 4>, 4> a{};
  a[0][0] = 1 + 0.1L * x[1] * x[1];
  a[1][1] = -(1 + 0.05L * x[2] * x[2]);
  a[2][2] = -(1 + 0.1L * x[0] * x[0]);
  a[3][3] = -1;
  return a;
}

X to_x(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

// Randers vacuum function in long double, for the Euler-Lagrange oracle.
LD randers_F(const X& x, const X& y) {
  const LD q = (1 + 0.1L * x[1] * x[1]) * y[0] * y[0] - y[1] * y[1] -
               y[2] * y[2] - y[3] * y[3];
  return std::sqrt(q) + 0.1L * y[1] + 0.05L * x[0] * y[2];
}

LD randers_L(const X& x, const X& y) {
  const LD f = randers_F(x, y);
  return f * f / 2;
}

const char* kScenes[] = {"minkowski",     "minkowski-efield", "curved",
                         "randers",       "randers-aniso",    "randers-efield",
                         "plane-wave",    "minkowski-aniso"};

}  // namespace

TEST_CASE("metric of a constant quadratic form is the form itself") {
  const auto s = space_of(kMinkowski);
  testing::Rng r(3);
  for (int n = 0; n < 20; ++n) {
    const Vec4 x{r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)};
    const Vec4 y{r.uniform(1, 2), r.uniform(-0.5, 0.5), r.uniform(-0.5, 0.5), r.uniform(-0.5, 0.5)};
    const auto m = metric(s, x, y);
    const Mat4 eta{{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}};
    CHECK(testing::worst(m.g, eta) <= 1e-14);
    CHECK(testing::worst(m.g_inv, eta) <= 1e-14);
  }
}

TEST_CASE("position-dependent quadratic form gives a y-independent metric") {
  const auto s = space_of("sqrt((1 + x1^2)*y0^2 - y1^2 - y2^2 - y3^2)");
  const Vec4 x{0.2, 0.7, -0.3, 0.1};
  const auto m1 = metric(s, x, {1, 0.2, 0, 0.1});
  const auto m2 = metric(s, x, {1.5, -0.3, 0.2, 0});
  CHECK(m1.g[0][0] == doctest::Approx(1.49).epsilon(1e-13));
  CHECK(testing::worst(m1.g, m2.g) <= 1e-12);
  CHECK(std::fabs(m1.g[0][1]) <= 1e-13);
}

TEST_CASE("Randers metric against a finite-difference Hessian of F^2") {
  const auto s = space_of("sqrt(y0^2 - y1^2 - y2^2 - y3^2) + 0.1*y1");
  const Vec4 x{0, 0, 0, 0};
  const Vec4 y{1, 0.2, 0, 0};
  const auto m = metric(s, x, y);
  const auto F2 = expr::ScalarField::parse("(sqrt(y0^2 - y1^2 - y2^2 - y3^2) + 0.1*y1)^2");
  const auto fd = expr::fd_jet(F2, make_point(x, y), 2, 1e-3);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double ref = 0.5 * fd.partial({expr::yvar(i), expr::yvar(j)});
      CHECK(testing::close(m.g[i][j], ref, 1e-6));
    }
  }
}

TEST_CASE("signature and degeneracy are reported") {
  auto s = space_of(kMinkowski);
  s.signature = Signature::parse("++--");
  CHECK_THROWS_AS(metric(s, {0, 0, 0, 0}, {1, 0.1, 0, 0}), SignatureMismatch);
  const auto flat = space_of("sqrt(y0^2 + 0*y1^2)");
  CHECK_THROWS_AS(metric(flat, {0, 0, 0, 0}, {1, 0.1, 0, 0}), DegenerateMetric);
  CHECK(Signature::parse("(+,-,-,-)") == Signature{1, 3});
}

TEST_CASE("Minkowski has no spray, connection or curvature") {
  const auto s = space_of(kMinkowski);
  const auto g = sample_geometry(s, {0.3, -0.2, 0.5, 0.1}, {1.2, 0.3, -0.1, 0.2});
  CHECK(max_abs(g.G_spray) == 0.0);
  CHECK(max_abs(g.N) == 0.0);
  CHECK(max_abs(g.L_chern) == 0.0);
  CHECK(max_abs(g.R_curv) == 0.0);
  CHECK(g.sqrtG == doctest::Approx(1.0));
}

TEST_CASE("pseudo-Riemannian spray, connection and curvature from Christoffel symbols") {
  const auto s = space_of(kCurved);
  testing::Rng r(21);
  for (int n = 0; n < 10; ++n) {
    const Vec4 x{r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)};
    const Vec4 y{r.uniform(1.5, 2), r.uniform(-0.5, 0.5), r.uniform(-0.5, 0.5), r.uniform(-0.5, 0.5)};
    const auto geo = sample_geometry(s, x, y);
    const auto gam = testing::christoffel(curved_metric, to_x(x));
    const auto riem = testing::riemann(curved_metric, to_x(x));
    for (int i = 0; i < 4; ++i) {
      LD G = 0;
      for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) G += gam[i][j][k] * y[j] * y[k] / 2;
      }
      CHECK(testing::close(geo.G_spray[i], static_cast<double>(G), 1e-9));
      for (int j = 0; j < 4; ++j) {
        LD N = 0;
        for (int k = 0; k < 4; ++k) N += gam[i][j][k] * y[k];
        CHECK(testing::close(geo.N[i][j], static_cast<double>(N), 1e-9));
        for (int k = 0; k < 4; ++k) {
          CHECK(testing::close(geo.L_chern[i][j][k], static_cast<double>(gam[i][j][k]), 1e-9));
          LD R = 0;
          for (int b = 0; b < 4; ++b) R -= riem[i][b][j][k] * y[b];
          CHECK(testing::close(geo.R_curv[i][j][k], static_cast<double>(R), 1e-6));
        }
      }
    }
  }
}

TEST_CASE("adapted derivative examples") {
  const auto f = expr::ScalarField::parse("x0*y1 + sin(x2)*y0^2");
  const Vec4 x{0.4, -0.2, 0.7, 0.1};
  const Vec4 y{1.3, 0.2, -0.1, 0.3};
  SUBCASE("flat space reduces to partial derivatives") {
    const auto d = adapted_derivative(space_of(kMinkowski), f, x, y);
    CHECK(d[0] == doctest::Approx(y[1]).epsilon(1e-14));
    CHECK(d[1] == 0.0);
    CHECK(d[2] == doctest::Approx(std::cos(x[2]) * y[0] * y[0]).epsilon(1e-14));
    CHECK(d[3] == 0.0);
  }
  SUBCASE("x-independent f on a pseudo-Riemannian space") {
    const auto h = expr::ScalarField::parse("y0*y1 + y2^2");
    const auto d = adapted_derivative(space_of(kCurved), h, x, y);
    const auto gam = testing::christoffel(curved_metric, to_x(x));
    const double fy[4] = {y[1], y[0], 2 * y[2], 0};
    for (int i = 0; i < 4; ++i) {
      LD ref = 0;
      for (int a = 0; a < 4; ++a) {
        for (int k = 0; k < 4; ++k) ref -= gam[a][i][k] * y[k] * fy[a];
      }
      CHECK(testing::close(d[i], static_cast<double>(ref), 1e-9));
    }
  }
}

TEST_CASE("geometry invariants at seeded samples of every scene") {
  for (const char* name : kScenes) {
    CAPTURE(std::string(name));
    const auto sc = testing::load(name);
    double w_sym = 0, w_inv = 0, w_euler = 0, w_spray = 0, w_lower = 0;
    double w_chern = 0, w_R = 0, w_sqrtG = 0, w_hom = 0, w_deltaF = 0;
    double w_hmetric = 0, w_deflect = 0;
    for (const auto& p : testing::draws(sc, 100, 77)) {
      const auto jets = build_geometry(sc.space, p.x, p.y, 4);
      const auto geo = to_sample(jets);
      const double F2 = geo.F_value * geo.F_value;
      const Mat4 id = mat_mul(geo.g, geo.g_inv);
      double gyy = 0;
      for (int i = 0; i < 4; ++i) {
        double Ny = 0, gy = 0;
        for (int j = 0; j < 4; ++j) {
          w_sym = std::max(w_sym, std::fabs(geo.g[i][j] - geo.g[j][i]));
          w_inv = std::max(w_inv, std::fabs(id[i][j] - (i == j ? 1.0 : 0.0)));
          gyy += geo.g[i][j] * p.y[i] * p.y[j];
          Ny += geo.N[i][j] * p.y[j];
          gy += geo.g[i][j] * p.y[j];
          for (int k = 0; k < 4; ++k) {
            w_chern = std::max(w_chern, std::fabs(geo.L_chern[i][j][k] - geo.L_chern[i][k][j]));
            w_R = std::max(w_R, std::fabs(geo.R_curv[i][j][k] + geo.R_curv[i][k][j]));
          }
        }
        const double half_dF2 = 0.5 * jets.F2.partial({expr::yvar(i)});
        w_spray = std::max(w_spray, std::fabs(Ny - 2 * geo.G_spray[i]) /
                                        std::max(1.0, std::fabs(2 * geo.G_spray[i])));
        w_lower = std::max(w_lower, std::fabs(gy - half_dF2) / std::max(1.0, std::fabs(half_dF2)));
      }
      w_euler = std::max(w_euler, std::fabs(gyy - F2) / std::max(1.0, F2));
      double det = 0;
      {
        // cofactor expansion, independent of the library's LU
        const auto& g = geo.g;
        auto m3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
          return g[r0][c0] * (g[r1][c1] * g[r2][c2] - g[r1][c2] * g[r2][c1]) -
                 g[r0][c1] * (g[r1][c0] * g[r2][c2] - g[r1][c2] * g[r2][c0]) +
                 g[r0][c2] * (g[r1][c0] * g[r2][c1] - g[r1][c1] * g[r2][c0]);
        };
        det = g[0][0] * m3(1, 2, 3, 1, 2, 3) - g[0][1] * m3(1, 2, 3, 0, 2, 3) +
              g[0][2] * m3(1, 2, 3, 0, 1, 3) - g[0][3] * m3(1, 2, 3, 0, 1, 2);
      }
      w_sqrtG = std::max(w_sqrtG, std::fabs(geo.sqrtG - std::fabs(det)) / std::max(1.0, std::fabs(det)));
      for (double lam : {0.5, 2.0, 10.0}) {
        const Vec4 ly{lam * p.y[0], lam * p.y[1], lam * p.y[2], lam * p.y[3]};
        w_hom = std::max(w_hom, testing::worst(metric(sc.space, p.x, ly).g, geo.g));
      }
      const auto dF2 = jets.delta(jets.F2);
      w_deltaF = std::max(w_deltaF, max_abs(values(dF2)) / std::max(1.0, F2));
      // g_ij|k and y_i|j with the Chern connection
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          const auto dg = values(jets.delta(jets.g[i][j]));
          const auto dyl = values(jets.delta(jets.y_lower[i]));
          double defl = dyl[j];
          for (int h = 0; h < 4; ++h) defl -= geo.L_chern[h][i][j] * dot(geo.g[h], p.y);
          w_deflect = std::max(w_deflect, std::fabs(defl));
          for (int k = 0; k < 4; ++k) {
            double r = dg[k];
            for (int h = 0; h < 4; ++h) {
              r -= geo.L_chern[h][i][k] * geo.g[h][j] + geo.L_chern[h][j][k] * geo.g[i][h];
            }
            w_hmetric = std::max(w_hmetric, std::fabs(r));
          }
        }
      }
    }
    CHECK(w_sym == 0.0);
    CHECK(w_inv <= 1e-10);
    CHECK(w_euler <= 1e-10);
    CHECK(w_spray <= 1e-10);
    CHECK(w_lower <= 1e-10);
    CHECK(w_chern == 0.0);
    CHECK(w_R <= 1e-12);
    CHECK(w_sqrtG <= 1e-10);
    CHECK(w_hom <= 1e-9);
    CHECK(w_deltaF <= 1e-8);
    CHECK(w_hmetric <= 1e-9);
    CHECK(w_deflect <= 1e-9);
  }
}

TEST_CASE("divergence examples on Minkowski") {
  const auto s = space_of(kMinkowski);
  const Vec4 x{0.1, 0.2, 0.3, 0.4};
  const Vec4 y{1.2, 0.1, -0.2, 0.3};
  TMVectorField V;
  for (int i = 0; i < 4; ++i) {
    V.horizontal[i] = expr::ScalarField::constant(1.0 + i);
    V.vertical[i] = expr::ScalarField::constant(0.5 * i);
  }
  CHECK(std::fabs(divergence(s, V, x, y)) <= 1e-14);
  TMVectorField Y;
  for (int a = 0; a < 4; ++a) Y.vertical[a] = expr::ScalarField::parse("y" + std::to_string(a));
  CHECK(divergence(s, Y, x, y) == doctest::Approx(4.0).epsilon(1e-14));
  const SampledTMField Ys = [](const Vec4&, const Vec4& yy) {
    return std::array<double, 8>{0, 0, 0, 0, yy[0], yy[1], yy[2], yy[3]};
  };
  CHECK(divergence_fd(s, Ys, x, y, 1e-3) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("divergence with horizontal components on a curved space") {
  // exact jets vs. the central-difference variant of the same formula
  const auto sc = testing::load("curved");
  TMVectorField V;
  V.horizontal[0] = expr::ScalarField::parse("sin(x1)");
  V.horizontal[1] = expr::ScalarField::parse("x0*y2");
  V.horizontal[2] = expr::ScalarField::parse("0.3*y0");
  V.horizontal[3] = expr::ScalarField::parse("x2^2");
  V.vertical[1] = expr::ScalarField::parse("x3*y1");
  const SampledTMField Vs = [&](const Vec4& x, const Vec4& y) {
    std::array<double, 8> out{};
    const auto p = make_point(x, y);
    for (int i = 0; i < 4; ++i) {
      out[i] = expr::evaluate(V.horizontal[i], p);
      out[4 + i] = expr::evaluate(V.vertical[i], p);
    }
    return out;
  };
  for (const auto& p : testing::draws(sc, 5, 4)) {
    const double exact = divergence(sc.space, V, p.x, p.y);
    const double fd = divergence_fd(sc.space, Vs, p.x, p.y, 1e-3);
    CHECK(testing::close(fd, exact, 1e-6));
  }
}

TEST_CASE("Randers geodesic satisfies the Euler-Lagrange equations of F^2/2") {
  const auto sc = testing::load("randers");
  const double dt = 1e-3;
  dynamics::StepParams params;
  params.dt = dt;
  const auto traj = dynamics::integrate(sc.space, sc.particle.x0, sc.particle.y0,
                                        2.0, dynamics::Method::kRk4, params);
  REQUIRE(traj.states.size() == 2001);
  auto momentum = [&](std::size_t n, int i) {
    const X x = to_x(traj.states[n].x);
    const X y = to_x(traj.states[n].y);
    return testing::d([&](const X& v) { return randers_L(x, v); }, y, i);
  };
  double worst = 0;
  for (std::size_t n = 2; n + 2 < traj.states.size(); n += 97) {
    const X x = to_x(traj.states[n].x);
    const X y = to_x(traj.states[n].y);
    for (int i = 0; i < 4; ++i) {
      const LD dp = (-momentum(n + 2, i) + 8 * momentum(n + 1, i) -
                     8 * momentum(n - 1, i) + momentum(n - 2, i)) /
                    (12 * dt);
      const LD dLdx = testing::d([&](const X& v) { return randers_L(v, y); }, x, i);
      worst = std::max(worst, static_cast<double>(std::fabs(dp - dLdx)));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("F is conserved along Randers geodesics") {
  const auto sc = testing::load("randers");
  dynamics::StepParams params;
  params.dt = 1e-3;
  const auto traj = dynamics::integrate(sc.space, sc.particle.x0, sc.particle.y0,
                                        10.0, dynamics::Method::kRk4, params);
  REQUIRE(traj.states.size() == 10001);
  const double F0 = traj.states.front().monitors.F_value;
  double drift = 0;
  for (const auto& st : traj.states) {
    drift = std::max(drift, std::fabs(st.monitors.F_value - F0) / F0);
  }
  CHECK(drift < 1e-6);
}
