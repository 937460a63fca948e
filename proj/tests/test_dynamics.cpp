#include <doctest.h>

#include <cmath>
#include <string>

#include "finsler/dynamics.hpp"
#include "finsler/em.hpp"
#include "finsler/error.hpp"
#include "finsler/expr/eval.hpp"
#include "support.hpp"

using namespace finsler;
using namespace finsler::dynamics;

namespace {

SpaceDef space_of(const std::string& F, const std::string& L1 = "") {
  SpaceDef s;
  s.F = expr::ScalarField::parse(F);
  if (!L1.empty()) s.L1 = expr::ScalarField::parse(L1);
  return s;
}

const char* kMinkowski = "sqrt(y0^2 - y1^2 - y2^2 - y3^2)";
constexpr double kE = 0.1;

StepParams fixed(double dt) {
  StepParams p;
  p.dt = dt;
  return p;
}

// y' = -E (y1, y0) from y(0) = (1, 0.1): the closed form in the E-field scene.
std::pair<Vec4, Vec4> hyperbolic(double t) {
  const double c = std::cosh(kE * t), s = std::sinh(kE * t);
  const Vec4 y{c - 0.1 * s, 0.1 * c - s, 0, 0};
  const Vec4 x{(s - 0.1 * (c - 1)) / kE, (0.1 * s - (c - 1)) / kE, 0, 0};
  return {x, y};
}

double endpoint_error(const Trajectory& tr) {
  const auto& last = tr.states.back();
  const auto [x, y] = hyperbolic(last.t);
  return std::max(testing::worst(last.x, x), testing::worst(last.y, y));
}

double distance(const TrajectoryState& a, const TrajectoryState& b) {
  double d = 0;
  for (int i = 0; i < 4; ++i) {
    d = std::max({d, std::fabs(a.x[i] - b.x[i]), std::fabs(a.y[i] - b.y[i])});
  }
  return d;
}

}  // namespace

TEST_CASE("free particle moves on a straight line") {
  const auto sc = testing::load("minkowski");
  const auto tr = integrate(sc.space, sc.particle.x0, sc.particle.y0, 10.0,
                            Method::kRk4, fixed(1e-3));
  REQUIRE(tr.states.size() == 10001);
  double w = 0;
  for (const auto& st : tr.states) {
    for (int i = 0; i < 4; ++i) {
      w = std::max(w, std::fabs(st.x[i] - (sc.particle.x0[i] + st.t * sc.particle.y0[i])));
      w = std::max(w, std::fabs(st.y[i] - sc.particle.y0[i]));
    }
  }
  CHECK(w <= 1e-12);
  CHECK(tr.states.back().t == 10.0);
  CHECK(max_abs(lorentz_acceleration(sc.space, {1, 2, 3, 4}, {1, 0.3, 0, 0})) == 0.0);
}

TEST_CASE("constant electric field: classical Lorentz force") {
  const auto sc = testing::load("minkowski-efield");
  const Vec4 x{0.1, 0.4, -0.2, 0.3}, y{1.2, 0.3, 0.1, -0.2};
  const auto f = evaluate_force(sc.space, x, y);
  CHECK(f.delta_y_dt[0] == doctest::Approx(-kE * y[1]).epsilon(1e-14));
  CHECK(f.delta_y_dt[1] == doctest::Approx(-kE * y[0]).epsilon(1e-14));
  CHECK(f.delta_y_dt[2] == 0.0);
  CHECK(f.delta_y_dt[3] == 0.0);
  CHECK(max_abs(f.correction) == 0.0);
  CHECK(f.force_det == 1.0);
}

TEST_CASE("hyperbolic motion against the closed form") {
  const auto sc = testing::load("minkowski-efield");
  SUBCASE("RK4 over a short interval") {
    const auto tr = integrate(sc.space, sc.particle.x0, sc.particle.y0, 2.0,
                              Method::kRk4, fixed(1e-3));
    double w = 0;
    for (std::size_t n = 0; n < tr.states.size(); n += 50) {
      const auto [x, y] = hyperbolic(tr.states[n].t);
      w = std::max({w, testing::worst(tr.states[n].x, x), testing::worst(tr.states[n].y, y)});
    }
    CHECK(w <= 1e-10);
  }
  SUBCASE("adaptive RK45 to t = 10") {
    StepParams p;
    p.dt = 1e-2;
    const auto tr = integrate(sc.space, sc.particle.x0, sc.particle.y0, 10.0,
                              Method::kRk45, p);
    CHECK(tr.states.back().t == 10.0);
    for (std::size_t n = 1; n < tr.states.size(); ++n) {
      CHECK(tr.states[n].t > tr.states[n - 1].t);
    }
    CHECK(endpoint_error(tr) <= 1e-6);
    CHECK(tr.states.size() < 1000);
  }
}

TEST_CASE("RK4 converges at fourth order") {
  // At dt = 1e-3 the endpoint error is at rounding level, so the ratio is
  // measured with coarse steps where truncation dominates.
  const auto sc = testing::load("minkowski-efield");
  const double e1 = endpoint_error(integrate(sc.space, sc.particle.x0, sc.particle.y0,
                                             10.0, Method::kRk4, fixed(0.4)));
  const double e2 = endpoint_error(integrate(sc.space, sc.particle.x0, sc.particle.y0,
                                             10.0, Method::kRk4, fixed(0.2)));
  const double ratio = e1 / e2;
  CAPTURE(e1);
  CAPTURE(e2);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("implicit force solve matches fixed-point iteration") {
  for (const char* name : {"minkowski-aniso", "randers-aniso"}) {
    CAPTURE(std::string(name));
    const auto sc = testing::load(name);
    for (const auto& p : testing::draws(sc, 10, 3)) {
      const auto e = em::em_tensor(sc.space, p.x, p.y);
      const double k = sc.space.charge_ratio();
      // a = k F^i_h y^h + k Ft^i_a a^a, contracting for small k |Ft|
      Vec4 a{};
      for (int it = 0; it < 200; ++it) {
        Vec4 next{};
        for (int i = 0; i < 4; ++i) {
          for (int j = 0; j < 4; ++j) {
            next[i] += k * e.F_mixed_up[i][j] * p.y[j] + k * e.Ft_mixed_up[i][j] * a[j];
          }
        }
        a = next;
      }
      const Vec4 solved = lorentz_acceleration(sc.space, p.x, p.y);
      for (int i = 0; i < 4; ++i) CHECK(std::fabs(solved[i] - a[i]) <= 1e-10);
    }
  }
}

TEST_CASE("singular force matrix is surfaced") {
  // At y = (1,0,0,0) the mixed block of 0.3 y1^2/F is diag(0, 0.6, 0, 0).
  auto s = space_of(kMinkowski, "0.3*y1^2/sqrt(y0^2 - y1^2 - y2^2 - y3^2)");
  s.q = 1.0 / 0.6;
  CHECK_THROWS_AS(evaluate_force(s, {0, 0, 0, 0}, {1, 0, 0, 0}), SingularForceMatrix);
  s.q = 1.0;
  const auto f = evaluate_force(s, {0, 0, 0, 0}, {1, 0, 0, 0});
  CHECK(f.force_det == doctest::Approx(0.4));
}

TEST_CASE("crossing a singular surface stops the integration") {
  // With q/c = 1 this anisotropic particle is driven onto det(I - Ft) = 0.
  auto sc = testing::load("randers-aniso");
  sc.space.q = 1.0;
  for (Method m : {Method::kRk4, Method::kRk45}) {
    StepParams p;
    p.dt = m == Method::kRk4 ? 1e-3 : 1e-2;
    try {
      integrate(sc.space, sc.particle.x0, sc.particle.y0, 5.0, m, p);
      FAIL("expected an integration error");
    } catch (const IntegrationError& e) {
      CHECK(e.kind() == ErrorKind::kSingularForceMatrix);
      CHECK(e.t() > 1.5);
      CHECK(e.t() < 2.0);
      CHECK(e.partial().states.back().t == e.t());
      CHECK(std::string(e.what()).find("t = ") != std::string::npos);
    }
  }
}

TEST_CASE("domain errors carry the failing parameter") {
  // The metric is undefined from x1 = 0.5004 on; the RK4 stages of the step
  // leaving t = 1 reach x1 = 0.5005.
  const auto s = space_of("sqrt(y0^2 - y1^2 - y2^2 - y3^2) + 0*sqrt(0.5004 - x1)*y0");
  const Vec4 x0{0, 0, 0, 0}, y0{1, 0.5, 0, 0};
  try {
    integrate(s, x0, y0, 2.0, Method::kRk4, fixed(1e-3));
    FAIL("expected an integration error");
  } catch (const IntegrationError& e) {
    CHECK(e.kind() == ErrorKind::kIntegration);
    CHECK(e.t() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.partial().states.size() == 1001);
  }
  StepParams p;
  p.dt = 0.1;
  p.max_rejections = 20;
  try {
    integrate(s, x0, y0, 2.0, Method::kRk45, p);
    FAIL("expected an integration error");
  } catch (const IntegrationError& e) {
    CHECK(e.kind() == ErrorKind::kStepRejectionLimit);
    CHECK(e.t() <= 1.0008);
    CHECK(e.t() > 0.9);
  }
}

TEST_CASE("orthogonality and the two-form residual along trajectories") {
  for (const char* name : {"minkowski-efield", "curved", "randers-efield", "plane-wave",
                           "minkowski-aniso", "randers-aniso"}) {
    CAPTURE(std::string(name));
    const auto sc = testing::load(name);
    StepParams p = sc.integrate.params;
    if (sc.integrate.method == Method::kRk4) p.dt = 1e-2;
    const auto tr = integrate(sc.space, sc.particle.x0, sc.particle.y0, 1.0,
                              sc.integrate.method, p);
    double w = 0;
    for (const auto& st : tr.states) {
      w = std::max({w, std::fabs(st.monitors.ortho_F), std::fabs(st.monitors.ortho_Ftilde),
                    st.monitors.omega_residual});
    }
    CHECK(w <= 1e-8);
  }
}

TEST_CASE("gauge shifts do not change the motion") {
  for (const char* name : {"minkowski-efield", "randers-aniso"}) {
    CAPTURE(std::string(name));
    const auto sc = testing::load(name);
    StepParams p = sc.integrate.params;
    p.dt = 1e-2;
    const auto ref = integrate(sc.space, sc.particle.x0, sc.particle.y0, 2.0, Method::kRk4, p);
    for (const char* l : {"x0*x1", "sin(x2)*exp(0.3*x0)", "x3^3 - x1*cos(x0)"}) {
      const auto shifted = em::gauge_shift(sc.space, expr::ScalarField::parse(l));
      const auto tr = integrate(shifted, sc.particle.x0, sc.particle.y0, 2.0, Method::kRk4, p);
      CHECK(distance(tr.states.back(), ref.states.back()) <= 1e-7);
    }
  }
}

TEST_CASE("endpoints approach the isotropic trajectory linearly in the anisotropy") {
  const auto sc = testing::load("minkowski-aniso");
  const Vec4 yr = sc.reference_direction();
  StepParams p;
  p.dt = 1e-2;
  auto endpoint = [&](const SpaceDef& s) {
    return integrate(s, sc.particle.x0, sc.particle.y0, 2.0, Method::kRk4, p).states.back();
  };
  const auto iso = endpoint(em::isotropic_truncation(sc.space, yr));
  double prev = 0;
  for (double s : {0.4, 0.2, 0.1, 0.05}) {
    const double d = distance(endpoint(em::scale_anisotropy(sc.space, yr, s)), iso);
    CHECK(d > 0.0);
    if (prev > 0) {
      CAPTURE(s);
      CHECK(prev / d == doctest::Approx(2.0).epsilon(0.1));
    }
    prev = d;
  }
}

TEST_CASE("unit speed helper and method names") {
  const auto sc = testing::load("randers");
  const Vec4 y = unit_speed(sc.space, sc.particle.x0, sc.particle.y0);
  CHECK(expr::evaluate(sc.space.F, geometry::make_point(sc.particle.x0, y)) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(unit_speed(sc.space, {0, 0, 0, 0}, {0.1, 1, 0, 0}), Error);
  CHECK(parse_method("rk4") == Method::kRk4);
  CHECK(parse_method("rk4-fixed") == Method::kRk4);
  CHECK(parse_method("rk45-adaptive") == Method::kRk45);
  CHECK_THROWS_AS(parse_method("euler"), Error);
  CHECK(std::string(to_string(Method::kRk45)) == "rk45");
}
