#include "finsler/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "finsler/em.hpp"
#include "finsler/expr/eval.hpp"

namespace finsler::dynamics {

using State = std::array<double, 2 * kDim>;

const char* to_string(Method m) {
  return m == Method::kRk4 ? "rk4" : "rk45";
}

Method parse_method(const std::string& text) {
  if (text == "rk4" || text == "rk4-fixed") return Method::kRk4;
  if (text == "rk45" || text == "rk45-adaptive") return Method::kRk45;
  throw Error(ErrorKind::kInvalidArgument, "unknown method '" + text + "'");
}

Force evaluate_force(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  Force f;
  if (space.L1.is_zero()) {
    const auto geo = geometry::build_geometry(space, x, y, 2);
    const Vec4 G = values(geo.G);
    for (int i = 0; i < kDim; ++i) f.dy_dt[i] = -2.0 * G[i];
    f.monitors.F_value = geo.F.value();
    return f;
  }

  const auto geo = geometry::build_geometry(space, x, y, 3);
  const auto e = em::build_em(space, geo, 2);
  const double k = space.charge_ratio();
  const Mat4 g = values(geo.g);
  const Mat4 Fm = values(e.F_mixed);
  const Mat4 Ftm = values(e.Ft_mixed);

  Mat4 M = identity4();
  for (int i = 0; i < kDim; ++i) {
    for (int a = 0; a < kDim; ++a) M[i][a] -= k * Ftm[i][a];
  }
  const Lu<double> lu(M);
  const double det = lu.ok ? lu.determinant() : 0.0;
  if (std::fabs(det) < kSingularForceDet) throw SingularForceMatrix(det);
  f.force_det = det;

  const Vec4 traditional = mat_vec(Fm, y);  // F^i = F^i_h y^h
  for (int i = 0; i < kDim; ++i) f.lorentz[i] = k * traditional[i];
  f.delta_y_dt = lu.solve(f.lorentz);
  const Vec4 ft = mat_vec(Ftm, f.delta_y_dt);  // Ft^i
  for (int i = 0; i < kDim; ++i) f.correction[i] = k * ft[i];

  const Vec4 G = values(geo.G);
  for (int i = 0; i < kDim; ++i) f.dy_dt[i] = f.delta_y_dt[i] - 2.0 * G[i];

  const Vec4 gy = mat_vec(g, y);
  f.monitors.F_value = geo.F.value();
  f.monitors.ortho_F = dot(gy, traditional);
  f.monitors.ortho_Ftilde = dot(gy, ft);

  const Mat4 F = values(e.F_hh);
  const Mat4 Ft = values(e.F_hv);
  double worst = 0.0;
  for (int i = 0; i < kDim; ++i) {
    double r = 0.0;
    for (int j = 0; j < kDim; ++j) {
      r += k * F[i][j] * y[j] + (k * Ft[i][j] - g[i][j]) * f.delta_y_dt[j];
    }
    worst = std::max(worst, std::fabs(r));
  }
  f.monitors.omega_residual = worst;
  return f;
}

Vec4 lorentz_acceleration(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  return evaluate_force(space, x, y).delta_y_dt;
}

Vec4 unit_speed(const SpaceDef& space, const Vec4& x, const Vec4& y) {
  const double F = expr::evaluate(space.F, geometry::make_point(x, y));
  if (!(F > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "unit-speed normalization needs F(x, y) > 0");
  }
  Vec4 out = y;
  for (double& e : out) e /= F;
  return out;
}

namespace {

Vec4 head(const State& s) { return {s[0], s[1], s[2], s[3]}; }
Vec4 tail(const State& s) { return {s[4], s[5], s[6], s[7]}; }

State join(const Vec4& x, const Vec4& y) {
  return {x[0], x[1], x[2], x[3], y[0], y[1], y[2], y[3]};
}

State rhs(const SpaceDef& space, const State& s) {
  const Vec4 y = tail(s);
  return join(y, evaluate_force(space, head(s), y).dy_dt);
}

State axpy(const State& s, double h,
           std::initializer_list<std::pair<double, const State*>> terms) {
  State out = s;
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

TrajectoryState make_state(const SpaceDef& space, double t, const State& s,
                           double& det) {
  const Force f = evaluate_force(space, head(s), tail(s));
  det = f.force_det;
  return {t, head(s), tail(s), f.delta_y_dt, f.monitors};
}

// Returns the increment; the caller adds it with compensated summation.
State rk4_increment(const SpaceDef& space, const State& s, double h) {
  const State k1 = rhs(space, s);
  const State k2 = rhs(space, axpy(s, h, {{0.5, &k1}}));
  const State k3 = rhs(space, axpy(s, h, {{0.5, &k2}}));
  const State k4 = rhs(space, axpy(s, h, {{1.0, &k3}}));
  return axpy(State{}, h, {{1.0 / 6, &k1}, {1.0 / 3, &k2}, {1.0 / 3, &k3},
                           {1.0 / 6, &k4}});
}

// Kahan summation of the state: long fixed-step runs otherwise accumulate
// one rounding per step in x.
struct CompensatedState {
  State value{};
  State carry{};

  State plus(const State& inc, State& carry_out) const {
    State out{};
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double y = inc[i] - carry[i];
      out[i] = value[i] + y;
      carry_out[i] = (out[i] - value[i]) - y;
    }
    return out;
  }
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Dp45Result {
  State increment;
  State next;
  State k_last;
  double error_norm;
};

Dp45Result dp45_step(const SpaceDef& space, const State& s, const State& k1,
                     double h, const StepParams& p) {
  (void)c2, (void)c3, (void)c4, (void)c5;
  const State k2 = rhs(space, axpy(s, h, {{a21, &k1}}));
  const State k3 = rhs(space, axpy(s, h, {{a31, &k1}, {a32, &k2}}));
  const State k4 = rhs(space, axpy(s, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const State k5 = rhs(space, axpy(s, h, {{a51, &k1}, {a52, &k2}, {a53, &k3},
                                          {a54, &k4}}));
  const State k6 = rhs(space, axpy(s, h, {{a61, &k1}, {a62, &k2}, {a63, &k3},
                                          {a64, &k4}, {a65, &k5}}));
  const State increment = axpy(State{}, h, {{b1, &k1}, {b3, &k3}, {b4, &k4},
                                            {b5, &k5}, {b6, &k6}});
  const State next = axpy(s, 1.0, {{1.0, &increment}});
  const State k7 = rhs(space, next);
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                            e6 * k6[i] + e7 * k7[i]);
    const double scale =
        p.atol + p.rtol * std::max(std::fabs(s[i]), std::fabs(next[i]));
    sum += (err / scale) * (err / scale);
  }
  return {increment, next, k7, std::sqrt(sum / static_cast<double>(s.size()))};
}

}  // namespace

Trajectory integrate(const SpaceDef& space, const Vec4& x0, const Vec4& y0,
                     double t_end, Method method, const StepParams& params) {
  if (!(params.dt > 0.0) || !(t_end >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "integration needs dt > 0 and t_end >= 0");
  }
  Trajectory traj;
  traj.method = method;
  traj.params = params;
  State s = join(x0, y0);
  State carry{};
  const auto advance = [&](const State& increment) {
    State next_carry{};
    s = CompensatedState{s, carry}.plus(increment, next_carry);
    carry = next_carry;
  };
  double t = 0.0;

  const auto fail = [&](const Error& e) -> IntegrationError {
    const ErrorKind kind = e.kind() == ErrorKind::kStepRejectionLimit ||
                                   e.kind() == ErrorKind::kSingularForceMatrix
                               ? e.kind()
                               : ErrorKind::kIntegration;
    return IntegrationError(kind, t, e.what(), traj);
  };

  double det = 1.0;
  const auto push = [&](double t_new) {
    const double before = det;
    traj.states.push_back(make_state(space, t_new, s, det));
    if (before * det < 0.0) {
      traj.states.pop_back();
      throw Error(ErrorKind::kSingularForceMatrix,
                  "det(I - (q/c) Ftilde) changed sign before t = " +
                      std::to_string(t_new));
    }
  };

  try {
    push(0.0);
  } catch (const Error& e) {
    throw fail(e);
  }

  if (method == Method::kRk4) {
    const auto steps =
        static_cast<std::size_t>(std::ceil(t_end / params.dt - 1e-9));
    if (steps > params.max_steps) {
      throw Error(ErrorKind::kInvalidArgument, "too many fixed steps");
    }
    traj.states.reserve(steps + 1);
    for (std::size_t n = 1; n <= steps; ++n) {
      const double t_next =
          n == steps ? t_end : static_cast<double>(n) * params.dt;
      try {
        advance(rk4_increment(space, s, t_next - t));
        push(t_next);
      } catch (const Error& e) {
        throw fail(e);
      }
      t = t_next;
    }
    return traj;
  }

  double h = std::min(params.dt, t_end);
  State k1;
  try {
    k1 = rhs(space, s);
  } catch (const Error& e) {
    throw fail(e);
  }
  int rejections = 0;
  std::size_t accepted = 0;
  while (t < t_end) {
    if (accepted >= params.max_steps) {
      throw fail(Error(ErrorKind::kStepRejectionLimit, "step budget exhausted"));
    }
    h = std::min(h, t_end - t);
    Dp45Result step;
    try {
      step = dp45_step(space, s, k1, h, params);
    } catch (const Error& e) {
      // Treat an undefined stage as a rejected step.
      step.error_norm = std::numeric_limits<double>::infinity();
      if (++rejections > params.max_rejections) throw fail(e);
      h *= 0.25;
      continue;
    }
    if (step.error_norm <= 1.0) {
      const double t_next = (t_end - t - h) <= 1e-14 * std::max(1.0, t_end)
                                ? t_end
                                : t + h;
      advance(step.increment);
      k1 = step.k_last;
      try {
        push(t_next);
      } catch (const Error& e) {
        throw fail(e);
      }
      t = t_next;
      ++accepted;
      rejections = 0;
      const double factor =
          step.error_norm == 0.0
              ? 5.0
              : std::clamp(0.9 * std::pow(step.error_norm, -0.2), 0.2, 5.0);
      h *= factor;
    } else {
      if (++rejections > params.max_rejections) {
        throw fail(Error(ErrorKind::kStepRejectionLimit,
                         "too many consecutive step rejections"));
      }
      h *= std::clamp(0.9 * std::pow(step.error_norm, -0.2), 0.1, 0.9);
    }
    if (h < 1e-14 * std::max(1.0, std::fabs(t))) {
      throw fail(Error(ErrorKind::kStepRejectionLimit, "step size underflow"));
    }
  }
  return traj;
}

}  // namespace finsler::dynamics
