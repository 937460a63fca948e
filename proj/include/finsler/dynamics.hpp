#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "finsler/error.hpp"
#include "finsler/geometry.hpp"
#include "finsler/tensor.hpp"

namespace finsler::dynamics {

using geometry::SpaceDef;

struct Monitors {
  double F_value = 0.0;
  /// g_ij F^i y^j with F^i = F^i_h y^h
  double ortho_F = 0.0;
  /// g_ij Ft^i y^j with Ft^i = Ft^i_a (delta y^a / dt)
  double ortho_Ftilde = 0.0;
  /// max_i |omega_ij y^j + omega~_ia delta y^a/dt|
  double omega_residual = 0.0;
};

/// Right-hand side of the charged-particle equations at one state.
struct Force {
  /// delta y / dt, the covariant acceleration
  Vec4 delta_y_dt{};
  /// dy/dt = delta y/dt - 2 G
  Vec4 dy_dt{};
  /// (q/c) F^i_h y^h
  Vec4 lorentz{};
  /// (q/c) Ft^i_a delta y^a / dt
  Vec4 correction{};
  /// det(I - (q/c) Ft^i_a); 1 when there is no field
  double force_det = 1.0;
  Monitors monitors;
};

inline constexpr double kSingularForceDet = 1e-12;

/// Solves (I - (q/c) Ft^i_a) a = (q/c) F^i_h y^h exactly.
Vec4 lorentz_acceleration(const SpaceDef& space, const Vec4& x, const Vec4& y);

Force evaluate_force(const SpaceDef& space, const Vec4& x, const Vec4& y);

enum class Method { kRk4, kRk45 };

const char* to_string(Method m);
Method parse_method(const std::string& text);

struct StepParams {
  /// Fixed step for RK4; initial trial step for RK45.
  double dt = 1e-3;
  double rtol = 1e-8;
  double atol = 1e-9;
  int max_rejections = 60;
  std::size_t max_steps = 50'000'000;
};

struct TrajectoryState {
  double t = 0.0;
  Vec4 x{};
  Vec4 y{};
  Vec4 delta_y_dt{};
  Monitors monitors;
};

struct Trajectory {
  std::vector<TrajectoryState> states;
  Method method = Method::kRk4;
  StepParams params;
};

/// Raised when a step cannot be completed; carries the accepted prefix.
class IntegrationError : public Error {
 public:
  IntegrationError(ErrorKind kind, double t, const std::string& cause,
                   Trajectory partial)
      : Error(kind, "integration failed at t = " + std::to_string(t) + ": " +
                        cause),
        t_(t),
        partial_(std::move(partial)) {}
  double t() const noexcept { return t_; }
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  double t_;
  Trajectory partial_;
};

/// Integrates from t = 0 to t_end. A sign change of det(I - (q/c) Ft)
/// between accepted states means the path crossed a point where the
/// implicit force law is singular; that is raised as SingularForceMatrix.
Trajectory integrate(const SpaceDef& space, const Vec4& x0, const Vec4& y0,
                     double t_end, Method method, const StepParams& params);

/// y scaled so that F(x, y) = 1.
Vec4 unit_speed(const SpaceDef& space, const Vec4& x, const Vec4& y);

}  // namespace finsler::dynamics
