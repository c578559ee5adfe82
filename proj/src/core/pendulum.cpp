#include "core/pendulum.hpp"

#include <cmath>

namespace mpct {

Eigen::Vector3d pendulum_dynamics(const PlantState& s, double u, const PendulumParams& p) {
  const double a = p.a(), b = p.b(), c = p.c(), d = p.d();
  const double sin_phi = std::sin(s.phi + p.phi0);
  const double cos_phi = std::cos(s.phi + p.phi0);

  const double denom = c * cos_phi + 2.0 * b;
  if (std::abs(denom) <= 1e-12)
    fail(ErrorCode::singular, "pendulum dynamics: singular denominator c*cos(phi+phi0) + 2b");

  const double phi_ddot =
      (c * s.phi_dot * s.phi_dot * sin_phi + d * sin_phi - (2.0 * a + c * cos_phi) * u) / denom;

  return {s.phi_dot, phi_ddot, u};
}

PlantState rk4_step(const PlantState& s, double u, double dt, const PendulumParams& p) {
  if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "rk4_step: dt must be positive");

  const Eigen::Vector3d x0 = s.vec();
  const Eigen::Vector3d k1 = pendulum_dynamics(s, u, p);
  const Eigen::Vector3d k2 = pendulum_dynamics(PlantState::from_vec(x0 + 0.5 * dt * k1), u, p);
  const Eigen::Vector3d k3 = pendulum_dynamics(PlantState::from_vec(x0 + 0.5 * dt * k2), u, p);
  const Eigen::Vector3d k4 = pendulum_dynamics(PlantState::from_vec(x0 + dt * k3), u, p);

  return PlantState::from_vec(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

PlantState apply_impulse(const PlantState& s, double dv) {
  PlantState out = s;
  out.phi_dot += dv;
  return out;
}

} // namespace mpct
