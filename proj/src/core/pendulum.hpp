#pragma once

#include <Eigen/Dense>

#include "core/error.hpp"

namespace mpct {

/// Physical constants of the two-wheeled inverted pendulum.
///
/// The lumped coefficients a, b, c, d of the equation of motion are always
/// recomputed from the primary parameters so they cannot go stale.
struct PendulumParams {
  double m_r = 0.064; ///< wheel mass [kg]
  double M = 0.975;   ///< body mass without wheels [kg]
  double R = 0.05;    ///< wheel radius [m]
  double L = 0.05;    ///< distance from wheel axis to center of mass [m]
  double g = 9.81;    ///< gravitational acceleration [m/s^2]
  double phi0 = 0.0;  ///< offset between center of mass and geometric center [rad]

  double a() const { return (1.5 * m_r + 0.5) * R * R; }
  double b() const { return M * L * L; }
  double c() const { return R * M * L; }
  double d() const { return M * g * L; }

  void validate() const {
    if (!(m_r > 0.0 && M > 0.0 && R > 0.0 && L > 0.0))
      fail(ErrorCode::invalid_argument, "pendulum parameters must be positive");
  }
};

/// State (phi, phi_dot, theta_dot): body tilt, tilt rate, wheel speed.
struct PlantState {
  double phi = 0.0;
  double phi_dot = 0.0;
  double theta_dot = 0.0;

  Eigen::Vector3d vec() const { return {phi, phi_dot, theta_dot}; }
  static PlantState from_vec(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

/// Time derivative of (phi, phi_dot, theta_dot) with commanded wheel
/// acceleration u. Throws on a singular mass-matrix denominator.
Eigen::Vector3d pendulum_dynamics(const PlantState& s, double u, const PendulumParams& p);

/// Classical 4-stage Runge-Kutta step with u held constant over dt.
PlantState rk4_step(const PlantState& s, double u, double dt, const PendulumParams& p);

/// Instantaneous push: increments phi_dot by dv.
PlantState apply_impulse(const PlantState& s, double dv);

} // namespace mpct
