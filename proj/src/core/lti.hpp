#pragma once

#include <Eigen/Dense>
#include <limits>

#include "core/error.hpp"
#include "core/pendulum.hpp"

namespace mpct {

/// Continuous-time linear model x' = Ac x + Bc u.
struct ContinuousModel {
  Eigen::MatrixXd Ac;
  Eigen::MatrixXd Bc;

  int n() const { return static_cast<int>(Ac.rows()); }
  int m() const { return static_cast<int>(Bc.cols()); }

  void validate() const {
    if (Ac.rows() != Ac.cols() || Bc.rows() != Ac.rows())
      fail(ErrorCode::invalid_argument, "continuous model: inconsistent dimensions");
    if (!Ac.allFinite() || !Bc.allFinite())
      fail(ErrorCode::numeric, "continuous model: non-finite entries");
  }
};

/// Discrete-time prediction model x_{k+1} = A x_k + B u_k with box bounds.
/// Bounds default to +-inf until attached.
struct LtiModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  double Ts = 0.0;
  Eigen::VectorXd x_lb, x_ub;
  Eigen::VectorXd u_lb, u_ub;

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }

  void validate() const;
};

/// Jacobians of the pendulum dynamics at (state, input) = operating point.
/// State ordering (phi, phi_dot, theta_dot), input theta_ddot.
ContinuousModel linearize_pendulum(const PendulumParams& params,
                                   const Eigen::Vector3d& state_op, double input_op);

/// Zero-order-hold discretization of cm with sample time Ts. Only A, B and
/// Ts of the result are populated; bounds stay at +-inf.
LtiModel discretize_zoh(const ContinuousModel& cm, double Ts);

/// Matrix exponential by scaling-and-squaring with a truncated Taylor series
/// (terms added until their norm drops below 1e-16 relative).
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace mpct
