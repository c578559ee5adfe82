#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>

#include "core/lti.hpp"
#include "core/pendulum.hpp"
#include "core/problem.hpp"

namespace mpct::testing {

/// The case-study controller: N=12, Q=5I, R=1, T=1000I, S=5, 20 ms model
/// linearized at the upright position, box (pi/2, 4, 60) on the state and
/// 80 on the input.
inline MpctProblem pendulum_problem(double eps = 1e-6) {
  const PendulumParams params;
  const ContinuousModel cm = linearize_pendulum(params, Eigen::Vector3d::Zero(), 0.0);
  LtiModel model = discretize_zoh(cm, 0.02);
  model.x_ub = Eigen::Vector3d(M_PI / 2.0, 4.0, 60.0);
  model.x_lb = -model.x_ub;
  model.u_ub = Eigen::VectorXd::Constant(1, 80.0);
  model.u_lb = -model.u_ub;

  MpctProblem prob;
  prob.model = model;
  prob.N = 12;
  prob.Q = 5.0 * Eigen::Matrix3d::Identity();
  prob.R = Eigen::MatrixXd::Constant(1, 1, 1.0);
  prob.T = 1000.0 * Eigen::Matrix3d::Identity();
  prob.S = Eigen::MatrixXd::Constant(1, 1, 5.0);
  prob.eps_x = Eigen::VectorXd::Constant(3, eps);
  prob.eps_u = Eigen::VectorXd::Constant(1, eps);
  return prob;
}

inline Eigen::MatrixXd random_spd(int dim, std::mt19937_64& rng, bool diagonal = false) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.2, 3.0);
  if (diagonal) {
    Eigen::VectorXd d(dim);
    for (int i = 0; i < dim; ++i) d[i] = uni(rng);
    return d.asDiagonal();
  }
  Eigen::MatrixXd M(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) M(i, j) = normal(rng);
  return M * M.transpose() + 0.3 * Eigen::MatrixXd::Identity(dim, dim);
}

/// Random well-posed tracking problem with bounds straddling the origin.
inline MpctProblem random_problem(std::mt19937_64& rng, int n, int m, int N,
                                  bool diagonal_costs = false) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> width(0.5, 4.0);

  MpctProblem prob;
  prob.model.A.resize(n, n);
  prob.model.B.resize(n, m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) prob.model.A(i, j) = normal(rng);
    for (int j = 0; j < m; ++j) prob.model.B(i, j) = normal(rng);
  }
  // Pull the spectral radius toward 1 so instances are neither trivial nor
  // wildly unstable.
  const double radius = prob.model.A.eigenvalues().cwiseAbs().maxCoeff();
  if (radius > 1e-6) prob.model.A *= (0.6 + 0.6 * std::uniform_real_distribution<double>(0.0, 1.0)(rng)) / radius;
  prob.model.Ts = 0.02;

  prob.model.x_ub.resize(n);
  prob.model.u_ub.resize(m);
  for (int i = 0; i < n; ++i) prob.model.x_ub[i] = width(rng);
  for (int i = 0; i < m; ++i) prob.model.u_ub[i] = width(rng);
  prob.model.x_lb = -prob.model.x_ub;
  prob.model.u_lb = -prob.model.u_ub;

  prob.N = N;
  prob.Q = random_spd(n, rng, diagonal_costs);
  prob.R = random_spd(m, rng, diagonal_costs);
  prob.T = random_spd(n, rng, diagonal_costs);
  prob.S = random_spd(m, rng, diagonal_costs);
  prob.eps_x = Eigen::VectorXd::Constant(n, 1e-4);
  prob.eps_u = Eigen::VectorXd::Constant(m, 1e-4);
  return prob;
}

/// Central finite differences of f at x with the given step.
inline Eigen::MatrixXd numerical_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double step = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    J.col(j) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return J;
}

/// Fixed-step RK4 integration of x' = Ac x + Bc u with constant u.
/// Independent of the production integrator (that one is pendulum-specific).
inline Eigen::VectorXd integrate_lti(const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc,
                                     const Eigen::VectorXd& x0, const Eigen::VectorXd& u,
                                     double T, double dt) {
  Eigen::VectorXd x = x0;
  const auto f = [&](const Eigen::VectorXd& xi) -> Eigen::VectorXd { return Ac * xi + Bc * u; };
  const long steps = std::lround(T / dt);
  for (long k = 0; k < steps; ++k) {
    const Eigen::VectorXd k1 = f(x);
    const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = f(x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

} // namespace mpct::testing
