#include "core/lti.hpp"

#include <cmath>

namespace mpct {

void LtiModel::validate() const {
  if (A.rows() != A.cols() || B.rows() != A.rows())
    fail(ErrorCode::invalid_argument, "lti model: inconsistent A/B dimensions");
  if (!(Ts > 0.0)) fail(ErrorCode::invalid_argument, "lti model: Ts must be positive");
  if (!A.allFinite() || !B.allFinite()) fail(ErrorCode::numeric, "lti model: non-finite entries");
  if (x_lb.size() != n() || x_ub.size() != n() || u_lb.size() != m() || u_ub.size() != m())
    fail(ErrorCode::invalid_argument, "lti model: bound vectors have wrong length");
  if (!(x_lb.array() < x_ub.array()).all() || !(u_lb.array() < u_ub.array()).all())
    fail(ErrorCode::invalid_argument, "lti model: lower bounds must be strictly below upper bounds");
}

ContinuousModel linearize_pendulum(const PendulumParams& params,
                                   const Eigen::Vector3d& state_op, double input_op) {
  params.validate();
  const double a = params.a(), b = params.b(), c = params.c(), d = params.d();
  const double phi = state_op[0];
  const double phi_dot = state_op[1];
  const double u = input_op;

  const double s = std::sin(phi + params.phi0);
  const double cc = std::cos(phi + params.phi0);
  const double denom = c * cc + 2.0 * b;
  // Threshold scaled to the coefficient magnitudes involved.
  if (std::abs(denom) <= 1e-12 * (std::abs(c) + 2.0 * std::abs(b) + 1.0))
    fail(ErrorCode::singular, "linearize_pendulum: singular denominator at operating point");

  const double num = c * phi_dot * phi_dot * s + d * s - (2.0 * a + c * cc) * u;

  // d(phi_ddot)/d(phi): quotient rule; denominator depends on phi through cos.
  const double dnum_dphi = c * phi_dot * phi_dot * cc + d * cc + c * s * u;
  const double ddenom_dphi = -c * s;
  const double df2_dphi = (dnum_dphi * denom - num * ddenom_dphi) / (denom * denom);
  const double df2_dphidot = 2.0 * c * phi_dot * s / denom;
  const double df2_du = -(2.0 * a + c * cc) / denom;

  ContinuousModel cm;
  cm.Ac = Eigen::Matrix3d::Zero();
  cm.Ac(0, 1) = 1.0;
  cm.Ac(1, 0) = df2_dphi;
  cm.Ac(1, 1) = df2_dphidot;
  cm.Bc = Eigen::Vector3d{0.0, df2_du, 1.0};
  cm.validate();
  return cm;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M) {
  const auto n = M.rows();
  const double norm = M.lpNorm<Eigen::Infinity>();

  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd S = M / std::ldexp(1.0, squarings);

  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 64; ++k) {
    term = (term * S / static_cast<double>(k)).eval();
    result += term;
    if (term.lpNorm<Eigen::Infinity>() < 1e-16 * std::max(1.0, result.lpNorm<Eigen::Infinity>()))
      break;
  }
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();

  if (!result.allFinite()) fail(ErrorCode::numeric, "matrix_exponential: non-finite result");
  return result;
}

LtiModel discretize_zoh(const ContinuousModel& cm, double Ts) {
  cm.validate();
  if (!(Ts > 0.0)) fail(ErrorCode::invalid_argument, "discretize_zoh: Ts must be positive");

  const int n = cm.n();
  const int m = cm.m();

  // exp([[Ac, Bc], [0, 0]] * Ts) = [[A, B], [0, I]]
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = cm.Ac * Ts;
  aug.topRightCorner(n, m) = cm.Bc * Ts;
  const Eigen::MatrixXd E = matrix_exponential(aug);

  LtiModel model;
  model.A = E.topLeftCorner(n, n);
  model.B = E.topRightCorner(n, m);
  model.Ts = Ts;
  model.x_lb = Eigen::VectorXd::Constant(n, -kInf);
  model.x_ub = Eigen::VectorXd::Constant(n, kInf);
  model.u_lb = Eigen::VectorXd::Constant(m, -kInf);
  model.u_ub = Eigen::VectorXd::Constant(m, kInf);

  if (!model.A.allFinite() || !model.B.allFinite())
    fail(ErrorCode::numeric, "discretize_zoh: non-finite discretization");
  return model;
}

} // namespace mpct
