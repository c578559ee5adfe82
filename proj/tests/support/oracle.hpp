#pragma once

#include <Eigen/Dense>

#include "core/problem.hpp"

namespace mpct::oracle {

/// The tracking QP over the stacked variable v = (z1, z2, z3), written as a
/// plain dense QP: 0.5 v'Hv + q'v subject to Aeq v = beq and lb <= v <= ub.
/// Assembled with its own loops; shares nothing with the production solver.
struct DenseQp {
  Eigen::MatrixXd H;
  Eigen::VectorXd q;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;
  Eigen::VectorXd lb, ub;
  int n = 0, m = 0, N = 0;

  int dim() const { return static_cast<int>(H.rows()); }
  int z1_offset() const { return 0; }
  int z2_offset() const { return (N + 1) * (n + m); }
  int z3_offset() const { return z2_offset() + n + m; }
  int u0_index() const { return n; }

  Eigen::VectorXd u0(const Eigen::VectorXd& v) const { return v.segment(u0_index(), m); }
  Eigen::VectorXd xs(const Eigen::VectorXd& v) const { return v.segment(z2_offset(), n); }
  Eigen::VectorXd us(const Eigen::VectorXd& v) const { return v.segment(z2_offset() + n, m); }
};

DenseQp build_tracking_qp(const MpctProblem& prob, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& x_ref, const Eigen::VectorXd& u_ref);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double comp_slack = 0.0;

  double worst() const { return std::max(stationarity, std::max(primal, comp_slack)); }
};

/// KKT residuals of (v, y) where y stacks the equality-row duals followed by
/// the box duals (one per variable, positive at the upper bound).
KktResiduals kkt_residuals(const DenseQp& qp, const Eigen::VectorXd& v, const Eigen::VectorXd& y);

struct OracleOptions {
  double tol = 1e-8;       // KKT residual target
  long max_iters = 1000000;
  double sigma = 1e-6;
  double alpha = 1.6;
  double rho_eq = 1e3;
  double rho_box = 10.0;
};

enum class OracleStatus {
  solved,
  inconclusive,      // iteration cap reached without a certificate either way
  primal_infeasible, // diverging duals produced an infeasibility certificate
};

struct OracleSolution {
  Eigen::VectorXd v;
  Eigen::VectorXd y; // equality duals then box duals
  long iters = 0;
  OracleStatus status = OracleStatus::inconclusive;
  KktResiduals kkt;

  bool converged() const { return status == OracleStatus::solved; }
};

/// Two-block splitting over Ruiz-equilibrated data with a constant dense
/// factorization, over-relaxation and active-set polishing. Detects primal
/// infeasibility from the diverging dual direction.
OracleSolution oracle_solve(const DenseQp& qp, const OracleOptions& opts = {});

} // namespace mpct::oracle
