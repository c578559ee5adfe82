#pragma once

#include <Eigen/Dense>

#include "core/problem.hpp"

namespace mpct {

struct SolveOptions {
  double tol = 1e-3;
  int max_iters = 4000;
  bool warm_start = true;

  void validate() const {
    if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "solve options: tol must be positive");
    if (max_iters < 1) fail(ErrorCode::invalid_argument, "solve options: max_iters must be >= 1");
  }
};

enum class SolveStatus { converged, max_iters_reached };

/// Solver iterates. A cold state is all zeros; a warm start reuses the state
/// left behind by the previous solve unchanged (no time-shifting).
struct SolverState {
  Eigen::VectorXd z1, z2, z3, lambda;
  Eigen::VectorXd z2_prev, z3_prev;
  long k = 0; // iterations performed in the most recent solve

  // Scratch kept across iterations to avoid per-iteration allocation.
  Eigen::VectorXd scratch_rows, gamma, q2, q3, hinv_q3, mu, gt_mu;
};

SolverState make_cold_state(const OfflineData& off);

struct Solution {
  Eigen::VectorXd u0;
  Eigen::VectorXd z1, z2, z3, lambda;
  int iters = 0;
  SolveStatus status = SolveStatus::max_iters_reached;
  double residual_inf = 0.0;
};

struct ResidualNorms {
  double primal_inf = 0.0;
  double dz2_inf = 0.0;
  double dz3_inf = 0.0;
};

/// One full iteration: z1/z2/z3 minimizations, coupling residual, dual
/// update. Exposed for diagnostics and tests; solve() drives it.
void eadmm_step(const OfflineData& off, const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref,
                const Eigen::VectorXd& u_ref, SolverState& state);

/// Runs the iteration until the residual and both iterate deltas drop below
/// tol in the same iteration, or max_iters is hit. Throws
/// ErrorCode::divergence if an iterate becomes non-finite.
Solution solve(const OfflineData& off, const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref,
               const Eigen::VectorXd& u_ref, SolverState& state, const SolveOptions& opts);

/// The three exit-condition quantities, recomputed from the state exactly as
/// the iteration computes them.
ResidualNorms residual_norms(const SolverState& state, const OfflineData& off,
                             const Eigen::VectorXd& x);

/// Coupling residual C1 z1 + C2 z2 + C3 z3 - b.
Eigen::VectorXd coupling_residual(const OfflineData& off, const Eigen::VectorXd& z1,
                                  const Eigen::VectorXd& z2, const Eigen::VectorXd& z3,
                                  const Eigen::VectorXd& x);

} // namespace mpct
