#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "core/error.hpp"
#include "core/linalg.hpp"
#include "core/lti.hpp"

namespace mpct {

/// Tracking-MPC problem specification: prediction model, horizon, cost
/// matrices (Q, R on the predicted trajectory, T, S on the artificial
/// reference) and the bound tightening applied to the artificial reference.
struct MpctProblem {
  LtiModel model;
  int N = 0;
  Eigen::MatrixXd Q, R, T, S;
  Eigen::VectorXd eps_x, eps_u;

  int n() const { return model.n(); }
  int m() const { return model.m(); }

  /// Checks all invariants (N >= 2, SPD costs via Cholesky, tightening
  /// positive and below half the box width). Throws on violation.
  void validate() const;
};

/// Penalty weights for the coupling constraints: rho_large on the rows
/// singled out for stronger penalization, rho_base everywhere else.
struct PenaltySpec {
  double rho_base = 5.0;
  double rho_large = 1000.0;

  void validate() const {
    if (!(rho_base > 0.0) || !(rho_large > 0.0))
      fail(ErrorCode::invalid_argument, "penalty weights must be positive");
  }
};

/// Row ordering of the coupling equality constraints
///   [initial (n) | per-stage x/u coupling, stages 0..N | terminal x (n) | terminal u (m)]
/// and the stage-major ordering (x_i, u_i) shared by z1 and z3.
class EqualityLayout {
public:
  EqualityLayout() = default;
  EqualityLayout(int n, int m, int N) : n_(n), m_(m), N_(N) {}

  int n() const { return n_; }
  int m() const { return m_; }
  int horizon() const { return N_; }
  int stage_vars() const { return n_ + m_; }
  int z1_size() const { return (N_ + 1) * stage_vars(); }
  int z2_size() const { return stage_vars(); }
  int z3_size() const { return z1_size(); }
  int rows() const { return 2 * n_ + m_ + (N_ + 1) * stage_vars(); }

  int initial_row() const { return 0; }
  int coupling_x_row(int stage) const { return n_ + stage * stage_vars(); }
  int coupling_u_row(int stage) const { return coupling_x_row(stage) + n_; }
  int terminal_x_row() const { return n_ + (N_ + 1) * stage_vars(); }
  int terminal_u_row() const { return terminal_x_row() + n_; }

  int x_offset(int stage) const { return stage * stage_vars(); }
  int u_offset(int stage) const { return x_offset(stage) + n_; }

private:
  int n_ = 0, m_ = 0, N_ = 0;
};

/// Right-hand side of the coupling constraints: zero except the initial
/// block, which carries the current state.
Eigen::VectorXd assemble_b(const EqualityLayout& layout, const Eigen::VectorXd& x);

/// Penalty vector (the diagonal of P) over the coupling rows.
Eigen::VectorXd assemble_rho(const EqualityLayout& layout, const PenaltySpec& pen);

/// Everything the online solver needs, computed once. Immutable after
/// construction; may be shared read-only across solver instances.
struct OfflineData {
  int n = 0, m = 0, N = 0;
  EqualityLayout layout;

  Eigen::MatrixXd A, B;   // prediction model
  Eigen::MatrixXd T, S;   // reference-cost matrices (linear-term map)
  Eigen::VectorXd rho;    // coupling penalties, length rows()
  Eigen::VectorXd lb1, ub1; // z1 box (+-inf where unconstrained)
  Eigen::VectorXd d1;     // diag(C1^T P C1), strictly positive
  Eigen::VectorXd eps_x, eps_u;

  // Constant factorization of [[diag(T,S) + C2^T P C2, E^T], [E, 0]]
  // with E = [A - I, B].
  SymmetricIndefiniteLdlt steady_state_kkt;

  // Stage-wise Hhat = diag(Q,R,...,Q,R) + diag(rho over coupling rows).
  bool hhat_diagonal = false;
  Eigen::VectorXd hhat_inv_diag;                 // fast path (diagonal Q, R)
  std::vector<Eigen::LLT<Eigen::MatrixXd>> hhat_x_llt; // general path, stages 0..N
  std::vector<Eigen::LLT<Eigen::MatrixXd>> hhat_u_llt;

  // Cholesky of W = G Hhat^{-1} G^T (block tridiagonal, N blocks of size n).
  BlockTridiagonalCholesky w_chol;

  /// y = Hhat^{-1} v over the stage-major z3 layout.
  Eigen::VectorXd apply_hhat_inv(const Eigen::VectorXd& v) const;

  /// Solves the steady-state KKT system for linear term q2 (length n+m) and
  /// returns the primal part (x_s, u_s).
  Eigen::VectorXd solve_steady_state(const Eigen::VectorXd& q2) const;

  /// Linear reference term (T x_r, S u_r).
  Eigen::VectorXd reference_term(const Eigen::VectorXd& x_ref, const Eigen::VectorXd& u_ref) const;
};

/// Offline phase: penalty vector, z1 bounds, d1 and the two constant
/// factorizations. Throws on Assumption-1 rank failures or factorization
/// breakdown.
std::shared_ptr<const OfflineData> build_offline(const MpctProblem& prob, const PenaltySpec& pen);

/// Dense replicas of the splitting ingredients, for validation and tests.
struct DenseParts {
  Eigen::MatrixXd C1, C2, C3;   // rows() x {z1, z2, z3} sizes
  Eigen::VectorXd b_template;   // zero vector; fill initial block with x
  Eigen::MatrixXd H2, H3;       // diag(T,S) and diag(Q,R,...,Q,R)
  Eigen::MatrixXd E;            // [A - I, B]
  Eigen::MatrixXd G;            // stacked dynamics over the z3 layout
  Eigen::VectorXd rho;
  Eigen::VectorXd lb1, ub1;
};

DenseParts assemble_dense(const MpctProblem& prob, const PenaltySpec& pen);

/// z1 box bounds: x_0 free, interior stages at the model box, stage N at the
/// tightened box.
void assemble_z1_bounds(const MpctProblem& prob, Eigen::VectorXd& lb1, Eigen::VectorXd& ub1);

/// Structural checks on the dense replicas: rank conditions of the
/// splitting, exact diagonality of the penalized products Ci^T P Ci, block
/// tridiagonality and positive definiteness of W, and whether the offline
/// build goes through.
struct ValidationReport {
  int n = 0, m = 0, N = 0, rows = 0;
  int rank_c1 = 0, rank_c1_expected = 0;
  int rank_c2 = 0, rank_c2_expected = 0;
  int rank_e = 0, rank_e_expected = 0;
  bool c1_product_diagonal = false;
  bool c2_product_diagonal = false;
  bool c3_product_diagonal = false;
  bool w_block_tridiagonal = false;
  bool w_positive_definite = false;
  bool offline_ok = false;
  std::string offline_error;

  bool ok() const {
    return rank_c1 == rank_c1_expected && rank_c2 == rank_c2_expected &&
           rank_e == rank_e_expected && c1_product_diagonal && c2_product_diagonal &&
           c3_product_diagonal && w_block_tridiagonal && w_positive_definite && offline_ok;
  }
};

ValidationReport validate_problem(const MpctProblem& prob, const PenaltySpec& pen);

} // namespace mpct
