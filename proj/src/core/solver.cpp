#include "core/solver.hpp"

#include <cmath>
#include <string>

namespace mpct {

namespace {

// out += C1 z1 over the coupling-row layout.
void add_c1(const EqualityLayout& L, const Eigen::VectorXd& z1, Eigen::VectorXd& out) {
  const int n = L.n(), m = L.m(), N = L.horizon();
  out.segment(L.initial_row(), n) += z1.segment(L.x_offset(0), n);
  for (int i = 0; i <= N; ++i) {
    out.segment(L.coupling_x_row(i), n) -= z1.segment(L.x_offset(i), n);
    out.segment(L.coupling_u_row(i), m) -= z1.segment(L.u_offset(i), m);
  }
  out.segment(L.terminal_x_row(), n) += z1.segment(L.x_offset(N), n);
  out.segment(L.terminal_u_row(), m) += z1.segment(L.u_offset(N), m);
}

void add_c2(const EqualityLayout& L, const Eigen::VectorXd& z2, Eigen::VectorXd& out) {
  const int n = L.n(), m = L.m(), N = L.horizon();
  for (int i = 0; i <= N; ++i) {
    out.segment(L.coupling_x_row(i), n) += z2.head(n);
    out.segment(L.coupling_u_row(i), m) += z2.tail(m);
  }
  out.segment(L.terminal_x_row(), n) -= z2.head(n);
  out.segment(L.terminal_u_row(), m) -= z2.tail(m);
}

void add_c3(const EqualityLayout& L, const Eigen::VectorXd& z3, Eigen::VectorXd& out) {
  const int n = L.n(), m = L.m(), N = L.horizon();
  for (int i = 0; i <= N; ++i) {
    out.segment(L.coupling_x_row(i), n) += z3.segment(L.x_offset(i), n);
    out.segment(L.coupling_u_row(i), m) += z3.segment(L.u_offset(i), m);
  }
}

Eigen::VectorXd c1_transpose(const EqualityLayout& L, const Eigen::VectorXd& v) {
  const int n = L.n(), m = L.m(), N = L.horizon();
  Eigen::VectorXd out(L.z1_size());
  for (int i = 0; i <= N; ++i) {
    out.segment(L.x_offset(i), n) = -v.segment(L.coupling_x_row(i), n);
    out.segment(L.u_offset(i), m) = -v.segment(L.coupling_u_row(i), m);
  }
  out.segment(L.x_offset(0), n) += v.segment(L.initial_row(), n);
  out.segment(L.x_offset(N), n) += v.segment(L.terminal_x_row(), n);
  out.segment(L.u_offset(N), m) += v.segment(L.terminal_u_row(), m);
  return out;
}

Eigen::VectorXd c2_transpose(const EqualityLayout& L, const Eigen::VectorXd& v) {
  const int n = L.n(), m = L.m(), N = L.horizon();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(L.z2_size());
  for (int i = 0; i <= N; ++i) {
    out.head(n) += v.segment(L.coupling_x_row(i), n);
    out.tail(m) += v.segment(L.coupling_u_row(i), m);
  }
  out.head(n) -= v.segment(L.terminal_x_row(), n);
  out.tail(m) -= v.segment(L.terminal_u_row(), m);
  return out;
}

void c3_transpose(const EqualityLayout& L, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  const int n = L.n(), m = L.m(), N = L.horizon();
  for (int i = 0; i <= N; ++i) {
    out.segment(L.x_offset(i), n) = v.segment(L.coupling_x_row(i), n);
    out.segment(L.u_offset(i), m) = v.segment(L.coupling_u_row(i), m);
  }
}

// mu has one n-block per dynamics constraint: out = G z3.
void g_times(const OfflineData& off, const Eigen::VectorXd& z3, Eigen::VectorXd& out) {
  const EqualityLayout& L = off.layout;
  for (int i = 0; i < off.N; ++i)
    out.segment(i * off.n, off.n) = off.A * z3.segment(L.x_offset(i), off.n) +
                                    off.B * z3.segment(L.u_offset(i), off.m) -
                                    z3.segment(L.x_offset(i + 1), off.n);
}

void g_transpose(const OfflineData& off, const Eigen::VectorXd& mu, Eigen::VectorXd& out) {
  const EqualityLayout& L = off.layout;
  out.setZero();
  for (int i = 0; i < off.N; ++i) {
    out.segment(L.x_offset(i), off.n) += off.A.transpose() * mu.segment(i * off.n, off.n);
    out.segment(L.u_offset(i), off.m) += off.B.transpose() * mu.segment(i * off.n, off.n);
    out.segment(L.x_offset(i + 1), off.n) -= mu.segment(i * off.n, off.n);
  }
}

// v = lambda + P (sum of the given C-products - b). The b term only touches
// the initial block.
void penalized_dual(const OfflineData& off, const SolverState& st, const Eigen::VectorXd& x,
                    bool with_z1, bool with_z2, bool with_z3, Eigen::VectorXd& v) {
  const EqualityLayout& L = off.layout;
  v.setZero();
  if (with_z1) add_c1(L, st.z1, v);
  if (with_z2) add_c2(L, st.z2, v);
  if (with_z3) add_c3(L, st.z3, v);
  v.segment(L.initial_row(), off.n) -= x;
  v.array() *= off.rho.array();
  v += st.lambda;
}

void check_dims(const OfflineData& off, const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref,
                const Eigen::VectorXd& u_ref) {
  if (x.size() != off.n || x_ref.size() != off.n || u_ref.size() != off.m)
    fail(ErrorCode::invalid_argument, "solve: state/reference dimension mismatch");
}

} // namespace

SolverState make_cold_state(const OfflineData& off) {
  SolverState st;
  const EqualityLayout& L = off.layout;
  st.z1 = Eigen::VectorXd::Zero(L.z1_size());
  st.z2 = Eigen::VectorXd::Zero(L.z2_size());
  st.z3 = Eigen::VectorXd::Zero(L.z3_size());
  st.lambda = Eigen::VectorXd::Zero(L.rows());
  st.z2_prev = st.z2;
  st.z3_prev = st.z3;
  st.k = 0;
  st.scratch_rows.resize(L.rows());
  st.gamma.resize(L.rows());
  st.q2.resize(L.z2_size());
  st.q3.resize(L.z3_size());
  st.hinv_q3.resize(L.z3_size());
  st.mu.resize(off.N * off.n);
  st.gt_mu.resize(L.z3_size());
  return st;
}

void eadmm_step(const OfflineData& off, const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref,
                const Eigen::VectorXd& u_ref, SolverState& st) {
  check_dims(off, x, x_ref, u_ref);
  const EqualityLayout& L = off.layout;
  Eigen::VectorXd& v = st.scratch_rows;

  st.z2_prev = st.z2;
  st.z3_prev = st.z3;

  // (i) box-constrained separable step: diagonal Hessian d1, then clamp.
  penalized_dual(off, st, x, false, true, true, v);
  st.z1 = (-c1_transpose(L, v).array() / off.d1.array())
              .cwiseMax(off.lb1.array())
              .cwiseMin(off.ub1.array());

  // (ii) artificial-reference step: constant KKT solve.
  penalized_dual(off, st, x, true, false, true, v);
  st.q2 = -(c2_transpose(L, v) - off.reference_term(x_ref, u_ref));
  st.z2 = off.solve_steady_state(st.q2);

  // (iii) deviation-trajectory step: range-space solve with W = G Hhat^-1 G^T.
  penalized_dual(off, st, x, true, true, false, v);
  c3_transpose(L, v, st.q3);
  st.hinv_q3 = off.apply_hhat_inv(st.q3);
  g_times(off, st.hinv_q3, st.mu);
  st.mu = -st.mu;
  off.w_chol.solve_in_place(st.mu);
  g_transpose(off, st.mu, st.gt_mu);
  st.z3 = -(st.hinv_q3 + off.apply_hhat_inv(st.gt_mu));

  // (iv) coupling residual, (v) dual ascent with the diagonal penalty.
  st.gamma.setZero();
  add_c1(L, st.z1, st.gamma);
  add_c2(L, st.z2, st.gamma);
  add_c3(L, st.z3, st.gamma);
  st.gamma.segment(L.initial_row(), off.n) -= x;
  st.lambda += off.rho.cwiseProduct(st.gamma);

  ++st.k;
}

Eigen::VectorXd coupling_residual(const OfflineData& off, const Eigen::VectorXd& z1,
                                  const Eigen::VectorXd& z2, const Eigen::VectorXd& z3,
                                  const Eigen::VectorXd& x) {
  const EqualityLayout& L = off.layout;
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(L.rows());
  add_c1(L, z1, gamma);
  add_c2(L, z2, gamma);
  add_c3(L, z3, gamma);
  gamma.segment(L.initial_row(), off.n) -= x;
  return gamma;
}

ResidualNorms residual_norms(const SolverState& st, const OfflineData& off,
                             const Eigen::VectorXd& x) {
  ResidualNorms r;
  r.primal_inf = coupling_residual(off, st.z1, st.z2, st.z3, x).lpNorm<Eigen::Infinity>();
  r.dz2_inf = (st.z2 - st.z2_prev).lpNorm<Eigen::Infinity>();
  r.dz3_inf = (st.z3 - st.z3_prev).lpNorm<Eigen::Infinity>();
  return r;
}

Solution solve(const OfflineData& off, const Eigen::VectorXd& x, const Eigen::VectorXd& x_ref,
               const Eigen::VectorXd& u_ref, SolverState& state, const SolveOptions& opts) {
  opts.validate();
  check_dims(off, x, x_ref, u_ref);
  if (state.z1.size() != off.layout.z1_size() || state.lambda.size() != off.layout.rows())
    fail(ErrorCode::invalid_argument, "solve: state built for different dimensions");

  if (!opts.warm_start) state = make_cold_state(off);
  state.k = 0;

  Solution sol;
  sol.status = SolveStatus::max_iters_reached;

  for (int k = 1; k <= opts.max_iters; ++k) {
    eadmm_step(off, x, x_ref, u_ref, state);

    const double gamma_inf = state.gamma.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(gamma_inf) || !state.z1.allFinite() || !state.z2.allFinite() ||
        !state.z3.allFinite() || !state.lambda.allFinite())
      fail(ErrorCode::divergence,
           "solve: non-finite iterate at iteration " + std::to_string(k));

    sol.iters = k;
    sol.residual_inf = gamma_inf;

    const double dz2 = (state.z2 - state.z2_prev).lpNorm<Eigen::Infinity>();
    const double dz3 = (state.z3 - state.z3_prev).lpNorm<Eigen::Infinity>();
    if (gamma_inf <= opts.tol && dz2 <= opts.tol && dz3 <= opts.tol) {
      sol.status = SolveStatus::converged;
      break;
    }
  }

  sol.z1 = state.z1;
  sol.z2 = state.z2;
  sol.z3 = state.z3;
  sol.lambda = state.lambda;
  sol.u0 = state.z1.segment(off.layout.u_offset(0), off.m);
  return sol;
}

} // namespace mpct
