#include "core/problem.hpp"

#include <cmath>

namespace mpct {

namespace {

void check_spd(const Eigen::MatrixXd& M, int dim, const char* name) {
  if (M.rows() != dim || M.cols() != dim)
    fail(ErrorCode::invalid_argument, std::string(name) + ": wrong dimensions");
  const double scale = std::max(1.0, M.lpNorm<Eigen::Infinity>());
  if ((M - M.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * scale)
    fail(ErrorCode::invalid_argument, std::string(name) + ": not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::invalid_argument, std::string(name) + ": not positive definite");
}

bool is_diagonal(const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

int numerical_rank(const Eigen::MatrixXd& M) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  return static_cast<int>(qr.rank());
}

} // namespace

void MpctProblem::validate() const {
  model.validate();
  if (N < 2) fail(ErrorCode::invalid_argument, "mpct problem: N must be at least 2");
  check_spd(Q, n(), "Q");
  check_spd(R, m(), "R");
  check_spd(T, n(), "T");
  check_spd(S, m(), "S");
  if (eps_x.size() != n() || eps_u.size() != m())
    fail(ErrorCode::invalid_argument, "mpct problem: tightening vectors have wrong length");
  if (!(eps_x.array() > 0.0).all() || !(eps_u.array() > 0.0).all())
    fail(ErrorCode::invalid_argument, "mpct problem: tightening must be strictly positive");
  if (!(eps_x.array() < 0.5 * (model.x_ub - model.x_lb).array()).all() ||
      !(eps_u.array() < 0.5 * (model.u_ub - model.u_lb).array()).all())
    fail(ErrorCode::invalid_argument, "mpct problem: tightening exceeds half the box width");
}

Eigen::VectorXd assemble_b(const EqualityLayout& layout, const Eigen::VectorXd& x) {
  if (x.size() != layout.n()) fail(ErrorCode::invalid_argument, "assemble_b: state size mismatch");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(layout.rows());
  b.segment(layout.initial_row(), layout.n()) = x;
  return b;
}

Eigen::VectorXd assemble_rho(const EqualityLayout& layout, const PenaltySpec& pen) {
  pen.validate();
  const int n = layout.n(), m = layout.m(), N = layout.horizon();
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(layout.rows(), pen.rho_base);
  rho.segment(layout.initial_row(), n).setConstant(pen.rho_large);
  rho.segment(layout.coupling_x_row(0), n).setConstant(pen.rho_large);
  rho.segment(layout.coupling_x_row(N), n).setConstant(pen.rho_large);
  rho.segment(layout.coupling_u_row(N), m).setConstant(pen.rho_large);
  rho.segment(layout.terminal_x_row(), n).setConstant(pen.rho_large);
  rho.segment(layout.terminal_u_row(), m).setConstant(pen.rho_large);
  return rho;
}

void assemble_z1_bounds(const MpctProblem& prob, Eigen::VectorXd& lb1, Eigen::VectorXd& ub1) {
  const int n = prob.n(), m = prob.m(), N = prob.N;
  const EqualityLayout layout(n, m, N);
  lb1 = Eigen::VectorXd::Constant(layout.z1_size(), -kInf);
  ub1 = Eigen::VectorXd::Constant(layout.z1_size(), kInf);
  for (int i = 1; i <= N; ++i) {
    lb1.segment(layout.x_offset(i), n) = prob.model.x_lb;
    ub1.segment(layout.x_offset(i), n) = prob.model.x_ub;
  }
  lb1.segment(layout.x_offset(N), n) += prob.eps_x;
  ub1.segment(layout.x_offset(N), n) -= prob.eps_x;
  for (int i = 0; i <= N; ++i) {
    lb1.segment(layout.u_offset(i), m) = prob.model.u_lb;
    ub1.segment(layout.u_offset(i), m) = prob.model.u_ub;
  }
  lb1.segment(layout.u_offset(N), m) += prob.eps_u;
  ub1.segment(layout.u_offset(N), m) -= prob.eps_u;
}

Eigen::VectorXd OfflineData::apply_hhat_inv(const Eigen::VectorXd& v) const {
  if (v.size() != layout.z3_size())
    fail(ErrorCode::invalid_argument, "apply_hhat_inv: size mismatch");
  if (hhat_diagonal) return hhat_inv_diag.cwiseProduct(v);

  Eigen::VectorXd out(v.size());
  for (int i = 0; i <= N; ++i) {
    out.segment(layout.x_offset(i), n) = hhat_x_llt[i].solve(v.segment(layout.x_offset(i), n));
    out.segment(layout.u_offset(i), m) = hhat_u_llt[i].solve(v.segment(layout.u_offset(i), m));
  }
  return out;
}

Eigen::VectorXd OfflineData::solve_steady_state(const Eigen::VectorXd& q2) const {
  if (q2.size() != n + m) fail(ErrorCode::invalid_argument, "solve_steady_state: size mismatch");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n + m);
  rhs.head(n + m) = q2;
  steady_state_kkt.solve_in_place(rhs);
  return rhs.head(n + m);
}

Eigen::VectorXd OfflineData::reference_term(const Eigen::VectorXd& x_ref,
                                            const Eigen::VectorXd& u_ref) const {
  if (x_ref.size() != n || u_ref.size() != m)
    fail(ErrorCode::invalid_argument, "reference_term: size mismatch");
  Eigen::VectorXd h(n + m);
  h.head(n) = T * x_ref;
  h.tail(m) = S * u_ref;
  return h;
}

std::shared_ptr<const OfflineData> build_offline(const MpctProblem& prob, const PenaltySpec& pen) {
  prob.validate();
  pen.validate();

  auto data = std::make_shared<OfflineData>();
  OfflineData& off = *data;
  const int n = prob.n(), m = prob.m(), N = prob.N;
  off.n = n;
  off.m = m;
  off.N = N;
  off.layout = EqualityLayout(n, m, N);
  off.A = prob.model.A;
  off.B = prob.model.B;
  off.T = prob.T;
  off.S = prob.S;
  off.eps_x = prob.eps_x;
  off.eps_u = prob.eps_u;
  off.rho = assemble_rho(off.layout, pen);
  assemble_z1_bounds(prob, off.lb1, off.ub1);

  const EqualityLayout& L = off.layout;

  // d1 = diag(C1^T P C1): each z1 variable appears in its stage coupling row
  // and, for stage 0 / stage N, additionally in the initial / terminal rows.
  off.d1.resize(L.z1_size());
  for (int i = 0; i <= N; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = off.rho[L.coupling_x_row(i) + j];
      if (i == 0) v += off.rho[L.initial_row() + j];
      if (i == N) v += off.rho[L.terminal_x_row() + j];
      off.d1[L.x_offset(i) + j] = v;
    }
    for (int j = 0; j < m; ++j) {
      double v = off.rho[L.coupling_u_row(i) + j];
      if (i == N) v += off.rho[L.terminal_u_row() + j];
      off.d1[L.u_offset(i) + j] = v;
    }
  }
  if (!(off.d1.array() > 0.0).all())
    fail(ErrorCode::assumption_violation, "build_offline: C1 has a zero column");

  // Assumption-1 rank checks on the dense replicas.
  const DenseParts dense = assemble_dense(prob, pen);
  if (numerical_rank(dense.C2) != n + m)
    fail(ErrorCode::assumption_violation, "build_offline: C2 is rank deficient");
  if (numerical_rank(dense.E) != n)
    fail(ErrorCode::assumption_violation,
         "build_offline: steady-state constraint [A - I, B] is rank deficient");

  // Constant KKT system for the artificial-reference step.
  // diag(C2^T P C2): x_s columns hit every stage x-coupling row plus the
  // terminal x rows; u_s columns analogously.
  Eigen::VectorXd d2(n + m);
  for (int j = 0; j < n; ++j) {
    double v = off.rho[L.terminal_x_row() + j];
    for (int i = 0; i <= N; ++i) v += off.rho[L.coupling_x_row(i) + j];
    d2[j] = v;
  }
  for (int j = 0; j < m; ++j) {
    double v = off.rho[L.terminal_u_row() + j];
    for (int i = 0; i <= N; ++i) v += off.rho[L.coupling_u_row(i) + j];
    d2[n + j] = v;
  }
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(2 * n + m, 2 * n + m);
  kkt.block(0, 0, n, n) = prob.T;
  kkt.block(n, n, m, m) = prob.S;
  kkt.topLeftCorner(n + m, n + m) += d2.asDiagonal();
  kkt.block(n + m, 0, n, n + m) = dense.E;
  kkt.block(0, n + m, n + m, n) = dense.E.transpose();
  try {
    off.steady_state_kkt.factor(kkt);
  } catch (const Error&) {
    fail(ErrorCode::conditioning, "build_offline: steady-state KKT factorization failed");
  }

  // Hhat = diag(Q, R, ..., Q, R) + diag(rho over coupling rows).
  off.hhat_diagonal = is_diagonal(prob.Q) && is_diagonal(prob.R);
  std::vector<Eigen::MatrixXd> hx_inv(N + 1), hu_inv(N + 1);
  if (off.hhat_diagonal) {
    off.hhat_inv_diag.resize(L.z3_size());
  } else {
    off.hhat_x_llt.resize(N + 1);
    off.hhat_u_llt.resize(N + 1);
  }
  for (int i = 0; i <= N; ++i) {
    Eigen::MatrixXd hx = prob.Q;
    Eigen::MatrixXd hu = prob.R;
    hx.diagonal() += off.rho.segment(L.coupling_x_row(i), n);
    hu.diagonal() += off.rho.segment(L.coupling_u_row(i), m);
    if (off.hhat_diagonal) {
      off.hhat_inv_diag.segment(L.x_offset(i), n) = hx.diagonal().cwiseInverse();
      off.hhat_inv_diag.segment(L.u_offset(i), m) = hu.diagonal().cwiseInverse();
      hx_inv[i] = hx.diagonal().cwiseInverse().asDiagonal();
      hu_inv[i] = hu.diagonal().cwiseInverse().asDiagonal();
    } else {
      off.hhat_x_llt[i].compute(hx);
      off.hhat_u_llt[i].compute(hu);
      if (off.hhat_x_llt[i].info() != Eigen::Success || off.hhat_u_llt[i].info() != Eigen::Success)
        fail(ErrorCode::conditioning, "build_offline: Hhat stage block not positive definite");
      hx_inv[i] = off.hhat_x_llt[i].solve(Eigen::MatrixXd::Identity(n, n));
      hu_inv[i] = off.hhat_u_llt[i].solve(Eigen::MatrixXd::Identity(m, m));
    }
  }

  // W = G Hhat^{-1} G^T, block tridiagonal with N diagonal blocks of size n.
  std::vector<Eigen::MatrixXd> w_diag(N), w_sub(N - 1);
  for (int i = 0; i < N; ++i) {
    w_diag[i] = off.A * hx_inv[i] * off.A.transpose() + off.B * hu_inv[i] * off.B.transpose() +
                hx_inv[i + 1];
    if (i + 1 < N) w_sub[i] = -off.A * hx_inv[i + 1];
  }
  try {
    off.w_chol.factor(w_diag, w_sub);
  } catch (const Error&) {
    fail(ErrorCode::conditioning, "build_offline: W block Cholesky failed");
  }

  return data;
}

namespace {

bool exactly_diagonal(const Eigen::MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

} // namespace

ValidationReport validate_problem(const MpctProblem& prob, const PenaltySpec& pen) {
  const DenseParts d = assemble_dense(prob, pen);
  const EqualityLayout L(prob.n(), prob.m(), prob.N);

  ValidationReport rep;
  rep.n = prob.n();
  rep.m = prob.m();
  rep.N = prob.N;
  rep.rows = L.rows();

  rep.rank_c1_expected = L.z1_size();
  rep.rank_c2_expected = L.z2_size();
  rep.rank_e_expected = prob.n();
  rep.rank_c1 = numerical_rank(d.C1);
  rep.rank_c2 = numerical_rank(d.C2);
  rep.rank_e = numerical_rank(d.E);

  const Eigen::MatrixXd P = d.rho.asDiagonal();
  rep.c1_product_diagonal = exactly_diagonal(d.C1.transpose() * P * d.C1);
  rep.c2_product_diagonal = exactly_diagonal(d.C2.transpose() * P * d.C2);
  rep.c3_product_diagonal = exactly_diagonal(d.C3.transpose() * P * d.C3);

  // Dense W = G Hhat^{-1} G^T with Hhat = H3 + C3^T P C3.
  const Eigen::MatrixXd hhat = d.H3 + Eigen::MatrixXd(d.C3.transpose() * P * d.C3);
  const Eigen::MatrixXd w = d.G * hhat.llt().solve(d.G.transpose());
  rep.w_block_tridiagonal = true;
  const int n = prob.n();
  for (int bi = 0; bi < prob.N && rep.w_block_tridiagonal; ++bi)
    for (int bj = 0; bj < prob.N && rep.w_block_tridiagonal; ++bj) {
      if (std::abs(bi - bj) <= 1) continue;
      if (!w.block(bi * n, bj * n, n, n).isZero(0.0)) rep.w_block_tridiagonal = false;
    }
  rep.w_positive_definite =
      Eigen::LLT<Eigen::MatrixXd>(0.5 * (w + w.transpose())).info() == Eigen::Success;

  try {
    build_offline(prob, pen);
    rep.offline_ok = true;
  } catch (const Error& e) {
    rep.offline_ok = false;
    rep.offline_error = e.what();
  }

  return rep;
}

DenseParts assemble_dense(const MpctProblem& prob, const PenaltySpec& pen) {
  prob.validate();
  const int n = prob.n(), m = prob.m(), N = prob.N;
  const EqualityLayout L(n, m, N);
  const int mz = L.rows();

  DenseParts parts;
  parts.C1 = Eigen::MatrixXd::Zero(mz, L.z1_size());
  parts.C2 = Eigen::MatrixXd::Zero(mz, L.z2_size());
  parts.C3 = Eigen::MatrixXd::Zero(mz, L.z3_size());
  parts.b_template = Eigen::VectorXd::Zero(mz);
  parts.rho = assemble_rho(L, pen);
  assemble_z1_bounds(prob, parts.lb1, parts.ub1);

  const Eigen::MatrixXd In = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd Im = Eigen::MatrixXd::Identity(m, m);

  parts.C1.block(L.initial_row(), L.x_offset(0), n, n) = In;
  for (int i = 0; i <= N; ++i) {
    parts.C1.block(L.coupling_x_row(i), L.x_offset(i), n, n) = -In;
    parts.C1.block(L.coupling_u_row(i), L.u_offset(i), m, m) = -Im;
    parts.C2.block(L.coupling_x_row(i), 0, n, n) = In;
    parts.C2.block(L.coupling_u_row(i), n, m, m) = Im;
    parts.C3.block(L.coupling_x_row(i), L.x_offset(i), n, n) = In;
    parts.C3.block(L.coupling_u_row(i), L.u_offset(i), m, m) = Im;
  }
  parts.C1.block(L.terminal_x_row(), L.x_offset(N), n, n) = In;
  parts.C1.block(L.terminal_u_row(), L.u_offset(N), m, m) = Im;
  parts.C2.block(L.terminal_x_row(), 0, n, n) = -In;
  parts.C2.block(L.terminal_u_row(), n, m, m) = -Im;

  parts.H2 = Eigen::MatrixXd::Zero(n + m, n + m);
  parts.H2.topLeftCorner(n, n) = prob.T;
  parts.H2.bottomRightCorner(m, m) = prob.S;

  parts.H3 = Eigen::MatrixXd::Zero(L.z3_size(), L.z3_size());
  for (int i = 0; i <= N; ++i) {
    parts.H3.block(L.x_offset(i), L.x_offset(i), n, n) = prob.Q;
    parts.H3.block(L.u_offset(i), L.u_offset(i), m, m) = prob.R;
  }

  parts.E = Eigen::MatrixXd::Zero(n, n + m);
  parts.E.leftCols(n) = prob.model.A - In;
  parts.E.rightCols(m) = prob.model.B;

  parts.G = Eigen::MatrixXd::Zero(N * n, L.z3_size());
  for (int i = 0; i < N; ++i) {
    parts.G.block(i * n, L.x_offset(i), n, n) = prob.model.A;
    parts.G.block(i * n, L.u_offset(i), n, m) = prob.model.B;
    parts.G.block(i * n, L.x_offset(i + 1), n, n) = -In;
  }

  return parts;
}

} // namespace mpct
