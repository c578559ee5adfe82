#include "core/linalg.hpp"

#include <cmath>

namespace mpct {

namespace {
// Bunch-Kaufman pivot selection constant.
const double kAlpha = (1.0 + std::sqrt(17.0)) / 8.0;
} // namespace

void SymmetricIndefiniteLdlt::factor(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) fail(ErrorCode::invalid_argument, "ldlt: matrix must be square");
  n_ = static_cast<int>(A.rows());
  unit_lower_ = Eigen::MatrixXd::Zero(n_, n_);
  block_start_.clear();
  block_size_.clear();
  diag_blocks_.clear();
  swaps_.clear();

  Eigen::MatrixXd W = 0.5 * (A + A.transpose()); // enforce exact symmetry of the copy
  const double scale = std::max(1.0, W.lpNorm<Eigen::Infinity>());
  const double tiny = 1e-14 * scale;

  auto symmetric_swap = [&](int a, int b) {
    if (a == b) return;
    W.row(a).swap(W.row(b));
    W.col(a).swap(W.col(b));
    unit_lower_.row(a).swap(unit_lower_.row(b));
    swaps_.emplace_back(a, b);
  };

  int k = 0;
  while (k < n_) {
    const double abs_akk = std::abs(W(k, k));

    int imax = k;
    double colmax = 0.0;
    for (int i = k + 1; i < n_; ++i) {
      const double v = std::abs(W(i, k));
      if (v > colmax) {
        colmax = v;
        imax = i;
      }
    }

    int step = 1;
    if (std::max(abs_akk, colmax) <= tiny) {
      fail(ErrorCode::conditioning, "ldlt: matrix is numerically singular");
    } else if (abs_akk >= kAlpha * colmax) {
      step = 1;
    } else {
      double rowmax = 0.0;
      for (int j = k; j < n_; ++j) {
        if (j == imax) continue;
        rowmax = std::max(rowmax, std::abs(W(imax, j)));
      }
      if (abs_akk * rowmax >= kAlpha * colmax * colmax) {
        step = 1;
      } else if (std::abs(W(imax, imax)) >= kAlpha * rowmax) {
        symmetric_swap(k, imax);
        step = 1;
      } else {
        symmetric_swap(k + 1, imax);
        step = 2;
      }
    }

    if (step == 1) {
      const double d = W(k, k);
      if (std::abs(d) <= tiny) fail(ErrorCode::conditioning, "ldlt: zero pivot");
      Eigen::Matrix2d blk = Eigen::Matrix2d::Zero();
      blk(0, 0) = d;
      for (int i = k + 1; i < n_; ++i) unit_lower_(i, k) = W(i, k) / d;
      for (int j = k + 1; j < n_; ++j)
        for (int i = j; i < n_; ++i) {
          W(i, j) -= unit_lower_(i, k) * W(j, k);
          W(j, i) = W(i, j);
        }
      block_start_.push_back(k);
      block_size_.push_back(1);
      diag_blocks_.push_back(blk);
      k += 1;
    } else {
      Eigen::Matrix2d blk;
      blk << W(k, k), W(k + 1, k), W(k + 1, k), W(k + 1, k + 1);
      const double det = blk(0, 0) * blk(1, 1) - blk(0, 1) * blk(1, 0);
      if (std::abs(det) <= tiny * tiny)
        fail(ErrorCode::conditioning, "ldlt: singular 2x2 pivot");
      const Eigen::Matrix2d inv = blk.inverse();
      for (int i = k + 2; i < n_; ++i) {
        const Eigen::Vector2d rhs(W(i, k), W(i, k + 1));
        const Eigen::Vector2d l = inv * rhs;
        unit_lower_(i, k) = l[0];
        unit_lower_(i, k + 1) = l[1];
      }
      for (int j = k + 2; j < n_; ++j)
        for (int i = j; i < n_; ++i) {
          W(i, j) -= unit_lower_(i, k) * W(j, k) + unit_lower_(i, k + 1) * W(j, k + 1);
          W(j, i) = W(i, j);
        }
      block_start_.push_back(k);
      block_size_.push_back(2);
      diag_blocks_.push_back(blk);
      k += 2;
    }
  }
}

void SymmetricIndefiniteLdlt::solve_in_place(Eigen::VectorXd& x) const {
  if (!factored()) fail(ErrorCode::invalid_argument, "ldlt: solve before factor");
  if (x.size() != n_) fail(ErrorCode::invalid_argument, "ldlt: rhs size mismatch");

  for (const auto& [a, b] : swaps_) std::swap(x[a], x[b]);

  // Forward substitution with unit lower L.
  for (std::size_t blk = 0; blk < block_start_.size(); ++blk) {
    const int k = block_start_[blk];
    const int s = block_size_[blk];
    for (int i = k + s; i < n_; ++i) {
      x[i] -= unit_lower_(i, k) * x[k];
      if (s == 2) x[i] -= unit_lower_(i, k + 1) * x[k + 1];
    }
  }

  // Block-diagonal solve.
  for (std::size_t blk = 0; blk < block_start_.size(); ++blk) {
    const int k = block_start_[blk];
    if (block_size_[blk] == 1) {
      x[k] /= diag_blocks_[blk](0, 0);
    } else {
      const Eigen::Vector2d sol = diag_blocks_[blk].inverse() * Eigen::Vector2d(x[k], x[k + 1]);
      x[k] = sol[0];
      x[k + 1] = sol[1];
    }
  }

  // Backward substitution with L^T.
  for (std::size_t r = block_start_.size(); r-- > 0;) {
    const int k = block_start_[r];
    const int s = block_size_[r];
    for (int i = k + s; i < n_; ++i) {
      x[k] -= unit_lower_(i, k) * x[i];
      if (s == 2) x[k + 1] -= unit_lower_(i, k + 1) * x[i];
    }
  }

  for (auto it = swaps_.rbegin(); it != swaps_.rend(); ++it) std::swap(x[it->first], x[it->second]);
}

Eigen::VectorXd SymmetricIndefiniteLdlt::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = rhs;
  solve_in_place(x);
  return x;
}

void BlockTridiagonalCholesky::factor(const std::vector<Eigen::MatrixXd>& diag,
                                      const std::vector<Eigen::MatrixXd>& sub) {
  if (diag.empty()) fail(ErrorCode::invalid_argument, "block cholesky: no blocks");
  if (sub.size() + 1 != diag.size())
    fail(ErrorCode::invalid_argument, "block cholesky: need one sub-block per adjacent pair");

  block_dim_ = static_cast<int>(diag[0].rows());
  chol_diag_.clear();
  factor_sub_.clear();
  chol_diag_.reserve(diag.size());
  factor_sub_.reserve(sub.size());

  Eigen::MatrixXd schur = diag[0];
  for (std::size_t i = 0; i < diag.size(); ++i) {
    Eigen::LLT<Eigen::MatrixXd> llt(schur);
    if (llt.info() != Eigen::Success)
      fail(ErrorCode::conditioning, "block cholesky: diagonal block not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    chol_diag_.push_back(L);
    if (i + 1 < diag.size()) {
      // L_sub = W(i+1, i) * L^{-T}
      Eigen::MatrixXd Ls =
          L.triangularView<Eigen::Lower>().solve(sub[i].transpose()).transpose();
      schur = diag[i + 1] - Ls * Ls.transpose();
      factor_sub_.push_back(std::move(Ls));
    }
  }
}

void BlockTridiagonalCholesky::solve_in_place(Eigen::VectorXd& x) const {
  const int nb = blocks();
  if (nb == 0) fail(ErrorCode::invalid_argument, "block cholesky: solve before factor");
  if (x.size() != static_cast<Eigen::Index>(nb) * block_dim_)
    fail(ErrorCode::invalid_argument, "block cholesky: rhs size mismatch");

  for (int i = 0; i < nb; ++i) {
    auto xi = x.segment(i * block_dim_, block_dim_);
    if (i > 0) xi -= factor_sub_[i - 1] * x.segment((i - 1) * block_dim_, block_dim_);
    chol_diag_[i].triangularView<Eigen::Lower>().solveInPlace(xi);
  }
  for (int i = nb - 1; i >= 0; --i) {
    auto xi = x.segment(i * block_dim_, block_dim_);
    if (i + 1 < nb)
      xi -= factor_sub_[i].transpose() * x.segment((i + 1) * block_dim_, block_dim_);
    chol_diag_[i].transpose().triangularView<Eigen::Upper>().solveInPlace(xi);
  }
}

} // namespace mpct
