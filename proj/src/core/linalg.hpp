#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "core/error.hpp"

namespace mpct {

/// LDL^T factorization of a dense symmetric (possibly indefinite) matrix with
/// Bunch-Kaufman partial pivoting: P A P^T = L D L^T with unit lower L and D
/// block diagonal with 1x1 / 2x2 blocks. Intended for small constant KKT
/// systems that are factored once and solved many times.
class SymmetricIndefiniteLdlt {
public:
  SymmetricIndefiniteLdlt() = default;

  /// Factor A (uses the full matrix; A must be symmetric). Throws
  /// ErrorCode::conditioning on a numerically singular pivot.
  void factor(const Eigen::MatrixXd& A);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  void solve_in_place(Eigen::VectorXd& x) const;

  int size() const { return n_; }
  bool factored() const { return n_ > 0; }

private:
  int n_ = 0;
  Eigen::MatrixXd unit_lower_;                 // multipliers, strictly lower part
  std::vector<int> block_start_;               // start index of each pivot block
  std::vector<int> block_size_;                // 1 or 2
  std::vector<Eigen::Matrix2d> diag_blocks_;   // 1x1 blocks stored in (0,0)
  std::vector<std::pair<int, int>> swaps_;     // row/col interchanges, in order
};

/// Cholesky factorization of a symmetric positive definite block-tridiagonal
/// matrix with uniform block size. Factors once, then solves by block
/// forward/backward substitution.
class BlockTridiagonalCholesky {
public:
  BlockTridiagonalCholesky() = default;

  /// diag[i] are the diagonal blocks, sub[i] = W(i+1, i). Throws
  /// ErrorCode::conditioning if any Schur-complement block fails Cholesky.
  void factor(const std::vector<Eigen::MatrixXd>& diag, const std::vector<Eigen::MatrixXd>& sub);

  void solve_in_place(Eigen::VectorXd& x) const;

  int blocks() const { return static_cast<int>(chol_diag_.size()); }
  int block_dim() const { return block_dim_; }

private:
  int block_dim_ = 0;
  std::vector<Eigen::MatrixXd> chol_diag_; // lower Cholesky factor per block
  std::vector<Eigen::MatrixXd> factor_sub_;
};

} // namespace mpct
