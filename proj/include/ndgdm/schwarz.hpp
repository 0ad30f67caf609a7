#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <atomic>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ndgdm/coarse.hpp"
#include "ndgdm/partition.hpp"
#include "ndgdm/sipg.hpp"

namespace ndgdm {

/// Principal submatrix of a sparse matrix on a sorted index set. With the
/// subdomain-blocked dof ordering the subdomain sets are contiguous and the
/// result is a diagonal block.
Eigen::SparseMatrix<double> extract_block(const Eigen::SparseMatrix<double>& matrix,
                                          std::span<const int> indices);

/// Sparse Cholesky factorization of one SPD block, fill-reducing ordering,
/// with flop counters derived from the factor structure:
/// factor_flops = sum over columns of nnz(L column)^2, solve_flops = 4 nnz(L).
class BlockFactorization {
 public:
  explicit BlockFactorization(Eigen::SparseMatrix<double> block);
  BlockFactorization(BlockFactorization&&) noexcept;
  BlockFactorization& operator=(BlockFactorization&&) noexcept;
  ~BlockFactorization();

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  int size() const { return size_; }
  long long factor_flops() const { return factor_flops_; }  ///< flfac
  long long solve_flops() const { return solve_flops_; }    ///< flass
  const Eigen::SparseMatrix<double>& block() const { return block_; }
  Eigen::SparseMatrix<double> factor() const;               ///< L, permuted ordering
  Eigen::VectorXi permutation() const;                      ///< row permutation P

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Eigen::SparseMatrix<double> block_;
  int size_ = 0;
  long long factor_flops_ = 0;
  long long solve_flops_ = 0;
};

inline BlockFactorization factorize(Eigen::SparseMatrix<double> block) {
  return BlockFactorization(std::move(block));
}

enum class SchwarzMode { one_level, additive, hybrid };

std::string to_string(SchwarzMode mode);
SchwarzMode schwarz_mode_from_string(const std::string& name);

struct CostReport {
  long long factor_flops = 0;  ///< max factorization flops over all blocks
  long long apply_flops = 0;   ///< per-iteration assembling flops
  long long total_flops = 0;   ///< Fl
  double comm = 0.0;           ///< communication volume estimate
};

/// Per-iteration assembling cost: the additive preconditioner runs every
/// solve concurrently, the hybrid one serializes two coarse solves on top of
/// the local ones.
long long assemble_flops(SchwarzMode mode, std::span<const long long> local_solve_flops,
                         long long coarse_solve_flops);
long long total_flops(long long factor_flops, long long iterations, long long assemble_flops);
double communication_ops(long long iterations, int n, int n_subdomains);

/// Test hook replacing the exact block solves; receives the block matrix
/// and the right-hand side.
using LocalSolverOverride =
    std::function<Eigen::VectorXd(const Eigen::SparseMatrix<double>&, const Eigen::VectorXd&)>;

/// Factorized one-level, two-level additive, or hybrid Schwarz
/// preconditioner over the nonoverlapping subdomain blocks of the system.
///
/// Factorizations of the blocks are independent; applications only read the
/// factorizations, so concurrent applies are safe. The cost counters are
/// atomic.
class SchwarzPreconditioner {
 public:
  SchwarzPreconditioner(const SparseSystem& system, const DgSpace& space,
                        const Partition& partition, const CoarseSpace* coarse,
                        SchwarzMode mode);

  SchwarzMode mode() const { return mode_; }
  int n_subdomains() const { return static_cast<int>(blocks_.size()); }
  int n() const { return static_cast<int>(matrix_->rows()); }

  /// Dispatches on the mode.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  /// Sum of the independent block solves, plus the coarse solve in additive
  /// mode.
  Eigen::VectorXd apply_additive(const Eigen::VectorXd& x) const;

  /// Coarse solve, residual update, local solves, second coarse solve.
  Eigen::VectorXd apply_hybrid(const Eigen::VectorXd& x) const;

  /// Local solves only; no counters.
  Eigen::VectorXd apply_locals(const Eigen::VectorXd& x) const;

  /// Coarse solve only; no counters.
  Eigen::VectorXd apply_coarse(const Eigen::VectorXd& x) const;

  /// Relative projection defect of P_i = R_i^T A_i^-1 R_i A applied twice;
  /// index 0 addresses the coarse projection. Near zero for exact solves.
  double projection_check(int i, const Eigen::VectorXd& v,
                          const LocalSolverOverride& override_solver = nullptr) const;

  CostReport cost_report(long long iterations) const;

  long long applications() const { return applications_.load(); }
  long long accumulated_apply_flops() const { return accumulated_apply_flops_.load(); }

  const std::vector<BlockFactorization>& blocks() const { return blocks_; }
  const BlockFactorization& coarse_block() const;
  const std::vector<std::vector<int>>& index_sets() const { return index_sets_; }

 private:
  Eigen::VectorXd solve_block(int i, const Eigen::VectorXd& rhs,
                              const LocalSolverOverride& override_solver) const;

  const Eigen::SparseMatrix<double>* matrix_;
  const CoarseSpace* coarse_;
  SchwarzMode mode_;
  std::vector<std::vector<int>> index_sets_;
  std::vector<BlockFactorization> blocks_;
  std::unique_ptr<BlockFactorization> coarse_block_;
  long long apply_flops_ = 0;  // per application, fixed by mode and blocks
  mutable std::atomic<long long> applications_{0};
  mutable std::atomic<long long> accumulated_apply_flops_{0};
};

}  // namespace ndgdm
