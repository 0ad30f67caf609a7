#include "ndgdm/schwarz.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace ndgdm {

Eigen::SparseMatrix<double> extract_block(const Eigen::SparseMatrix<double>& matrix,
                                          std::span<const int> indices) {
  const int n = static_cast<int>(matrix.rows());
  std::vector<int> local(n, -1);
  for (size_t i = 0; i < indices.size(); ++i) {
    const int g = indices[i];
    if (g < 0 || g >= n) throw ConfigError("block index out of range");
    if (i > 0 && indices[i] <= indices[i - 1])
      throw ConfigError("block index set must be sorted and duplicate-free");
    local[g] = static_cast<int>(i);
  }
  Eigen::SparseMatrix<double> block(indices.size(), indices.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (size_t j = 0; j < indices.size(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, indices[j]); it; ++it)
      if (local[it.row()] >= 0)
        triplets.emplace_back(local[it.row()], static_cast<int>(j), it.value());
  block.setFromTriplets(triplets.begin(), triplets.end());
  return block;
}

struct BlockFactorization::Impl {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

BlockFactorization::BlockFactorization(BlockFactorization&&) noexcept = default;
BlockFactorization& BlockFactorization::operator=(BlockFactorization&&) noexcept = default;
BlockFactorization::~BlockFactorization() = default;

namespace {

// Locates the first nonpositive pivot for the error report.
int failing_pivot(const Eigen::SparseMatrix<double>& block) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(block);
  if (ldlt.info() != Eigen::Success) return -1;
  const Eigen::VectorXd d = ldlt.vectorD();
  for (int i = 0; i < d.size(); ++i)
    if (d(i) <= 0.0) return i;
  return -1;
}

}  // namespace

BlockFactorization::BlockFactorization(Eigen::SparseMatrix<double> block)
    : impl_(std::make_unique<Impl>()), block_(std::move(block)) {
  if (block_.rows() != block_.cols()) throw ConfigError("block must be square");
  size_ = static_cast<int>(block_.rows());
  block_.makeCompressed();
  impl_->llt.compute(block_);
  if (impl_->llt.info() != Eigen::Success) {
    const int pivot = failing_pivot(block_);
    throw FactorizationError(
        "block is not positive definite (pivot " + std::to_string(pivot) +
        " of " + std::to_string(size_) +
        "); check the penalty constant, an under-penalized form is the usual cause");
  }
  const Eigen::SparseMatrix<double> factor = impl_->llt.matrixL();
  for (int col = 0; col < factor.outerSize(); ++col) {
    const long long nnz_col = factor.outerIndexPtr()[col + 1] - factor.outerIndexPtr()[col];
    factor_flops_ += nnz_col * nnz_col;
  }
  solve_flops_ = 4LL * factor.nonZeros();
}

Eigen::VectorXd BlockFactorization::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != size_) throw DataError("block solve dimension mismatch");
  return impl_->llt.solve(rhs);
}

Eigen::SparseMatrix<double> BlockFactorization::factor() const {
  return impl_->llt.matrixL();
}

Eigen::VectorXi BlockFactorization::permutation() const {
  return impl_->llt.permutationP().indices();
}

std::string to_string(SchwarzMode mode) {
  switch (mode) {
    case SchwarzMode::one_level: return "one_level";
    case SchwarzMode::additive: return "additive";
    case SchwarzMode::hybrid: return "hybrid";
  }
  return "?";
}

SchwarzMode schwarz_mode_from_string(const std::string& name) {
  if (name == "one_level") return SchwarzMode::one_level;
  if (name == "additive") return SchwarzMode::additive;
  if (name == "hybrid") return SchwarzMode::hybrid;
  throw ConfigError("unknown preconditioner '" + name + "'");
}

long long assemble_flops(SchwarzMode mode, std::span<const long long> local_solve_flops,
                         long long coarse_solve_flops) {
  long long local_max = 0;
  for (long long f : local_solve_flops) local_max = std::max(local_max, f);
  switch (mode) {
    case SchwarzMode::one_level: return local_max;
    case SchwarzMode::additive: return std::max(local_max, coarse_solve_flops);
    case SchwarzMode::hybrid: return local_max + 2 * coarse_solve_flops;
  }
  return 0;
}

long long total_flops(long long factor_flops, long long iterations, long long assemble_flops) {
  return factor_flops + iterations * assemble_flops;
}

double communication_ops(long long iterations, int n, int n_subdomains) {
  return static_cast<double>(iterations) * n * std::log2(static_cast<double>(n_subdomains));
}

SchwarzPreconditioner::SchwarzPreconditioner(const SparseSystem& system, const DgSpace& space,
                                             const Partition& partition,
                                             const CoarseSpace* coarse, SchwarzMode mode)
    : matrix_(&system.matrix), coarse_(coarse), mode_(mode) {
  if (system.n() != space.n_dofs) throw ConfigError("system does not match the dof layout");
  if (mode != SchwarzMode::one_level && coarse == nullptr)
    throw ConfigError("two-level modes require a coarse space");

  index_sets_.resize(partition.n_subdomains);
  for (size_t e = 0; e < partition.subdomain_of.size(); ++e) {
    auto& set = index_sets_[partition.subdomain_of[e]];
    for (int d = 0; d < space.ndofs[e]; ++d) set.push_back(space.offset[e] + d);
  }
  blocks_.reserve(index_sets_.size());
  for (auto& set : index_sets_) {
    std::sort(set.begin(), set.end());
    blocks_.emplace_back(extract_block(system.matrix, set));
  }
  if (coarse_ != nullptr)
    coarse_block_ = std::make_unique<BlockFactorization>(coarse_->coarse_matrix);
  apply_flops_ = cost_report(1).apply_flops;
}

const BlockFactorization& SchwarzPreconditioner::coarse_block() const {
  if (!coarse_block_) throw ConfigError("preconditioner has no coarse level");
  return *coarse_block_;
}

Eigen::VectorXd SchwarzPreconditioner::apply(const Eigen::VectorXd& x) const {
  return mode_ == SchwarzMode::hybrid ? apply_hybrid(x) : apply_additive(x);
}

Eigen::VectorXd SchwarzPreconditioner::apply_locals(const Eigen::VectorXd& x) const {
  if (x.size() != matrix_->rows()) throw DataError("dimension mismatch");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(x.size());
  for (size_t i = 0; i < blocks_.size(); ++i) {
    const auto& set = index_sets_[i];
    Eigen::VectorXd rhs(set.size());
    for (size_t k = 0; k < set.size(); ++k) rhs(k) = x(set[k]);
    const Eigen::VectorXd y = blocks_[i].solve(rhs);
    for (size_t k = 0; k < set.size(); ++k) u(set[k]) += y(k);
  }
  return u;
}

Eigen::VectorXd SchwarzPreconditioner::apply_coarse(const Eigen::VectorXd& x) const {
  return coarse_prolong(*coarse_, coarse_block().solve(coarse_restrict(*coarse_, x)));
}

Eigen::VectorXd SchwarzPreconditioner::apply_additive(const Eigen::VectorXd& x) const {
  if (mode_ == SchwarzMode::hybrid) throw ConfigError("preconditioner is in hybrid mode");
  Eigen::VectorXd u = apply_locals(x);
  if (mode_ == SchwarzMode::additive) u += apply_coarse(x);
  ++applications_;
  accumulated_apply_flops_ += apply_flops_;
  return u;
}

Eigen::VectorXd SchwarzPreconditioner::apply_hybrid(const Eigen::VectorXd& x) const {
  if (mode_ != SchwarzMode::hybrid) throw ConfigError("preconditioner is not in hybrid mode");
  const Eigen::VectorXd z0 = apply_coarse(x);
  const Eigen::VectorXd z = x - (*matrix_) * z0;
  const Eigen::VectorXd y = apply_locals(z);
  const Eigen::VectorXd v0 = apply_coarse((*matrix_) * y);
  ++applications_;
  accumulated_apply_flops_ += apply_flops_;
  return z0 + y - v0;
}

Eigen::VectorXd SchwarzPreconditioner::solve_block(int i, const Eigen::VectorXd& rhs,
                                                   const LocalSolverOverride& override_solver) const {
  if (i == 0) {
    return override_solver ? override_solver(coarse_block().block(), rhs)
                           : coarse_block().solve(rhs);
  }
  const auto& block = blocks_[i - 1];
  return override_solver ? override_solver(block.block(), rhs) : block.solve(rhs);
}

double SchwarzPreconditioner::projection_check(int i, const Eigen::VectorXd& v,
                                               const LocalSolverOverride& override_solver) const {
  if (i < 0 || i > static_cast<int>(blocks_.size()))
    throw ConfigError("projection index out of range");

  auto project = [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    const Eigen::VectorXd aw = (*matrix_) * w;
    if (i == 0) {
      const Eigen::VectorXd y = solve_block(0, coarse_restrict(*coarse_, aw), override_solver);
      return coarse_prolong(*coarse_, y);
    }
    const auto& set = index_sets_[i - 1];
    Eigen::VectorXd rhs(set.size());
    for (size_t k = 0; k < set.size(); ++k) rhs(k) = aw(set[k]);
    const Eigen::VectorXd y = solve_block(i, rhs, override_solver);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(v.size());
    for (size_t k = 0; k < set.size(); ++k) u(set[k]) = y(k);
    return u;
  };

  const Eigen::VectorXd pv = project(v);
  const double norm = pv.norm();
  if (norm == 0.0) return 0.0;
  return (project(pv) - pv).norm() / norm;
}

CostReport SchwarzPreconditioner::cost_report(long long iterations) const {
  CostReport report;
  std::vector<long long> local_solve, local_factor;
  for (const auto& block : blocks_) {
    local_solve.push_back(block.solve_flops());
    local_factor.push_back(block.factor_flops());
  }
  long long coarse_solve = 0;
  report.factor_flops = *std::max_element(local_factor.begin(), local_factor.end());
  if (coarse_block_) {
    coarse_solve = coarse_block_->solve_flops();
    report.factor_flops = std::max(report.factor_flops, coarse_block_->factor_flops());
  }
  report.apply_flops = assemble_flops(mode_, local_solve, coarse_solve);
  report.total_flops = total_flops(report.factor_flops, iterations, report.apply_flops);
  report.comm = communication_ops(iterations, n(), n_subdomains());
  return report;
}

}  // namespace ndgdm
