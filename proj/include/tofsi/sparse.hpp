#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <string>
#include <vector>

#include "tofsi/errors.hpp"
#include "tofsi/scalar.hpp"

namespace tofsi {

template <class S>
using SparseMat = Eigen::SparseMatrix<S>;
template <class S>
using DenseVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Assembly-side view of a sparse linear system: triplet accumulation (adds
// commute, so element order is irrelevant) plus the right-hand side.
template <class S>
struct SparseSystem {
  int n = 0;
  std::vector<Eigen::Triplet<S>> triplets;
  std::vector<S> rhs;

  explicit SparseSystem(int size = 0) { resize(size); }
  void resize(int size) {
    n = size;
    rhs.assign(size, S(0));
    triplets.clear();
  }
  void add(int row, int col, S value) { triplets.emplace_back(row, col, value); }

  SparseMat<S> matrix() const {
    SparseMat<S> m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
  }
};

// Direct factorization wrapper. The symbolic analysis is cached: repeated
// factorizations of matrices with the identical sparsity pattern (Newton
// steps, staggered passes) skip the ordering phase.
template <class S>
class DirectSolver {
 public:
  void factorize(const SparseMat<S>& a) {
    if (a.rows() != a.cols()) throw SolveError("matrix must be square");
    if (!analyzed_ || a.nonZeros() != pattern_nnz_ || a.rows() != pattern_n_) {
      lu_.analyzePattern(a);
      analyzed_ = true;
      pattern_nnz_ = a.nonZeros();
      pattern_n_ = a.rows();
    }
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success)
      throw SolveError("sparse factorization failed: " + lu_.lastErrorMessage());
  }

  std::vector<S> solve(const std::vector<S>& b) const {
    DenseVec<S> bb = Eigen::Map<const DenseVec<S>>(b.data(), b.size());
    DenseVec<S> x = lu_.solve(bb);
    if (lu_.info() != Eigen::Success) throw SolveError("sparse solve failed");
    return std::vector<S>(x.data(), x.data() + x.size());
  }

  void reset() { analyzed_ = false; }

 private:
  Eigen::SparseLU<SparseMat<S>, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
  Eigen::Index pattern_nnz_ = -1;
  Eigen::Index pattern_n_ = -1;
};

// One-shot factor-and-solve for real or complex scalars.
template <class S>
std::vector<S> solve_sparse(const SparseSystem<S>& sys) {
  DirectSolver<S> solver;
  solver.factorize(sys.matrix());
  return solver.solve(sys.rhs);
}

}  // namespace tofsi
