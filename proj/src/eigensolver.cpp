#include "specdesc/eigensolver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <random>
#include <sstream>

namespace specdesc {

namespace {

/// Basis of B-orthonormal vectors with two-pass classical Gram-Schmidt.
class BOrthoBasis {
 public:
  BOrthoBasis(const SparseMatrix& b, Index n, Index capacity) : b_(b), v_(n, capacity) {}

  Matrix& vectors() { return v_; }

  // Removes the components of w along the first `count` columns; returns the
  // accumulated coefficients and leaves the B-norm of the remainder in *norm.
  Vector orthogonalize(Vector& w, Index count, Scalar* norm) const {
    Vector h = Vector::Zero(count);
    Vector bw;
    for (int pass = 0; pass < 2; ++pass) {
      bw = b_ * w;
      if (count > 0) {
        const Vector c = v_.leftCols(count).transpose() * bw;
        w.noalias() -= v_.leftCols(count) * c;
        h += c;
      }
    }
    bw = b_ * w;
    *norm = std::sqrt(std::max(Scalar{0}, w.dot(bw)));
    return h;
  }

  Scalar b_norm(const Vector& w) const { return std::sqrt(std::max(Scalar{0}, w.dot(b_ * w))); }

 private:
  const SparseMatrix& b_;
  Matrix v_;
};

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// Final Rayleigh-Ritz pass in the original pencil: makes the returned vectors
// B-orthonormal to roundoff and the values exact Rayleigh quotients.
void refine(const SparseMatrix& a, const SparseMatrix& b, EigenpairResult& result) {
  const Matrix& x = result.vectors;
  Matrix ax = a * x;
  Matrix bx = b * x;
  Matrix as = x.transpose() * ax;
  Matrix bs = x.transpose() * bx;
  as = 0.5 * (as + as.transpose()).eval();
  bs = 0.5 * (bs + bs.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(as, bs);
  if (es.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz refinement failed");
  result.values = es.eigenvalues();
  result.vectors = x * es.eigenvectors();
}

}  // namespace

EigenpairResult shift_invert_lanczos(const SparseMatrix& a, const SparseMatrix& b, Index count, Scalar shift,
                                     const LanczosOptions& options) {
  const Index n = a.rows();
  const Index bs = std::max<Index>(1, options.block_size);
  if (count < 1) throw UsageError("eigenpair count must be positive");
  Index p = options.krylov_dim > 0 ? options.krylov_dim : std::max(2 * count + 2 * bs, count + 60);
  p = std::min(p, n - bs);
  if (p <= count) {
    throw UsageError("Krylov dimension too small for " + std::to_string(count) + " pairs of a size-" +
                     std::to_string(n) + " problem; use the dense solver");
  }

  SparseMatrix shifted = a - shift * b;
  Eigen::SimplicialLDLT<SparseMatrix> factor(shifted);
  if (factor.info() != Eigen::Success) throw NumericalError("LDL^T factorization of the shifted operator failed");
  if ((factor.vectorD().array() <= 0).any()) {
    throw NumericalError("shifted operator is not positive definite; shift must lie below the spectrum");
  }

  std::mt19937_64 rng(options.seed);
  BOrthoBasis basis(b, n, p + bs);
  Matrix& v = basis.vectors();
  Matrix h = Matrix::Zero(p + bs, p + bs);

  for (Index i = 0; i < bs; ++i) {
    Vector w = random_vector(n, rng);
    Scalar norm = 0;
    basis.orthogonalize(w, i, &norm);
    v.col(i) = w / norm;
  }

  EigenpairResult result;
  Index nvec = bs;
  Index nexp = 0;
  for (int restart = 0;; ++restart) {
    while (nexp < p) {
      const Index j = nexp;
      Vector w = factor.solve(b * v.col(j));
      ++result.operator_applications;
      const Scalar before = basis.b_norm(w);
      Scalar beta = 0;
      h.col(j).head(nvec) = basis.orthogonalize(w, nvec, &beta);
      if (beta <= 1e-12 * before) {
        // Invariant subspace found: continue with a fresh direction.
        w = random_vector(n, rng);
        basis.orthogonalize(w, nvec, &beta);
        h(nvec, j) = 0;
      } else {
        h(nvec, j) = beta;
      }
      v.col(nvec) = w / beta;
      ++nvec;
      ++nexp;
    }

    // Only the lower triangle is read: it holds the coefficients computed when
    // each column was expanded, including the restart couplings.
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.topLeftCorner(p, p));
    if (es.info() != Eigen::Success) throw NumericalError("projected eigenproblem failed");
    // Largest Ritz values of the inverted operator are the wanted pairs.
    const Vector theta = es.eigenvalues().reverse();
    const Matrix y = es.eigenvectors().rowwise().reverse();
    const Matrix coupling = h.block(p, 0, bs, p) * y;

    Index converged = 0;
    Scalar worst = 0;
    for (Index i = 0; i < count; ++i) {
      const Scalar res = coupling.col(i).norm() / std::abs(theta[i]);
      worst = std::max(worst, res);
      if (res <= options.tolerance) ++converged;
    }

    if (converged == count) {
      result.restarts = restart;
      result.vectors = v.leftCols(p) * y.leftCols(count);
      break;
    }
    if (restart >= options.max_restarts) {
      std::ostringstream msg;
      msg << "Lanczos did not converge: " << converged << "/" << count << " pairs after " << restart
          << " restarts, " << result.operator_applications << " operator applications, worst relative residual "
          << worst;
      throw NumericalError(msg.str());
    }

    const Index keep = std::min(p - 1, count + (p - count) / 2);
    Matrix kept = v.leftCols(p) * y.leftCols(keep);
    const Matrix tail = v.middleCols(p, bs);
    v.leftCols(keep) = kept;
    v.middleCols(keep, bs) = tail;
    h.setZero();
    h.diagonal().head(keep) = theta.head(keep);
    h.block(keep, 0, bs, keep) = coupling.leftCols(keep);
    nvec = keep + bs;
    nexp = keep;
  }

  refine(a, b, result);
  return result;
}

EigenpairResult dense_generalized_eigenpairs(const SparseMatrix& a, const SparseMatrix& b, Index count) {
  const Matrix ad(a), bd(b);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(ad, bd);
  if (es.info() != Eigen::Success) throw NumericalError("dense generalized eigensolver failed");
  EigenpairResult result;
  result.values = es.eigenvalues().head(count);
  result.vectors = es.eigenvectors().leftCols(count);
  return result;
}

}  // namespace specdesc
