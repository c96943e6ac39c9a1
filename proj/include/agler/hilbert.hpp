// Finite-dimensional reproducing-space model over a point set: the Gram
// matrix with a rank-revealing factor, the Q_x idempotents, compressions onto
// complements of kernel-vector spans, and factorization certificates.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "agler/kernel.hpp"

namespace agler {

// Elements are represented by coefficient vectors in kernel-column
// coordinates: v stands for the class of sum_x k(.,x) v_x, and the inner
// product of coefficient vectors u, v is adjoint(v) * gram * u. Orthonormal
// coordinates on the range are derived through the factor L.
class HilbertModel {
 public:
  HilbertModel(Kernel k, PointSet points, double rank_tol = tol::rank_rel);

  const Kernel& kernel() const { return kernel_; }
  const PointSet& points() const { return points_; }
  int block_dim() const { return n_; }
  double rank_tol() const { return rank_tol_; }

  const Matrix& gram() const { return gram_; }
  // L with ||gram - L L*|| <= 1e-10 (1 + ||gram||); columns span the range.
  const Matrix& factor() const { return factor_; }
  int rank() const { return rank_; }

  Eigen::Index coeff_dim() const { return gram_.rows(); }
  Eigen::Index row_of(const std::string& label, int coord) const;

  // Orthonormal basis of the range and the square roots of the kept
  // eigenvalues, so factor() = range_basis() * diag(sqrt_eigs()).
  const Matrix& range_basis() const { return range_basis_; }
  const Vector& sqrt_eigs() const { return sqrt_eigs_; }

  // Isometry [v] -> L* v onto C^rank and a representative lift back.
  Vector to_range(const Vector& coeff) const;
  Vector from_range(const Vector& range_coeff) const;

  // Columns span the numerical null space of the Gram.
  const Matrix& null_basis() const { return null_basis_; }

 private:
  Kernel kernel_;
  PointSet points_;
  int n_;
  double rank_tol_;
  Matrix gram_;
  Matrix factor_;       // U_r diag(sqrt(lambda_r))
  Matrix range_basis_;  // U_r
  Vector sqrt_eigs_;    // sqrt(lambda_r)
  Matrix null_basis_;
  int rank_ = 0;
};

HilbertModel build_h2(const Kernel& k, const PointSet& F,
                      double rank_tol = tol::rank_rel);

// The idempotent fixing classes of k(.,x)v and annihilating k(.,y)v for
// y != x, returned in orthonormal range coordinates. Throws
// precondition-violated when a Gram null vector v has k(.,x)v_x != 0, i.e.
// the mapping is not well defined on the quotient.
Matrix qx_operator(const HilbertModel& model, const Point& x);

struct CompressionSpec {
  struct Generator {
    std::string z;                // label inside the model's point set
    std::vector<Vector> vectors;  // directions in C^n spanning J_z
  };
  std::vector<Generator> generators;
};

struct CompressedKernel {
  Matrix gram;       // Gram of k' over the model's point set
  Matrix projector;  // P_M in kernel-column coordinates
  double defect;     // max residual across the certificates below
};

// k'(x,y) = k(x,y) - k(x,z) gamma gamma* k(z,y) / (gamma* k(z,z) gamma),
// computed entrywise. z must be one of the points of F so the annihilation
// certificate k'(.,z) gamma = 0 and the projector are expressible over F.
CompressedKernel rank_one_compress(const Kernel& k, const PointSet& F,
                                   const Point& z, const Vector& gamma);

// Gram of the compression onto the orthocomplement of the span of the
// generator kernel vectors: K - C pinv(N) C* with C = K S, N = S* K S.
CompressedKernel compress_kernel(const HilbertModel& model,
                                 const CompressionSpec& spec);

// Max entrywise deviation between kprime.gram and the Gram of
// (x,y) -> G(x) kappa(x,y) adjoint(G(y)); small values certify the
// factorized form of the compression.
double isometry_check(const CompressedKernel& kprime, const Kernel& kappa,
                      const std::function<Matrix(const Point&)>& G,
                      const PointSet& F);

}  // namespace agler
