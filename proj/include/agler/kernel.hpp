// Matrix-valued positive semi-definite kernels on finite point sets and the
// operations everything else is built from: Gram assembly, PSD certification,
// direct sums, restriction, Pick-kernel formation, and scalarization.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <variant>

#include "agler/types.hpp"

namespace agler {

namespace tol {
// PSD verdict: min eigenvalue >= -tol * (1 + max eigenvalue).
inline constexpr double psd_rel = 1e-9;
// Hermitian symmetry required of assembled Grams.
inline constexpr double herm_strict_rel = 1e-12;
// Asymmetry gate above which psd_check refuses to symmetrize silently.
inline constexpr double herm_rel = 1e-10;
// Relative eigenvalue threshold for rank decisions and pseudo-inverses.
inline constexpr double rank_rel = 1e-10;
// Range-containment gate for the multiplier pencil.
inline constexpr double range_rel = 1e-8;
// Rank-one compression denominator gate, relative to ||k(z,z)||*||gamma||^2.
inline constexpr double compress_denom_rel = 1e-12;
// Null-vector stability gate for the Q_x well-definedness check.
inline constexpr double qx_welldef_rel = 1e-8;
// "k(x,x) nonzero" test used by the diagonal family axiom.
inline constexpr double diag_nonzero = 1e-12;
}  // namespace tol

// Hermitian block table over a fixed point set. One triangle is stored;
// the mirrored block is served as the adjoint.
class ExplicitTable {
 public:
  ExplicitTable(PointSet domain, int block_dim);

  void set(const std::string& x, const std::string& y, Matrix value);

  const PointSet& domain() const { return domain_; }
  int block_dim() const { return n_; }
  bool has(std::size_t i, std::size_t j) const;
  Matrix value(std::size_t i, std::size_t j) const;

 private:
  PointSet domain_;
  int n_;
  std::map<std::pair<std::size_t, std::size_t>, Matrix> entries_;  // i <= j
};

struct AnalyticEvaluator {
  std::string id;
  int block_dim = 1;
  std::function<Matrix(Complex, Complex)> eval;
  std::function<bool(Complex)> in_domain;
};

class Kernel {
 public:
  static Kernel from_table(ExplicitTable table, std::string id = "explicit");
  static Kernel analytic(AnalyticEvaluator evaluator);

  int dim() const { return n_; }
  const std::string& id() const { return id_; }
  bool is_explicit() const;
  // Domain of an explicit (or explicit direct-sum) kernel; null when analytic.
  const PointSet* explicit_domain() const;

  Matrix eval(const Point& x, const Point& y) const;

  friend Kernel direct_sum(const Kernel& k1, const Kernel& k2);
  friend Kernel restrict_kernel(const Kernel& k, const PointSet& Y);

 private:
  struct DirectSum {
    std::shared_ptr<const Kernel> left;
    std::shared_ptr<const Kernel> right;
  };
  using Body = std::variant<ExplicitTable, AnalyticEvaluator, DirectSum>;

  Kernel(int n, std::string id, Body body);

  int n_ = 0;
  std::string id_;
  std::shared_ptr<const Body> body_;
};

struct PsdReport {
  bool is_psd = false;
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

// Assembles the n|F| x n|F| block Gram matrix, block (i,j) = k(F[i], F[j]).
Matrix kernel_gram(const Kernel& k, const PointSet& F);

// PSD certificate: is_psd iff min eig >= -tol*(1 + max eig). Inputs must be
// Hermitian within tol::herm_rel; they are symmetrized before the solve.
PsdReport psd_check(const Matrix& m, double tol = tol::psd_rel);

Kernel direct_sum(const Kernel& k1, const Kernel& k2);

Kernel restrict_kernel(const Kernel& k, const PointSet& Y);

// (rho^2 - f(x) conj(f(y))) k(x,y) over f's domain; PSD is not implied.
Kernel pick_kernel(const Kernel& k, const ScalarFunction& f, double rho);

// Scalar kernel adjoint(G(x)) K(x,y) G(y); the congruence direction, so PSD
// inputs give PSD outputs.
Kernel scalarize(const Kernel& K, const PointSet& F,
                 const std::map<std::string, Vector>& G);

// I_n (x) s with s(z,w) = 1/(1 - z conj(w)) on the open unit disc.
Kernel szego_kernel(int block_dim = 1);

}  // namespace agler
