#include "agler/multiplier.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "agler/family.hpp"

namespace agler {

namespace {

// Row-block scaling: (Delta_f M) with Delta_f = blockdiag(f_i I_n).
Matrix row_scaled(const Matrix& m, const std::vector<Complex>& f, int n) {
  Matrix out = m;
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.middleRows(static_cast<Eigen::Index>(i) * n, n) *= f[i];
  }
  return out;
}

std::vector<Complex> values_on(const ScalarFunction& f, const PointSet& F) {
  std::vector<Complex> vals;
  vals.reserve(F.size());
  for (const Point& p : F.points()) vals.push_back(f.at(p.label));
  return vals;
}

}  // namespace

NormResult multiplier_norm(const Kernel& k, const PointSet& F,
                           const ScalarFunction& f) {
  const HilbertModel model = build_h2(k, F);
  const int n = model.block_dim();
  const int r = model.rank();
  if (r == 0) {
    return {0.0, Vector(0), NormMethod::pencil};
  }
  const std::vector<Complex> fv = values_on(f, F);
  const Matrix& K = model.gram();
  const Matrix dk = row_scaled(K, fv, n);

  // Delta K must stay inside range(K); otherwise f is not a multiplier.
  const Matrix& U = model.range_basis();
  const Matrix residual = dk - U * (U.adjoint() * dk);
  if (max_abs(residual) > tol::range_rel * max_abs(K)) {
    throw Error(ErrorCode::unbounded_multiplier,
                "function is not a bounded multiplier: Delta_f K leaves the "
                "range of the Gram");
  }

  // T = pinv(L) Delta L on the range; the norm is its top singular value.
  const Matrix dl = row_scaled(model.factor(), fv, n);
  Matrix T = U.adjoint() * dl;
  for (Eigen::Index i = 0; i < r; ++i) {
    T.row(i) /= model.sqrt_eigs()(i).real();
  }
  Eigen::JacobiSVD<Matrix> svd(T, Eigen::ComputeThinU);
  const double value = svd.singularValues()(0);
  const Vector cert = model.from_range(svd.matrixU().col(0));
  return {value, cert, NormMethod::pencil};
}

double family_norm(const KernelFamily& family, const PointSet& F,
                   const ScalarFunction& f) {
  if (family.generators.empty()) {
    throw Error(ErrorCode::invalid_input, "family has no generators");
  }
  double best = 0.0;
  for (const Kernel& gen : family.generators) {
    best = std::max(best, multiplier_norm(gen, F, f).value);
  }
  return best;
}

namespace {

// Inner feasibility problem of the quotient-norm bisection: does some
// assignment of the free values phi make
//   B(t, phi) = [[tK, Delta K], [K Delta*, tK]]
// positive semi-definite? By the Schur complement (with K pinv(K) K = K)
// that is q(phi) := sigma_max(pinv(L) Delta_phi L) <= t plus the range
// condition, so the search runs Polyak-type subgradient steps on the convex
// q towards the level t and the block matrix itself issues the final
// certificate. Subgradients of q stay well scaled where lambda_min(B)
// flattens out, which is what makes the bisection verdicts reliable.
struct InnerSolver {
  const Matrix& K;
  const Matrix& factor;     // L
  const Matrix& pinv_factor;  // pinv(L)
  int n;
  std::vector<Complex> values;  // full vector over X; free slots mutated
  std::vector<std::size_t> free_slots;
  int iteration_cap = 5000;

  double lambda_min_b(double t) const {
    const Eigen::Index dim = K.rows();
    Matrix b(2 * dim, 2 * dim);
    const Matrix dk = row_scaled(K, values, n);
    b.topLeftCorner(dim, dim) = t * K;
    b.bottomRightCorner(dim, dim) = t * K;
    b.topRightCorner(dim, dim) = dk;
    b.bottomLeftCorner(dim, dim) = dk.adjoint();
    b = 0.5 * (b + b.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

  // Multiplier norm of the current assignment restricted to range(K),
  // with the top singular pair for the subgradient.
  double norm_and_pair(Vector* left, Vector* right) const {
    const Matrix T = pinv_factor * row_scaled(factor, values, n);
    Eigen::JacobiSVD<Matrix> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (left) *left = svd.matrixU().col(0);
    if (right) *right = svd.matrixV().col(0);
    return svd.singularValues()(0);
  }

  bool certify(double t) const {
    const double scale = 1.0 + std::abs(t) * (1.0 + max_abs(K));
    return lambda_min_b(t) >= -1e-9 * scale;
  }

  // Returns true (leaving the witness in `values`) when an assignment with
  // q(phi) <= t is found and the block LMI confirms it.
  bool feasible(double t, int* iterations_used, double* achieved) {
    if (free_slots.empty()) {
      *iterations_used = 1;
      *achieved = norm_and_pair(nullptr, nullptr);
      return *achieved <= t || certify(t);
    }
    const std::vector<Complex> initial = values;
    for (int iter = 1; iter <= iteration_cap; ++iter) {
      Vector u, v;
      const double q = norm_and_pair(&u, &v);
      if (q <= t && certify(t)) {
        *iterations_used = iter;
        *achieved = q;
        return true;
      }
      // d sigma_max / d phi_j = conj(u* pinv(L) E_j L v) in the complex
      // gradient convention; E_j selects the block of the j-th free point.
      const Vector w1 = pinv_factor.adjoint() * u;
      const Vector w2 = factor * v;
      Vector grad(free_slots.size());
      double gnorm2 = 0.0;
      for (std::size_t j = 0; j < free_slots.size(); ++j) {
        const Eigen::Index row0 = static_cast<Eigen::Index>(free_slots[j]) * n;
        Complex c = 0.0;
        for (int cidx = 0; cidx < n; ++cidx) {
          c += std::conj(w1(row0 + cidx)) * w2(row0 + cidx);
        }
        grad(j) = std::conj(c);
        gnorm2 += std::norm(c);
      }
      if (gnorm2 <= 1e-30) break;  // flat direction; nothing more to gain
      const double step = (q - t) / gnorm2;  // Polyak step towards level t
      for (std::size_t j = 0; j < free_slots.size(); ++j) {
        values[free_slots[j]] -= step * grad(j);
      }
    }
    *iterations_used = iteration_cap;
    *achieved = norm_and_pair(nullptr, nullptr);
    if (*achieved <= t && certify(t)) return true;
    values = initial;  // keep the warm start clean for the next bracket
    return false;
  }
};

}  // namespace

QuotientResult quotient_norm(const Kernel& k, const PointSet& X,
                             const PointSet& Y, const ScalarFunction& psi,
                             double tol) {
  if (tol <= 0.0) {
    throw Error(ErrorCode::invalid_input, "quotient tolerance must be > 0");
  }
  if (!Y.is_sublist_of(X)) {
    throw Error(ErrorCode::invalid_input,
                "Y must be an ordered sublist of X");
  }
  const HilbertModel model = build_h2(k, X);
  const int n = model.block_dim();
  const Matrix& K = model.gram();

  // Fixed values from psi; remaining slots are the decision variables.
  std::vector<Complex> fixed(X.size());
  std::vector<std::size_t> free_slots;
  Complex mean = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (psi.defined_at(X[i].label)) {
      fixed[i] = psi.at(X[i].label);
      mean += fixed[i];
    } else {
      free_slots.push_back(i);
    }
  }
  for (const Point& p : Y.points()) {
    (void)psi.at(p.label);  // psi must cover Y
  }
  const std::size_t fixed_count = X.size() - free_slots.size();
  if (fixed_count > 0) mean /= static_cast<double>(fixed_count);

  auto assemble = [&](const std::vector<Complex>& vals) {
    std::vector<Complex> out = vals;
    // Bitwise copies of psi on Y.
    for (const Point& p : Y.points()) {
      out[X.index_of(p.label)] = psi.at(p.label);
    }
    return ScalarFunction(X, out);
  };

  // Diagonal lower bound over Y; upper bound from the constant-mean extension.
  double lo = 0.0;
  for (const Point& p : Y.points()) {
    if (max_abs(k.eval(p, p)) > tol::diag_nonzero) {
      lo = std::max(lo, std::abs(psi.at(p.label)));
    }
  }
  std::vector<Complex> start = fixed;
  for (std::size_t slot : free_slots) start[slot] = mean;
  ScalarFunction phi0 = assemble(start);
  double up = multiplier_norm(k, X, phi0).value;
  if (up < lo) up = lo;

  QuotientResult result;
  result.minimizer = phi0;
  int total_bisections = 0;

  Matrix pinv_factor = model.range_basis().adjoint();
  for (int i = 0; i < model.rank(); ++i) {
    pinv_factor.row(i) /= model.sqrt_eigs()(i).real();
  }

  InnerSolver solver{K, model.factor(), pinv_factor, n, start, free_slots};
  while (up - lo > tol * std::max(1.0, up) && total_bisections < 200) {
    const double t = 0.5 * (lo + up);
    int used = 0;
    double achieved = 0.0;
    InnerSolver trial = solver;  // warm start from the last feasible point
    if (trial.feasible(t, &used, &achieved)) {
      // The witness itself is an extension, so its norm is an upper bound,
      // usually strictly better than the midpoint.
      up = std::min(t, achieved);
      if (up < lo) lo = up;  // a witness overrides an earlier stalled verdict
      solver.values = trial.values;
      result.minimizer = assemble(trial.values);
    } else {
      lo = t;
    }
    ++total_bisections;
  }

  if (up - lo > tol * std::max(1.0, up)) {
    throw Error(ErrorCode::numerical_failure,
                "quotient-norm bisection did not converge: bounds [" +
                    std::to_string(lo) + ", " + std::to_string(up) + "]");
  }

  result.value = up;
  result.gap = up - lo;
  result.iterations = total_bisections;
  return result;
}

}  // namespace agler
