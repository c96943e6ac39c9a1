// Multiplier norms on the reproducing space of a kernel, the family norm
// (sup over generators), and the quotient norm over extensions with
// prescribed values on a subset.
#pragma once

#include "agler/hilbert.hpp"

namespace agler {

struct KernelFamily;

enum class NormMethod { pencil, bisection };

struct NormResult {
  double value = 0.0;
  // Coefficient vector (kernel-column coordinates) achieving the norm:
  // adjoint(v) K v = 1 and adjoint(v) Delta K Delta* v = value^2.
  Vector certificate;
  NormMethod method = NormMethod::pencil;
};

// Least rho with (rho^2 - f(x) conj(f(y))) k(x,y) PSD over F, solved as a
// Hermitian pencil on the range of the Gram. Throws unbounded-multiplier
// when Delta_f K has components outside range(K).
NormResult multiplier_norm(const Kernel& k, const PointSet& F,
                           const ScalarFunction& f);

// Max of multiplier_norm over the family's generators restricted to F;
// direct sums never exceed the max of their summands.
double family_norm(const KernelFamily& family, const PointSet& F,
                   const ScalarFunction& f);

struct QuotientResult {
  double value = 0.0;
  ScalarFunction minimizer;  // agrees with psi on Y bitwise
  int iterations = 0;        // bisection steps
  double gap = 0.0;          // certified bracket width at termination
};

// inf over phi with phi|_Y = psi of multiplier_norm(k, X, phi), by bisection
// on t with an inner first-order feasibility solve of the block LMI
// [[tK, Delta K], [K Delta*, tK]] >= 0 over the free values. `tol` is
// relative: the bisection stops once the bracket is within tol*max(1,value).
QuotientResult quotient_norm(const Kernel& k, const PointSet& X,
                             const PointSet& Y, const ScalarFunction& psi,
                             double tol = 1e-6);

}  // namespace agler
