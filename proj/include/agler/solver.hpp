// Pick feasibility against a family, the minimal admissible bound, certified
// one-point feasible-value regions, and the sequential extension solver.
#pragma once

#include <optional>

#include "agler/family.hpp"
#include "agler/multiplier.hpp"

namespace agler {

struct PickReport {
  bool feasible = false;
  std::vector<double> certificates;  // per-generator Pick min eigenvalues
};

// Feasible iff (rho^2 - g(x) conj(g(y))) k(x,y) is PSD over Y for every
// generator k.
PickReport pick_feasible(const KernelFamily& family, const PointSet& Y,
                         const ScalarFunction& g, double rho);

// family_norm refined so the Pick test holds at rho(1+tol) and fails at
// rho(1-tol) whenever rho > 0.
double minimal_rho(const KernelFamily& family, const PointSet& Y,
                   const ScalarFunction& g, double tol = 1e-9);

struct FeasibleRegion {
  double bound_radius = 0.0;
  double base_cell_size = 0.0;
  int refinement_depth = 0;

  struct Cell {
    double re = 0.0;
    double im = 0.0;
    double size = 0.0;
    double margin = 0.0;  // min over generators of the Pick min eigenvalue
    bool feasible = false;
    int depth = 0;
    bool leaf = true;
  };
  std::vector<Cell> cells;

  bool any_feasible() const;
  // Feasible leaf of maximal margin; ties broken lexicographically by
  // (re, im). Null when the region is empty.
  const Cell* best_cell() const;
  double feasible_radius() const;  // max |u| over feasible leaves
};

// Evaluates the set of admissible values u at a new point z on an adaptive
// grid over the bounding disc |u| <= rho. Throws degenerate-point when no
// generator has k(z,z) != 0 (the bound would be vacuous).
FeasibleRegion one_point_region(const KernelFamily& family, const PointSet& X,
                                const ScalarFunction& f, const Point& z,
                                double rho, int grid_n, int depth = 3,
                                std::optional<double> bound_override = {});

struct InterpolationInstance {
  PointSet X;
  PointSet Y;  // ordered sublist of X
  ScalarFunction g;
  KernelFamily family;
  std::optional<double> rho;  // minimal_rho is computed when absent
};

struct ExtensionResult {
  ScalarFunction f;  // agrees with g on Y bitwise
  double rho_used = 0.0;
  std::vector<std::string> order;  // points of X \ Y in processing order
  // Per extension step, per generator: Pick min eigenvalues after fixing
  // the chosen value.
  std::vector<std::vector<double>> step_margins;
  // Per generator over the full set X at rho_used.
  std::vector<double> final_margins;
};

class ExtensionFailure : public Error {
 public:
  ExtensionFailure(const std::string& message, ScalarFunction partial,
                   std::string offending, std::vector<double> worst_margins)
      : Error(ErrorCode::extension_failure, message),
        partial_(std::move(partial)),
        offending_(std::move(offending)),
        worst_margins_(std::move(worst_margins)) {}

  const ScalarFunction& partial() const { return partial_; }
  const std::string& offending_point() const { return offending_; }
  const std::vector<double>& worst_margins() const { return worst_margins_; }

 private:
  ScalarFunction partial_;
  std::string offending_;
  std::vector<double> worst_margins_;
};

// Extends g from Y to X point by point at rho(1+epsilon), picking at each
// step the feasible cell of maximal margin. When the default-depth region
// comes back empty the search keeps refining around the best cells before
// giving up, since the margin is concave in the new value.
ExtensionResult extend(const InterpolationInstance& instance,
                       double epsilon = 1e-6, int grid_n = 101);

// Classical two-point disc criterion (pseudo-hyperbolic comparison); the
// independent oracle for the family-based Pick test.
bool two_point_disc_oracle(Complex w1, Complex w2, Complex v1, Complex v2);

}  // namespace agler
