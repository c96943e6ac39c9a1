#include "agler/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace agler {

PickReport pick_feasible(const KernelFamily& family, const PointSet& Y,
                         const ScalarFunction& g, double rho) {
  if (family.generators.empty()) {
    throw Error(ErrorCode::invalid_input, "family has no generators");
  }
  const ScalarFunction gy =
      g.domain().size() == Y.size() ? g : g.restricted_to(Y);
  PickReport report;
  report.feasible = true;
  report.certificates.reserve(family.generators.size());
  for (const Kernel& k : family.generators) {
    const Matrix gram = kernel_gram(pick_kernel(k, gy, rho), Y);
    const PsdReport psd = psd_check(gram);
    report.certificates.push_back(psd.min_eigenvalue);
    report.feasible = report.feasible && psd.is_psd;
  }
  return report;
}

double minimal_rho(const KernelFamily& family, const PointSet& Y,
                   const ScalarFunction& g, double tol) {
  if (tol <= 0.0) {
    throw Error(ErrorCode::invalid_input, "tolerance must be > 0");
  }
  double rho = family_norm(family, Y, g);
  if (rho == 0.0) return 0.0;
  // Certify both sides of the boundary; feasibility is monotone in rho.
  int guard = 0;
  while (!pick_feasible(family, Y, g, rho * (1.0 + tol)).feasible &&
         guard++ < 200) {
    rho *= 1.0 + tol;
  }
  while (pick_feasible(family, Y, g, rho * (1.0 - tol)).feasible &&
         guard++ < 200) {
    rho *= 1.0 - tol;
  }
  return rho;
}

namespace {

// Patches the extended Pick matrix over X + {z} as the trial value u at z
// varies; the fixed part is assembled once per generator.
class MarginEvaluator {
 public:
  MarginEvaluator(const KernelFamily& family, const PointSet& X,
                  const ScalarFunction& f, const Point& z, double rho)
      : rho_(rho) {
    const PointSet xz = X.with_appended(z);
    const std::size_t m = X.size();
    gens_.reserve(family.generators.size());
    for (const Kernel& k : family.generators) {
      Gen gen;
      gen.n = k.dim();
      const Eigen::Index n = gen.n;
      const Eigen::Index dim = n * static_cast<Eigen::Index>(m + 1);
      const Matrix full = kernel_gram(k, xz);
      gen.fvals.reserve(m);
      for (std::size_t i = 0; i < m; ++i) gen.fvals.push_back(f.at(X[i].label));
      gen.kzz = full.block(n * m, n * m, n, n);
      gen.strip = full.block(0, n * m, n * m, n);
      gen.tmpl = Matrix::Zero(dim, dim);
      const double r2 = rho * rho;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          const Complex factor =
              r2 - gen.fvals[i] * std::conj(gen.fvals[j]);
          gen.tmpl.block(n * i, n * j, n, n) =
              factor * full.block(n * i, n * j, n, n);
        }
      }
      gens_.push_back(std::move(gen));
    }
  }

  struct Result {
    double margin = std::numeric_limits<double>::infinity();
    bool feasible = true;
    std::vector<double> per_generator;
  };

  Result eval(Complex u) const {
    Result res;
    const double r2 = rho_ * rho_;
    for (const Gen& gen : gens_) {
      Matrix p = gen.tmpl;
      const Eigen::Index n = gen.n;
      const Eigen::Index m = static_cast<Eigen::Index>(gen.fvals.size());
      for (Eigen::Index i = 0; i < m; ++i) {
        const Complex factor = r2 - gen.fvals[i] * std::conj(u);
        p.block(n * i, n * m, n, n) = factor * gen.strip.block(n * i, 0, n, n);
        p.block(n * m, n * i, n, n) =
            p.block(n * i, n * m, n, n).adjoint();
      }
      p.block(n * m, n * m, n, n) = (r2 - std::norm(u)) * gen.kzz;
      Eigen::SelfAdjointEigenSolver<Matrix> es(p, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues()(0);
      const double lmax = es.eigenvalues()(es.eigenvalues().size() - 1);
      res.per_generator.push_back(lmin);
      res.margin = std::min(res.margin, lmin);
      res.feasible = res.feasible && lmin >= -tol::psd_rel * (1.0 + lmax);
    }
    return res;
  }

  std::size_t generator_count() const { return gens_.size(); }

 private:
  struct Gen {
    int n = 1;
    std::vector<Complex> fvals;
    Matrix kzz;
    Matrix strip;  // K(x_i, z) blocks stacked
    Matrix tmpl;   // Pick matrix with the z row/column left blank
  };
  double rho_;
  std::vector<Gen> gens_;
};

struct RegionBuilder {
  const MarginEvaluator& evaluator;
  FeasibleRegion region;

  int add_cell(double re, double im, double size, int depth) {
    const MarginEvaluator::Result r = evaluator.eval(Complex(re, im));
    region.cells.push_back(
        {re, im, size, r.margin, r.feasible, depth, true});
    return static_cast<int>(region.cells.size()) - 1;
  }

  bool any_feasible() const {
    for (const auto& c : region.cells) {
      if (c.feasible) return true;
    }
    return false;
  }

  std::vector<int> top_margin_leaves(std::size_t count) const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < region.cells.size(); ++i) {
      if (region.cells[i].leaf) idx.push_back(static_cast<int>(i));
    }
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      const auto& ca = region.cells[a];
      const auto& cb = region.cells[b];
      if (ca.margin != cb.margin) return ca.margin > cb.margin;
      if (ca.re != cb.re) return ca.re < cb.re;
      return ca.im < cb.im;
    });
    if (idx.size() > count) idx.resize(count);
    return idx;
  }

  // Splits each frontier cell into four children at the next depth; returns
  // the children whose verdict disagrees with a sibling or the parent.
  std::vector<int> refine(const std::vector<int>& frontier, int depth) {
    std::vector<int> next;
    for (int parent_idx : frontier) {
      region.cells[parent_idx].leaf = false;
      const auto parent = region.cells[parent_idx];  // copy: vector grows
      const double q = parent.size / 4.0;
      const double h = parent.size / 2.0;
      int children[4];
      int c = 0;
      for (double dy : {-q, q}) {
        for (double dx : {-q, q}) {
          children[c++] = add_cell(parent.re + dx, parent.im + dy, h, depth);
        }
      }
      bool mixed = false;
      for (int i = 0; i < 4; ++i) {
        if (region.cells[children[i]].feasible != parent.feasible ||
            region.cells[children[i]].feasible !=
                region.cells[children[0]].feasible) {
          mixed = true;
          break;
        }
      }
      if (mixed) {
        for (int i = 0; i < 4; ++i) next.push_back(children[i]);
      }
    }
    return next;
  }
};

}  // namespace

bool FeasibleRegion::any_feasible() const {
  for (const auto& c : cells) {
    if (c.feasible) return true;
  }
  return false;
}

const FeasibleRegion::Cell* FeasibleRegion::best_cell() const {
  const Cell* best = nullptr;
  for (const auto& c : cells) {
    if (!c.feasible) continue;
    if (!best || c.margin > best->margin ||
        (c.margin == best->margin &&
         (c.re < best->re || (c.re == best->re && c.im < best->im)))) {
      best = &c;
    }
  }
  return best;
}

double FeasibleRegion::feasible_radius() const {
  double radius = 0.0;
  for (const auto& c : cells) {
    if (c.feasible) radius = std::max(radius, std::hypot(c.re, c.im));
  }
  return radius;
}

namespace {

FeasibleRegion build_region(const KernelFamily& family, const PointSet& X,
                            const ScalarFunction& f, const Point& z,
                            double rho, int grid_n, int depth,
                            std::optional<double> bound_override,
                            int deep_depth_cap) {
  if (grid_n < 1) {
    throw Error(ErrorCode::invalid_input, "grid size must be >= 1");
  }
  if (rho < 0.0) {
    throw Error(ErrorCode::invalid_input, "rho must be >= 0");
  }
  if (X.contains(z.label)) {
    throw Error(ErrorCode::invalid_input,
                "extension point '" + z.label + "' already belongs to X");
  }

  bool diag_alive = false;
  for (const Kernel& k : family.generators) {
    if (max_abs(k.eval(z, z)) > tol::diag_nonzero) {
      diag_alive = true;
      break;
    }
  }
  if (!diag_alive) {
    throw Error(ErrorCode::degenerate_point,
                "every generator vanishes on the diagonal at '" + z.label +
                    "'; the feasible set is unbounded");
  }

  const MarginEvaluator evaluator(family, X, f, z, rho);
  RegionBuilder builder{evaluator, {}};
  const double bound = bound_override.value_or(rho);
  builder.region.bound_radius = bound;
  builder.region.refinement_depth = depth;

  if (bound <= 0.0) {
    builder.region.base_cell_size = 0.0;
    builder.add_cell(0.0, 0.0, 0.0, 0);
    return std::move(builder.region);
  }

  const double h = 2.0 * bound / grid_n;
  builder.region.base_cell_size = h;
  std::vector<int> grid(static_cast<std::size_t>(grid_n) * grid_n, -1);
  for (int iy = 0; iy < grid_n; ++iy) {
    for (int ix = 0; ix < grid_n; ++ix) {
      const double re = -bound + (ix + 0.5) * h;
      const double im = -bound + (iy + 0.5) * h;
      if (std::hypot(re, im) > bound + 0.75 * h) continue;
      grid[static_cast<std::size_t>(iy) * grid_n + ix] =
          builder.add_cell(re, im, h, 0);
    }
  }

  // Base-level boundary: any cell whose verdict differs from an evaluated
  // 8-neighbour, or that touches the unevaluated rim while feasible.
  std::vector<int> frontier;
  for (int iy = 0; iy < grid_n; ++iy) {
    for (int ix = 0; ix < grid_n; ++ix) {
      const int idx = grid[static_cast<std::size_t>(iy) * grid_n + ix];
      if (idx < 0) continue;
      const bool feas = builder.region.cells[idx].feasible;
      bool boundary = false;
      for (int dy = -1; dy <= 1 && !boundary; ++dy) {
        for (int dx = -1; dx <= 1 && !boundary; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = ix + dx;
          const int ny = iy + dy;
          if (nx < 0 || ny < 0 || nx >= grid_n || ny >= grid_n) {
            boundary = feas;
            continue;
          }
          const int nidx = grid[static_cast<std::size_t>(ny) * grid_n + nx];
          if (nidx < 0) {
            boundary = feas;
          } else if (builder.region.cells[nidx].feasible != feas) {
            boundary = true;
          }
        }
      }
      if (boundary) frontier.push_back(idx);
    }
  }

  const std::size_t seed_count = 9;
  for (int level = 1; level <= depth; ++level) {
    if (!builder.any_feasible()) {
      frontier = builder.top_margin_leaves(seed_count);
    }
    if (frontier.empty()) break;
    frontier = builder.refine(frontier, level);
  }

  // Extension mode: when the coarse grid has no feasible cell, walk a 5x5
  // stencil from the best cell, moving while the margin improves and
  // halving the spacing when it does not. The margin is concave in u, so
  // the walk converges to its maximizer; nested-cell zooming instead can
  // get stuck against a cell boundary next to the optimum.
  if (deep_depth_cap > depth && !builder.any_feasible() &&
      !builder.region.cells.empty()) {
    const std::vector<int> start = builder.top_margin_leaves(1);
    double bx = builder.region.cells[start[0]].re;
    double by = builder.region.cells[start[0]].im;
    double best_margin = builder.region.cells[start[0]].margin;
    double step = std::max(builder.region.cells[start[0]].size, 1e-12 * bound);
    const double min_step = 1e-13 * std::max(1.0, bound);
    int level = depth + 1;
    int evals = 0;
    const int eval_budget = 6000;
    while (!builder.any_feasible() && step > min_step &&
           evals < eval_budget) {
      double next_bx = bx;
      double next_by = by;
      double next_margin = best_margin;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const double re = bx + dx * step;
          const double im = by + dy * step;
          const int idx = builder.add_cell(re, im, step, level);
          ++evals;
          const auto& cell = builder.region.cells[idx];
          if (cell.margin > next_margin) {
            next_margin = cell.margin;
            next_bx = cell.re;
            next_by = cell.im;
          }
        }
      }
      if (next_margin > best_margin) {
        bx = next_bx;
        by = next_by;
        best_margin = next_margin;
      } else {
        step *= 0.5;
        ++level;
      }
    }
  }

  return std::move(builder.region);
}

}  // namespace

FeasibleRegion one_point_region(const KernelFamily& family, const PointSet& X,
                                const ScalarFunction& f, const Point& z,
                                double rho, int grid_n, int depth,
                                std::optional<double> bound_override) {
  return build_region(family, X, f, z, rho, grid_n, depth, bound_override,
                      depth);
}

ExtensionResult extend(const InterpolationInstance& instance, double epsilon,
                       int grid_n) {
  const PointSet& X = instance.X;
  const PointSet& Y = instance.Y;
  if (!Y.is_sublist_of(X)) {
    throw Error(ErrorCode::invalid_input, "Y must be an ordered sublist of X");
  }
  if (epsilon < 0.0) {
    throw Error(ErrorCode::invalid_input, "epsilon must be >= 0");
  }
  const double rho = instance.rho
                         ? *instance.rho
                         : minimal_rho(instance.family, Y, instance.g, 1e-9);
  const PickReport pre = pick_feasible(instance.family, Y, instance.g, rho);
  if (!pre.feasible) {
    throw Error(ErrorCode::precondition_violated,
                "interpolation data is infeasible at rho = " +
                    std::to_string(rho));
  }
  const double rho_used = rho * (1.0 + epsilon);

  ExtensionResult result;
  result.rho_used = rho_used;

  // Working data: Y plus the processed points, in processing order.
  std::vector<Point> current_points(Y.points());
  std::vector<Complex> current_values;
  current_values.reserve(X.size());
  for (const Point& p : Y.points()) {
    current_values.push_back(instance.g.at(p.label));
  }

  constexpr int kDeepDepthCap = 40;
  for (const Point& target : X.points()) {
    if (Y.contains(target.label)) continue;
    const PointSet cur(current_points);
    const ScalarFunction fcur(cur, current_values);
    FeasibleRegion region =
        build_region(instance.family, cur, fcur, target, rho_used, grid_n, 3,
                     std::nullopt, kDeepDepthCap);
    const FeasibleRegion::Cell* best = region.best_cell();
    if (!best) {
      // Report the least-infeasible margins so tolerance failures can be
      // told apart from family-axiom violations.
      const MarginEvaluator evaluator(instance.family, cur, fcur, target,
                                      rho_used);
      double least_bad = -std::numeric_limits<double>::infinity();
      Complex least_bad_u = 0.0;
      for (const auto& c : region.cells) {
        if (c.margin > least_bad) {
          least_bad = c.margin;
          least_bad_u = Complex(c.re, c.im);
        }
      }
      throw ExtensionFailure(
          "no feasible value at '" + target.label + "' (best margin " +
              std::to_string(least_bad) + ")",
          fcur, target.label, evaluator.eval(least_bad_u).per_generator);
    }
    const Complex u(best->re, best->im);
    const MarginEvaluator evaluator(instance.family, cur, fcur, target,
                                    rho_used);
    result.step_margins.push_back(evaluator.eval(u).per_generator);
    result.order.push_back(target.label);
    current_points.push_back(target);
    current_values.push_back(u);
  }

  // Final function in the original order of X.
  const PointSet assembled(current_points);
  std::vector<Complex> final_values;
  final_values.reserve(X.size());
  for (const Point& p : X.points()) {
    if (Y.contains(p.label)) {
      final_values.push_back(instance.g.at(p.label));
    } else {
      final_values.push_back(current_values[assembled.index_of(p.label)]);
    }
  }
  result.f = ScalarFunction(X, std::move(final_values));
  result.final_margins =
      pick_feasible(instance.family, X, result.f, rho_used).certificates;
  return result;
}

bool two_point_disc_oracle(Complex w1, Complex w2, Complex v1, Complex v2) {
  if (std::abs(w1) >= 1.0 || std::abs(w2) >= 1.0) {
    throw Error(ErrorCode::invalid_input,
                "interpolation nodes must lie in the open unit disc");
  }
  if (w1 == w2) {
    throw Error(ErrorCode::invalid_input,
                "interpolation nodes must be distinct");
  }
  if (std::abs(v1) > 1.0 || std::abs(v2) > 1.0) return false;
  if (v1 == v2) return true;
  const double dw = std::abs((w1 - w2) / (1.0 - w1 * std::conj(w2)));
  const double dv = std::abs((v1 - v2) / (1.0 - v1 * std::conj(v2)));
  return dv <= dw;
}

}  // namespace agler
