#include "agler/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "agler/multiplier.hpp"
#include "agler/rng.hpp"

namespace agler {

namespace {

constexpr double kTailTarget = 1e-12;
constexpr double kFitMaskFloor = 1e-12;
constexpr double kFitAcceptance = 0.1;
constexpr int kGoldenIterations = 32;

double weight(double r, double theta, int m) {
  const double e = 2.0 * (static_cast<double>(m) + theta);
  return std::pow(r, e) + std::pow(r, -e);
}

void check_annulus_params(double r, int n_trunc) {
  if (!(r > 0.0 && r < 1.0)) {
    throw Error(ErrorCode::invalid_input, "annulus modulus must satisfy 0 < r < 1");
  }
  if (n_trunc < 1) {
    throw Error(ErrorCode::invalid_input, "annulus truncation must be >= 1");
  }
}

bool in_annulus(double r, Complex z) {
  const double a = std::abs(z);
  return a > r && a < 1.0 / r;
}

Complex annulus_sum(double r, double theta, Complex z, Complex w, int n) {
  const Complex p = z * std::conj(w);
  Complex acc = 1.0 / weight(r, theta, 0);
  Complex pos = 1.0;
  Complex neg = 1.0;
  for (int m = 1; m <= n; ++m) {
    pos *= p;
    neg /= p;
    acc += pos / weight(r, theta, m) + neg / weight(r, theta, -m);
  }
  return acc;
}

// Smallest truncation with geometric tail below the target, capped.
int adaptive_truncation(double r, double theta, Complex z, Complex w,
                        int cap) {
  const double p = std::abs(z * std::conj(w));
  const double q = std::max(p * r * r, r * r / p);
  const double amp = std::pow(r, 2.0 * theta) + std::pow(r, -2.0 * theta);
  int n = 1;
  double tail = amp * q * q / (1.0 - q);
  while (tail >= kTailTarget && n < cap) {
    ++n;
    tail *= q;
  }
  return n;
}

}  // namespace

KernelFamily disc_family(int n_max) {
  if (n_max < 1) {
    throw Error(ErrorCode::invalid_input, "disc family needs n_max >= 1");
  }
  KernelFamily family;
  family.id = FamilyId::disc;
  family.disc_max_dim = n_max;
  for (int n = 1; n <= n_max; ++n) {
    family.generators.push_back(szego_kernel(n));
  }
  family.compression_rule = [](const Kernel& k, const PointSet&,
                               const Point& z, const Vector& gamma) {
    if (!z.coordinate) {
      throw Error(ErrorCode::invalid_input,
                  "compression point '" + z.label + "' has no coordinate");
    }
    const double norm = gamma.norm();
    if (norm <= 0.0) {
      throw Error(ErrorCode::invalid_input, "compression direction is zero");
    }
    return disc_compression(*z.coordinate, gamma / norm, k.dim());
  };
  return family;
}

CompressionFactorization disc_compression(Complex lambda, const Vector& gamma,
                                          int n) {
  if (std::abs(lambda) >= 1.0) {
    throw Error(ErrorCode::invalid_input,
                "disc compression point must satisfy |lambda| < 1");
  }
  if (gamma.size() != n) {
    throw Error(ErrorCode::invalid_input,
                "compression direction has the wrong dimension");
  }
  if (std::abs(gamma.norm() - 1.0) > 1e-12) {
    throw Error(ErrorCode::invalid_input,
                "disc compression needs a unit direction");
  }
  const Matrix projector = gamma * gamma.adjoint();
  const Matrix complement = Matrix::Identity(n, n) - projector;
  auto factor = [lambda, projector, complement](const Point& p) -> Matrix {
    if (!p.coordinate) {
      throw Error(ErrorCode::invalid_input,
                  "point '" + p.label + "' has no coordinate");
    }
    const Complex z = *p.coordinate;
    const Complex phi = (z - lambda) / (1.0 - std::conj(lambda) * z);
    return phi * projector + complement;
  };
  return {szego_kernel(n), std::move(factor)};
}

Complex annulus_kernel_eval(double r, double theta, Complex z, Complex w,
                            int n_trunc) {
  check_annulus_params(r, n_trunc);
  if (!in_annulus(r, z) || !in_annulus(r, w)) {
    throw Error(ErrorCode::invalid_input, "point outside the annulus");
  }
  return annulus_sum(r, theta, z, w, n_trunc);
}

Kernel annulus_kernel(double r, double theta, int n_trunc_cap) {
  check_annulus_params(r, n_trunc_cap);
  AnalyticEvaluator ev;
  ev.id = "annulus(r=" + std::to_string(r) + ",theta=" + std::to_string(theta) + ")";
  ev.block_dim = 1;
  ev.eval = [r, theta, n_trunc_cap](Complex z, Complex w) -> Matrix {
    Matrix out(1, 1);
    const int n = adaptive_truncation(r, theta, z, w, n_trunc_cap);
    out(0, 0) = annulus_sum(r, theta, z, w, n);
    return out;
  };
  ev.in_domain = [r](Complex z) { return in_annulus(r, z); };
  return Kernel::analytic(std::move(ev));
}

KernelFamily annulus_family(double r, int theta_grid, int n_trunc) {
  check_annulus_params(r, n_trunc);
  if (theta_grid < 1) {
    throw Error(ErrorCode::invalid_input, "theta grid size must be >= 1");
  }
  KernelFamily family;
  family.id = FamilyId::annulus;
  family.annulus_r = r;
  family.annulus_theta_grid = theta_grid;
  family.annulus_truncation = n_trunc;
  for (int j = 0; j < theta_grid; ++j) {
    family.generators.push_back(
        annulus_kernel(r, static_cast<double>(j) / theta_grid, n_trunc));
  }
  // Fitted factorization: compress, then recover (theta, phi) numerically.
  family.compression_rule = [r, n_trunc](const Kernel& k, const PointSet& F,
                                         const Point& z, const Vector& gamma) {
    const CompressedKernel kp = rank_one_compress(k, F, z, gamma);
    const CompressionFit fit =
        fit_annulus_compression(kp.gram, F, r, 512, n_trunc);
    const ScalarFunction phi = fit.phi;
    auto factor = [phi](const Point& p) -> Matrix {
      Matrix out(1, 1);
      out(0, 0) = phi.at(p.label);
      return out;
    };
    return CompressionFactorization{annulus_kernel(r, fit.theta_best, n_trunc),
                                    std::move(factor)};
  };
  return family;
}

KernelFamily explicit_family(std::vector<Kernel> generators) {
  if (generators.empty()) {
    throw Error(ErrorCode::invalid_input, "family needs at least one generator");
  }
  KernelFamily family;
  family.id = FamilyId::explicit_list;
  family.generators = std::move(generators);
  return family;
}

namespace {

struct RatioFit {
  double residual = 0.0;
  Vector phi;  // sqrt(sigma_1) * top singular vector, phase-normalized
};

// Rank-one fit of kprime ./ k_theta with entries masked where the reference
// kernel is numerically zero. Masked entries are filled from the current
// rank-one approximation and the SVD is repeated.
RatioFit ratio_rank_one(const Matrix& kprime, const Matrix& ref) {
  const Eigen::Index m = kprime.rows();
  Matrix ratio = Matrix::Zero(m, m);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> masked;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::abs(ref(i, j)) < kFitMaskFloor) {
        masked.emplace_back(i, j);
      } else {
        ratio(i, j) = kprime(i, j) / ref(i, j);
      }
    }
  }
  if (masked.size() == static_cast<std::size_t>(m * m)) {
    return {std::numeric_limits<double>::infinity(), Vector(0)};
  }

  const int rounds = masked.empty() ? 1 : 3;
  Eigen::JacobiSVD<Matrix> svd;
  for (int round = 0; round < rounds; ++round) {
    svd.compute(ratio, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (round + 1 < rounds) {
      const Matrix approx = svd.singularValues()(0) * svd.matrixU().col(0) *
                            svd.matrixV().col(0).adjoint();
      for (const auto& [i, j] : masked) ratio(i, j) = approx(i, j);
    }
  }

  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0) {
    return {std::numeric_limits<double>::infinity(), Vector(0)};
  }
  RatioFit fit;
  fit.residual = m > 1 ? sv(1) / sv(0) : 0.0;
  fit.phi = std::sqrt(sv(0)) * svd.matrixU().col(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = std::abs(fit.phi(i));
    if (a > 1e-8) {
      fit.phi *= std::conj(fit.phi(i)) / a;
      break;
    }
  }
  return fit;
}

}  // namespace

CompressionFit fit_annulus_compression(const Matrix& kprime_gram,
                                       const PointSet& F, double r,
                                       int theta_grid, int n_trunc) {
  check_annulus_params(r, n_trunc);
  if (theta_grid < 2) {
    throw Error(ErrorCode::invalid_input, "fit needs a theta grid of >= 2");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(F.size());
  if (kprime_gram.rows() != m || kprime_gram.cols() != m) {
    throw Error(ErrorCode::invalid_input,
                "compressed Gram does not match the point set");
  }
  std::vector<std::pair<double, double>> profile;
  if (max_abs(kprime_gram) <= 0.0) {
    throw FitFailure("compressed kernel is identically zero", profile);
  }

  auto residual_at = [&](double theta) {
    const Kernel ref = annulus_kernel(r, theta, n_trunc);
    return ratio_rank_one(kprime_gram, kernel_gram(ref, F)).residual;
  };

  profile.reserve(theta_grid);
  double best_theta = 0.0;
  double best_res = std::numeric_limits<double>::infinity();
  for (int j = 0; j < theta_grid; ++j) {
    const double theta = static_cast<double>(j) / theta_grid;
    const double res = residual_at(theta);
    profile.emplace_back(theta, res);
    if (res < best_res) {
      best_res = res;
      best_theta = theta;
    }
  }

  // Golden-section refinement inside the bracketing grid cells. The
  // residual is exactly 1-periodic in theta, so crossing 0 or 1 is safe.
  {
    const double h = 1.0 / theta_grid;
    double a = best_theta - h;
    double b = best_theta + h;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = residual_at(c);
    double fd = residual_at(d);
    for (int iter = 0; iter < kGoldenIterations; ++iter) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = residual_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = residual_at(d);
      }
    }
    const double refined = fc < fd ? c : d;
    const double refined_res = std::min(fc, fd);
    if (refined_res < best_res) {
      best_res = refined_res;
      best_theta = refined;
    }
  }

  best_theta -= std::floor(best_theta);  // fold into [0, 1)
  const Kernel ref = annulus_kernel(r, best_theta, n_trunc);
  const RatioFit fit = ratio_rank_one(kprime_gram, kernel_gram(ref, F));
  if (!(fit.residual <= kFitAcceptance)) {
    throw FitFailure("no theta yields a rank-one ratio (best residual " +
                         std::to_string(best_res) + ")",
                     profile);
  }

  CompressionFit out;
  out.theta_best = best_theta;
  out.residual = fit.residual;
  out.grid_profile = std::move(profile);
  std::vector<Complex> phi_values(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) phi_values[i] = fit.phi(i);
  out.phi = ScalarFunction(F, std::move(phi_values));
  return out;
}

AxiomReport verify_family_axioms(const KernelFamily& family, const PointSet& F,
                                 int samples, std::uint64_t seed) {
  if (family.generators.empty()) {
    throw Error(ErrorCode::invalid_input, "family has no generators");
  }
  if (samples < 1) {
    throw Error(ErrorCode::invalid_input, "samples must be >= 1");
  }
  Rng rng(seed);
  AxiomReport report;

  // (i) Closure under direct sums holds by construction: the family is the
  // direct-sum closure of its generator list.
  report.direct_sum_closure.pass = true;
  report.direct_sum_closure.detail =
      std::to_string(family.generators.size()) +
      " generators; direct-sum closure is definitional";

  // (ii) Sampled compressions checked against the family's factorization.
  if (!family.compression_rule || F.empty()) {
    report.compression_verifiable = false;
    report.compression.pass = true;
    report.compression.detail =
        F.empty() ? "empty point set" : "family offers no compression rule";
  } else {
    report.compression_verifiable = true;
    double max_residual = 0.0;
    double scale = 1.0;
    int verified = 0;
    std::string failure;
    for (int s = 0; s < samples; ++s) {
      const Kernel& k = family.generators[rng.index(family.generators.size())];
      const Point& z = F[rng.index(F.size())];
      Vector gamma = rng.gaussian_vector(k.dim());
      const Matrix kzz = k.eval(z, z);
      const Complex pairing = (gamma.adjoint() * kzz * gamma)(0, 0);
      if (std::abs(pairing) <=
          tol::compress_denom_rel * max_abs(kzz) * gamma.squaredNorm()) {
        continue;  // degenerate draw
      }
      try {
        const CompressedKernel kp = rank_one_compress(k, F, z, gamma);
        const CompressionFactorization fact =
            family.compression_rule(k, F, z, gamma);
        const double res = isometry_check(kp, fact.kappa, fact.factor, F);
        max_residual = std::max(max_residual, res);
        scale = std::max(scale, max_abs(kp.gram));
        ++verified;
      } catch (const Error& e) {
        failure = e.what();
        break;
      }
    }
    report.compression_max_residual = max_residual;
    if (!failure.empty()) {
      report.compression.pass = false;
      report.compression.detail = failure;
    } else if (verified == 0) {
      report.compression.pass = false;
      report.compression.detail = "no nondegenerate sample could be drawn";
    } else {
      report.compression.pass = max_residual <= 1e-4 * scale;
      report.compression.detail = std::to_string(verified) +
                                  " samples, max residual " +
                                  std::to_string(max_residual);
    }
  }

  // (iii) Sampled functions have finite family norms.
  {
    bool ok = true;
    double bound = 0.0;
    std::string detail;
    for (int s = 0; s < samples && ok; ++s) {
      std::vector<Complex> values(F.size());
      for (auto& v : values) v = rng.disc_point(1.0);
      const ScalarFunction f(F, std::move(values));
      try {
        bound = std::max(bound, family_norm(family, F, f));
      } catch (const Error& e) {
        ok = false;
        detail = e.what();
      }
    }
    report.bounded_multipliers.pass = ok && std::isfinite(bound);
    report.norm_bound = bound;
    report.bounded_multipliers.detail =
        ok ? "max sampled norm " + std::to_string(bound) : detail;
  }

  // (iv) Some generator has a nonzero diagonal block at every point.
  {
    for (const Point& p : F.points()) {
      bool alive = false;
      for (const Kernel& k : family.generators) {
        if (max_abs(k.eval(p, p)) > tol::diag_nonzero) {
          alive = true;
          break;
        }
      }
      if (!alive) report.zero_diagonal_points.push_back(p.label);
    }
    report.diagonal_nonzero.pass = report.zero_diagonal_points.empty();
    report.diagonal_nonzero.detail =
        report.diagonal_nonzero.pass
            ? "every point has a nonvanishing generator"
            : std::to_string(report.zero_diagonal_points.size()) +
                  " point(s) with k(x,x) = 0 for all generators";
  }

  return report;
}

}  // namespace agler
