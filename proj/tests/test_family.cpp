#include <doctest.h>

#include <cmath>

#include "agler/family.hpp"
#include "agler/multiplier.hpp"
#include "test_util.hpp"

using namespace agler;
using namespace agler::testutil;

namespace {

// Independent summation of the theta series (long double, symmetric order)
// used to pin expected kernel values.
Complex annulus_series_oracle(double r, double theta,
                              std::complex<long double> p, int n) {
  const auto weight = [&](int m) {
    const long double e = 2.0L * (static_cast<long double>(m) + theta);
    return powl(static_cast<long double>(r), e) +
           powl(static_cast<long double>(r), -e);
  };
  std::complex<long double> acc = 1.0L / weight(0);
  for (int m = n; m >= 1; --m) {
    acc += std::pow(p, m) / weight(m) + std::pow(p, -m) / weight(-m);
  }
  return Complex(static_cast<double>(acc.real()),
                 static_cast<double>(acc.imag()));
}

}  // namespace

TEST_CASE("disc_family generators") {
  const KernelFamily one = disc_family(1);
  CHECK(one.generators.size() == 1);

  const KernelFamily family = disc_family(2);
  REQUIRE(family.generators.size() == 2);
  const Matrix at_zero =
      family.generators[1].eval(pt("o", 0.0), pt("o", 0.0));
  CHECK(max_abs(at_zero - Matrix::Identity(2, 2)) < 1e-15);

  CHECK_THROWS_AS(disc_family(0), Error);

  Rng rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet F = random_disc_points(rng, 6, 0.95);
    for (const Kernel& gen : family.generators) {
      CHECK(psd_check(kernel_gram(gen, F)).is_psd);
    }
  }
}

TEST_CASE("disc_compression closed form") {
  Vector gamma1(1);
  gamma1 << 1.0;
  const CompressionFactorization fact = disc_compression(0.0, gamma1, 1);
  // G(z) = z when lambda = 0, and the compressed value at 1/2 is 1/3.
  const Matrix g_half = fact.factor(pt("h", 0.5));
  CHECK(std::abs(g_half(0, 0) - Complex(0.5)) < 1e-15);
  const Matrix k_half = fact.kappa.eval(pt("h", 0.5), pt("h", 0.5));
  const Complex value = (g_half * k_half * g_half.adjoint())(0, 0);
  CHECK(std::abs(value - Complex(1.0 / 3.0)) < 1e-15);

  Vector e1(2);
  e1 << 1.0, 0.0;
  const CompressionFactorization block = disc_compression(0.0, e1, 2);
  Matrix expected(2, 2);
  expected << 0.5, 0.0, 0.0, 1.0;
  CHECK(max_abs(block.factor(pt("h", 0.5)) - expected) < 1e-15);

  CHECK_THROWS_AS(disc_compression(Complex(1.0, 0.5), gamma1, 1), Error);
  Vector not_unit(1);
  not_unit << 2.0;
  CHECK_THROWS_AS(disc_compression(0.0, not_unit, 1), Error);
}

TEST_CASE("disc_compression factorizes rank-one compressions") {
  Rng rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(3));
    const Complex lambda = rng.disc_point(0.9);
    Vector gamma = rng.gaussian_vector(n);
    gamma /= gamma.norm();

    std::vector<Complex> zs{lambda};
    for (int i = 0; i < 4; ++i) zs.push_back(rng.disc_point(0.9));
    const PointSet F = coords(zs);

    const CompressedKernel kp = rank_one_compress(szego_kernel(n), F, F[0], gamma);
    const CompressionFactorization fact = disc_compression(lambda, gamma, n);
    CHECK(isometry_check(kp, fact.kappa, fact.factor, F) <= 1e-10);
  }
}

TEST_CASE("annulus kernel value pinned by an independent oracle") {
  // Stated series at r = 1/2, theta = 0, z = w = 1, truncation 50. The
  // oracle sums in the opposite order with extended precision.
  const Complex expected =
      annulus_series_oracle(0.5, 0.0, {1.0L, 0.0L}, 50);
  CHECK(std::abs(expected - Complex(1.1367607720058066)) < 1e-15);

  const Complex value = annulus_kernel_eval(0.5, 0.0, 1.0, 1.0, 50);
  CHECK(std::abs(value - expected) < 1e-13);
}

TEST_CASE("annulus kernel symmetry, domain, and truncation") {
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const Complex z = rng.annulus_point(0.5, 0.1);
    const Complex w = rng.annulus_point(0.5, 0.1);
    const double theta = rng.uniform();
    const Complex a = annulus_kernel_eval(0.5, theta, z, w, 60);
    const Complex b = annulus_kernel_eval(0.5, theta, w, z, 60);
    CHECK(std::abs(a - std::conj(b)) <= 1e-13 * (1.0 + std::abs(a)));

    // Doubling the truncation moves the value by less than the tail bound
    // amp * q^(N+1) / (1 - q).
    const double p = std::abs(z * std::conj(w));
    const double q = std::max(p * 0.25, 0.25 / p);
    const double amp =
        std::pow(0.5, 2.0 * theta) + std::pow(0.5, -2.0 * theta);
    const double tail = amp * std::pow(q, 61) / (1.0 - q);
    const Complex c = annulus_kernel_eval(0.5, theta, z, w, 120);
    CHECK(std::abs(a - c) <= tail);
  }

  CHECK_THROWS_AS(annulus_kernel_eval(0.5, 0.0, 0.3, 1.0, 50), Error);
  CHECK_THROWS_AS(annulus_kernel_eval(0.5, 0.0, 1.0, 2.5, 50), Error);
  CHECK_THROWS_AS(annulus_kernel_eval(1.5, 0.0, 1.0, 1.0, 50), Error);
}

TEST_CASE("annulus grams are PSD across the theta grid") {
  Rng rng(67);
  for (int g = 0; g < 16; ++g) {
    const double theta = g / 16.0;
    const Kernel k = annulus_kernel(0.5, theta);
    const PointSet F = random_annulus_points(rng, 8, 0.5, 0.1);
    CHECK(psd_check(kernel_gram(k, F)).is_psd);
  }
}

TEST_CASE("theta shift by one changes nothing but the weight labels") {
  // c_m(theta+1) = c_{m+1}(theta): the kernels differ by conjugation with
  // z^{-1}, so multiplier norms agree even though the kernels do not.
  Rng rng(71);
  const PointSet F = random_annulus_points(rng, 5, 0.5, 0.1);
  const ScalarFunction f = random_function(rng, F, 1.0);
  for (double theta : {0.0, 0.25, 0.6}) {
    const double n0 =
        multiplier_norm(annulus_kernel(0.5, theta), F, f).value;
    const double n1 =
        multiplier_norm(annulus_kernel(0.5, theta + 1.0), F, f).value;
    CHECK(n0 == doctest::Approx(n1).epsilon(1e-8));
  }
}

TEST_CASE("annulus_family construction") {
  const KernelFamily single = annulus_family(0.5, 1, 50);
  CHECK(single.generators.size() == 1);

  const KernelFamily family = annulus_family(0.5, 8, 80);
  CHECK(family.generators.size() == 8);

  Rng rng(73);
  const PointSet F = random_annulus_points(rng, 4, 0.5, 0.1);
  const ScalarFunction c = ScalarFunction::constant(F, Complex(0.0, 0.7));
  CHECK(family_norm(family, F, c) == doctest::Approx(0.7).epsilon(1e-10));

  CHECK_THROWS_AS(annulus_family(0.0, 8, 80), Error);
  CHECK_THROWS_AS(annulus_family(0.5, 0, 80), Error);
}

TEST_CASE("fit_annulus_compression recovers the compressed slice") {
  Rng rng(79);
  const double r = 0.5;

  // No compression at all: theta is recovered exactly and phi == 1.
  {
    const PointSet F = random_annulus_points(rng, 6, r, 0.1);
    const double theta = 0.3125;  // a grid point of the 512 grid
    const Matrix gram = kernel_gram(annulus_kernel(r, theta), F);
    const CompressionFit fit = fit_annulus_compression(gram, F, r, 512, 200);
    CHECK(fit.residual <= 1e-10);
    CHECK(fit.theta_best == doctest::Approx(theta).epsilon(1e-6));
    for (std::size_t i = 0; i < F.size(); ++i) {
      CHECK(std::abs(fit.phi[i] - Complex(1.0)) < 1e-6);
    }
  }

  // Compress k_0 at a point and fit: small residual, round trip accurate.
  {
    std::vector<Complex> zs{rng.annulus_point(r, 0.15)};
    for (int i = 0; i < 5; ++i) zs.push_back(rng.annulus_point(r, 0.15));
    const PointSet F = coords(zs);
    Vector gamma(1);
    gamma << 1.0;
    const Kernel k0 = annulus_kernel(r, 0.0);
    const CompressedKernel kp = rank_one_compress(k0, F, F[0], gamma);
    const CompressionFit fit =
        fit_annulus_compression(kp.gram, F, r, 512, 200);
    CHECK(fit.residual <= 1e-5);

    const Matrix ref = kernel_gram(annulus_kernel(r, fit.theta_best), F);
    Matrix recomposed(F.size(), F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
      for (std::size_t j = 0; j < F.size(); ++j) {
        recomposed(i, j) = fit.phi[i] * ref(i, j) * std::conj(fit.phi[j]);
      }
    }
    CHECK(max_abs(recomposed - kp.gram) <= 1e-6 * (1.0 + max_abs(kp.gram)));
  }

  // The zero matrix cannot be fitted.
  {
    const PointSet F = random_annulus_points(rng, 4, r, 0.1);
    CHECK_THROWS_AS(
        fit_annulus_compression(Matrix::Zero(4, 4), F, r, 64, 100),
        FitFailure);
  }
}

TEST_CASE("verify_family_axioms on the built-in families") {
  Rng rng(83);

  const PointSet disc_points = random_disc_points(rng, 5, 0.85);
  const AxiomReport disc_report =
      verify_family_axioms(disc_family(2), disc_points, 10, 7);
  CHECK(disc_report.direct_sum_closure.pass);
  CHECK(disc_report.compression_verifiable);
  CHECK(disc_report.compression.pass);
  CHECK(disc_report.compression_max_residual <= 1e-9);
  CHECK(disc_report.bounded_multipliers.pass);
  CHECK(disc_report.diagonal_nonzero.pass);
  CHECK(disc_report.all_pass());

  const PointSet ring_points = random_annulus_points(rng, 8, 0.5, 0.1);
  const AxiomReport ring_report =
      verify_family_axioms(annulus_family(0.5, 8, 120), ring_points, 4, 11);
  CHECK(ring_report.direct_sum_closure.pass);
  CHECK(ring_report.compression_verifiable);
  CHECK(ring_report.compression.pass);
  CHECK(ring_report.compression_max_residual <= 1e-4);
  CHECK(ring_report.bounded_multipliers.pass);
  CHECK(ring_report.diagonal_nonzero.pass);

  // A zero explicit kernel fails the diagonal axiom at every point.
  const PointSet flat = labels_only(3);
  ExplicitTable zero_table(flat, 1);
  const Matrix zero = Matrix::Zero(1, 1);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    for (std::size_t j = i; j < flat.size(); ++j) {
      zero_table.set(flat[i].label, flat[j].label, zero);
    }
  }
  const AxiomReport zero_report = verify_family_axioms(
      explicit_family({Kernel::from_table(std::move(zero_table))}), flat, 3,
      13);
  CHECK_FALSE(zero_report.diagonal_nonzero.pass);
  CHECK(zero_report.zero_diagonal_points.size() == flat.size());
  CHECK_FALSE(zero_report.compression_verifiable);
  CHECK_FALSE(zero_report.all_pass());
}
