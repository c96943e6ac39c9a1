#include <doctest.h>

#include "agler/hilbert.hpp"
#include "test_util.hpp"

using namespace agler;
using namespace agler::testutil;

TEST_CASE("build_h2 hand values") {
  const HilbertModel one = build_h2(szego_kernel(), coords({0.0}));
  CHECK(one.rank() == 1);
  CHECK(std::abs(one.gram()(0, 0) - Complex(1.0)) < 1e-15);

  const HilbertModel two = build_h2(szego_kernel(), coords({0.0, 0.5}));
  CHECK(two.rank() == 2);

  const HilbertModel flat = build_h2(constant_kernel(labels_only(3)),
                                     labels_only(3));
  CHECK(flat.rank() == 1);
  CHECK(flat.null_basis().cols() == 2);
}

TEST_CASE("build_h2 factorization residual stays below tolerance") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet F = random_disc_points(rng, 5, 0.9);
    const HilbertModel model = build_h2(szego_kernel(2), F);
    const Matrix residual =
        model.gram() - model.factor() * model.factor().adjoint();
    CHECK(residual.norm() <= 1e-10 * (1.0 + model.gram().norm()));
  }
}

TEST_CASE("build_h2 rejects non-PSD kernels") {
  const PointSet F = labels_only(2);
  ExplicitTable table(F, 1);
  Matrix m(1, 1);
  m(0, 0) = 1.0;
  table.set("p0", "p0", m);
  table.set("p1", "p1", m);
  m(0, 0) = 2.0;  // |k(0,1)| > 1 makes the Gram indefinite
  table.set("p0", "p1", m);
  CHECK_THROWS_AS(build_h2(Kernel::from_table(std::move(table)), F),
                  Error);
}

TEST_CASE("qx operators are idempotent and resolve the identity") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet F = random_disc_points(rng, 4, 0.9);
    const HilbertModel model = build_h2(szego_kernel(), F);
    Matrix sum = Matrix::Zero(model.rank(), model.rank());
    for (const Point& x : F.points()) {
      const Matrix q = qx_operator(model, x);
      CHECK(max_abs(q * q - q) <= 1e-9);
      sum += q;
    }
    CHECK(max_abs(sum - Matrix::Identity(model.rank(), model.rank())) <= 1e-9);
  }
}

TEST_CASE("qx on a single point is the identity") {
  const HilbertModel model = build_h2(szego_kernel(), coords({0.25}));
  const Matrix q = qx_operator(model, model.points()[0]);
  CHECK(max_abs(q - Matrix::Identity(1, 1)) < 1e-14);
}

TEST_CASE("qx rejects kernels without the boundedness property") {
  // The all-ones kernel has null vectors whose single-point restrictions
  // leave the null space, so Q_x cannot be well defined.
  const PointSet F = labels_only(3);
  const HilbertModel model = build_h2(constant_kernel(F), F);
  CHECK_THROWS_AS(qx_operator(model, F[0]), Error);
  try {
    qx_operator(model, F[0]);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition_violated);
  }
}

TEST_CASE("rank_one_compress hand values on the Szego kernel") {
  const PointSet F = coords({0.0, 0.5});
  Vector gamma(1);
  gamma << 1.0;
  const CompressedKernel kp =
      rank_one_compress(szego_kernel(), F, F[0], gamma);

  // k'(x,y) = s(x,y) - 1; at (1/2,1/2) that is 4/3 - 1 = 1/3.
  Matrix expected(2, 2);
  expected << 0.0, 0.0, 0.0, 1.0 / 3.0;
  CHECK(max_abs(kp.gram - expected) < 1e-14);
  CHECK(kp.defect < 1e-12);
  CHECK(psd_check(kp.gram).is_psd);
}

TEST_CASE("rank_one_compress annihilates the compressed direction") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet F = random_disc_points(rng, 5, 0.9);
    const int n = 1 + static_cast<int>(rng.index(3));
    const Kernel k = szego_kernel(n);
    Vector gamma = rng.gaussian_vector(n);
    const std::size_t zi = rng.index(F.size());
    const CompressedKernel kp = rank_one_compress(k, F, F[zi], gamma);
    const double scale = max_abs(kernel_gram(k, F));
    for (std::size_t i = 0; i < F.size(); ++i) {
      const double res =
          (kp.gram.block(n * i, n * zi, n, n) * gamma).cwiseAbs().maxCoeff();
      CHECK(res <= 1e-11 * scale);
    }
    CHECK(psd_check(kp.gram).is_psd);
  }
}

TEST_CASE("rank_one_compress precondition errors") {
  const PointSet F = coords({0.0, 0.5});
  Vector gamma(1);
  gamma << 0.0;
  CHECK_THROWS_AS(rank_one_compress(szego_kernel(), F, F[0], gamma), Error);

  gamma << 1.0;
  CHECK_THROWS_AS(
      rank_one_compress(szego_kernel(), F, pt("q", Complex(0.1, 0.0)), gamma),
      Error);

  Vector wrong(2);
  wrong << 1.0, 0.0;
  CHECK_THROWS_AS(rank_one_compress(szego_kernel(), F, F[0], wrong), Error);
}

TEST_CASE("compress_kernel edge cases") {
  const PointSet F = coords({0.0, 0.5});
  const HilbertModel model = build_h2(szego_kernel(), F);

  // Empty spec: nothing is compressed.
  const CompressedKernel same = compress_kernel(model, {});
  CHECK(max_abs(same.gram - model.gram()) == 0.0);

  // Single generator reproduces the closed-form rank-one compression.
  Vector gamma(1);
  gamma << 1.0;
  CompressionSpec spec;
  spec.generators.push_back({"p0", {gamma}});
  const CompressedKernel via_projection = compress_kernel(model, spec);
  const CompressedKernel via_formula =
      rank_one_compress(szego_kernel(), F, F[0], gamma);
  CHECK(max_abs(via_projection.gram - via_formula.gram) <= 1e-11);

  // Spanning generators compress everything away.
  CompressionSpec full;
  full.generators.push_back({"p0", {gamma}});
  full.generators.push_back({"p1", {gamma}});
  const CompressedKernel zero = compress_kernel(model, full);
  CHECK(max_abs(zero.gram) <= 1e-10);
}

TEST_CASE("compress_kernel projector and domination certificates") {
  Rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet F = random_disc_points(rng, 4, 0.9);
    const int n = 2;
    const HilbertModel model = build_h2(szego_kernel(n), F);
    CompressionSpec spec;
    spec.generators.push_back(
        {F[rng.index(F.size())].label, {rng.gaussian_vector(n)}});
    spec.generators.push_back(
        {F[rng.index(F.size())].label, {rng.gaussian_vector(n)}});
    const CompressedKernel kp = compress_kernel(model, spec);

    const Matrix& p = kp.projector;
    CHECK(max_abs(p * p - p) <= 1e-9);
    const Matrix gp = model.gram() * p;
    CHECK(max_abs(gp - gp.adjoint()) <= 1e-9);

    CHECK(psd_check(kp.gram).is_psd);
    CHECK(psd_check(model.gram() - kp.gram).is_psd);
  }
}

TEST_CASE("isometry_check certifies and rejects factorizations") {
  const PointSet F = coords({0.0, 0.5, -0.3});
  Vector gamma(1);
  gamma << 1.0;
  const CompressedKernel kp =
      rank_one_compress(szego_kernel(), F, F[0], gamma);

  // kappa = k' itself with G = I has residual 0.
  ExplicitTable self_table(F, 1);
  for (std::size_t i = 0; i < F.size(); ++i) {
    for (std::size_t j = i; j < F.size(); ++j) {
      self_table.set(F[i].label, F[j].label, kp.gram.block(i, j, 1, 1));
    }
  }
  const Kernel self = Kernel::from_table(std::move(self_table));
  const auto identity_factor = [](const Point&) {
    return Matrix::Identity(1, 1);
  };
  CHECK(isometry_check(kp, self, identity_factor, F) < 1e-15);

  // G == 0 misses by exactly the largest entry of k'.
  const auto zero_factor = [](const Point&) {
    return Matrix::Zero(1, 1).eval();
  };
  CHECK(isometry_check(kp, self, zero_factor, F) ==
        doctest::Approx(max_abs(kp.gram)));
}
