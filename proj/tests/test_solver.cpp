#include <doctest.h>

#include "agler/solver.hpp"
#include "test_util.hpp"

using namespace agler;
using namespace agler::testutil;

TEST_CASE("pick_feasible hand values on the disc family") {
  const KernelFamily family = disc_family(2);
  const PointSet Y = coords({0.0, 0.5});

  const PickReport good =
      pick_feasible(family, Y, ScalarFunction(Y, {0.0, 0.5}), 1.0);
  CHECK(good.feasible);
  CHECK(std::abs(good.certificates[0]) < 1e-9);

  const PickReport bad =
      pick_feasible(family, Y, ScalarFunction(Y, {0.0, 0.9}), 1.0);
  CHECK_FALSE(bad.feasible);
  CHECK(bad.certificates[0] < -0.1);

  const PickReport zero =
      pick_feasible(family, Y, ScalarFunction::constant(Y, 0.0), 0.0);
  CHECK(zero.feasible);
}

TEST_CASE("minimal_rho hand values") {
  const KernelFamily family = disc_family(1);
  const PointSet Y = coords({0.0, 0.5});

  CHECK(minimal_rho(family, Y, ScalarFunction(Y, {0.0, 0.9}), 1e-9) ==
        doctest::Approx(1.8).epsilon(1e-6));

  const Complex c(0.2, -0.6);
  CHECK(minimal_rho(family, Y, ScalarFunction::constant(Y, c), 1e-9) ==
        doctest::Approx(std::abs(c)).epsilon(1e-6));

  const PointSet single = coords({0.3});
  CHECK(minimal_rho(family, single, ScalarFunction(single, {Complex(0.0, 0.7)}),
                    1e-9) == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("minimal_rho certifies both sides of the boundary") {
  Rng rng(89);
  const KernelFamily family = disc_family(1);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet Y = random_disc_points(rng, 3, 0.8);
    const ScalarFunction g = random_function(rng, Y, 0.8);
    const double rho = minimal_rho(family, Y, g, 1e-7);
    if (rho == 0.0) continue;
    CHECK(pick_feasible(family, Y, g, rho * (1.0 + 1e-7)).feasible);
    CHECK_FALSE(pick_feasible(family, Y, g, rho * (1.0 - 1e-5)).feasible);
  }
}

TEST_CASE("two_point_disc_oracle hand values and errors") {
  CHECK(two_point_disc_oracle(0.0, 0.5, 0.0, 0.5));
  CHECK_FALSE(two_point_disc_oracle(0.0, 0.5, 0.0, 0.9));
  CHECK(two_point_disc_oracle(0.0, 0.5, Complex(0.2, 0.1), Complex(0.2, 0.1)));
  CHECK_FALSE(two_point_disc_oracle(0.0, 0.5, 0.0, Complex(1.5, 0.0)));
  CHECK_THROWS_AS(two_point_disc_oracle(0.3, 0.3, 0.0, 0.1), Error);
  CHECK_THROWS_AS(two_point_disc_oracle(1.2, 0.3, 0.0, 0.1), Error);
}

TEST_CASE("oracle agrees with the family Pick test away from the boundary") {
  Rng rng(97);
  const KernelFamily family = disc_family(1);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Complex w1 = rng.disc_point(0.95);
    const Complex w2 = rng.disc_point(0.95);
    const Complex v1 = rng.disc_point(0.95);
    const Complex v2 = rng.disc_point(0.95);
    if (w1 == w2) continue;
    const PointSet Y = coords({w1, w2});
    const ScalarFunction g(Y, {v1, v2});
    const PickReport rep = pick_feasible(family, Y, g, 1.0);
    const double lmin = rep.certificates[0];
    if (std::abs(lmin) <= 1e-7) continue;  // boundary band
    CHECK(rep.feasible == two_point_disc_oracle(w1, w2, v1, v2));
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("one_point_region reproduces the Schwarz bound") {
  const KernelFamily family = disc_family(1);
  const PointSet X = coords({0.0});
  const ScalarFunction f(X, {0.0});
  const FeasibleRegion region =
      one_point_region(family, X, f, pt("z", 0.5), 1.0, 101);
  CHECK(region.any_feasible());
  CHECK(region.feasible_radius() ==
        doctest::Approx(0.5).epsilon(2.0 * region.base_cell_size));

  // All feasible cells sit inside the closed bounding disc (plus a cell).
  for (const auto& c : region.cells) {
    if (c.feasible) {
      CHECK(std::hypot(c.re, c.im) <= region.bound_radius + c.size);
    }
  }
}

TEST_CASE("one_point_region degenerate cases") {
  const KernelFamily family = disc_family(1);

  // rho = 0 with f == 0: only u = 0 remains.
  const PointSet X = coords({0.0});
  const FeasibleRegion tiny = one_point_region(
      family, X, ScalarFunction(X, {0.0}), pt("z", 0.4), 0.0, 11);
  CHECK(tiny.any_feasible());
  CHECK(tiny.feasible_radius() == 0.0);

  // Empty X at rho = 1: the whole closed unit disc.
  const FeasibleRegion disc = one_point_region(
      family, PointSet(), ScalarFunction(), pt("z", 0.2), 1.0, 51);
  CHECK(disc.any_feasible());
  CHECK(disc.feasible_radius() == doctest::Approx(1.0).epsilon(0.05));

  // A family that vanishes at z cannot bound the region.
  const PointSet flat = labels_only(2);
  ExplicitTable zero_table(flat, 1);
  const Matrix zero = Matrix::Zero(1, 1);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    for (std::size_t j = i; j < flat.size(); ++j) {
      zero_table.set(flat[i].label, flat[j].label, zero);
    }
  }
  const KernelFamily zero_family =
      explicit_family({Kernel::from_table(std::move(zero_table))});
  const PointSet x0 = flat.sublist({"p0"});
  CHECK_THROWS_AS(one_point_region(zero_family, x0,
                                   ScalarFunction(x0, {0.0}), flat[1], 1.0, 11),
                  Error);
}

TEST_CASE("one_point_region nests with growing rho") {
  Rng rng(101);
  const KernelFamily family = disc_family(1);
  const PointSet X = random_disc_points(rng, 2, 0.6);
  const ScalarFunction f = random_function(rng, X, 0.5);
  const double rho1 = minimal_rho(family, X, f, 1e-9) * 1.05;
  const double rho2 = rho1 * 1.3;

  // Same grid geometry for both regions via the bound override.
  const FeasibleRegion small =
      one_point_region(family, X, f, pt("z", 0.3), rho1, 41, 0, rho2);
  const FeasibleRegion large =
      one_point_region(family, X, f, pt("z", 0.3), rho2, 41, 0, rho2);
  REQUIRE(small.cells.size() == large.cells.size());
  for (std::size_t i = 0; i < small.cells.size(); ++i) {
    if (small.cells[i].feasible) CHECK(large.cells[i].feasible);
    CHECK(large.cells[i].margin >= small.cells[i].margin - 1e-12);
  }
}

TEST_CASE("extend on the identity-function instance") {
  InterpolationInstance instance;
  instance.X = coords({0.0, 0.5, Complex(-1.0 / 3.0, 0.0)});
  instance.Y = instance.X.sublist({"p0", "p1"});
  instance.g = ScalarFunction(instance.Y, {0.0, 0.5});
  instance.family = disc_family(1);
  instance.rho = 1.0;

  const ExtensionResult res = extend(instance, 1e-6, 101);
  CHECK(res.rho_used == doctest::Approx(1.0 + 1e-6));
  CHECK(res.f.at("p0") == Complex(0.0));
  CHECK(res.f.at("p1") == Complex(0.5));
  REQUIRE(res.order.size() == 1);
  CHECK(res.order[0] == "p2");

  // Soundness: the result passes the family Pick test at rho_used.
  const PickReport post =
      pick_feasible(instance.family, instance.X, res.f, res.rho_used);
  CHECK(post.feasible);
}

TEST_CASE("extend with X == Y returns g and its certificates") {
  InterpolationInstance instance;
  instance.X = coords({0.0, 0.5});
  instance.Y = instance.X;
  instance.g = ScalarFunction(instance.X, {0.0, 0.5});
  instance.family = disc_family(1);
  instance.rho = 1.0;

  const ExtensionResult res = extend(instance);
  CHECK(res.order.empty());
  CHECK(res.step_margins.empty());
  CHECK(res.f.at("p0") == Complex(0.0));
  CHECK(res.f.at("p1") == Complex(0.5));
  REQUIRE(res.final_margins.size() == 1);
  CHECK(res.final_margins[0] > -1e-9);
}

TEST_CASE("extend rejects infeasible data") {
  InterpolationInstance instance;
  instance.X = coords({0.0, 0.5, 0.2});
  instance.Y = instance.X.sublist({"p0", "p1"});
  instance.g = ScalarFunction(instance.Y, {0.0, 0.9});
  instance.family = disc_family(1);
  instance.rho = 1.0;  // infeasible: minimal rho is 1.8
  CHECK_THROWS_AS(extend(instance), Error);
}

TEST_CASE("extend at the critical rho succeeds via deep refinement") {
  Rng rng(103);
  const KernelFamily family = disc_family(1);
  for (int trial = 0; trial < 3; ++trial) {
    InterpolationInstance instance;
    instance.family = family;
    instance.X = random_disc_points(rng, 5, 0.85);
    instance.Y = instance.X.sublist({"p0", "p1", "p2"});
    instance.g = random_function(rng, instance.Y, 0.85);
    instance.rho = minimal_rho(family, instance.Y, instance.g, 1e-9);

    const ExtensionResult res = extend(instance, 1e-6, 101);
    for (const auto& p : instance.Y.points()) {
      CHECK(res.f.at(p.label) == instance.g.at(p.label));
    }
    CHECK(pick_feasible(family, instance.X, res.f, res.rho_used).feasible);
  }
}

TEST_CASE("minimal_rho is monotone under adding consistent constraints") {
  Rng rng(107);
  const KernelFamily family = disc_family(1);
  for (int trial = 0; trial < 10; ++trial) {
    const PointSet X = random_disc_points(rng, 4, 0.8);
    // Data sampled from an actual function keeps the larger set consistent.
    std::vector<Complex> values;
    const Complex a = rng.disc_point(0.9);
    for (const auto& p : X.points()) values.push_back(a * *p.coordinate);
    const ScalarFunction f(X, values);

    const PointSet small = X.sublist({"p0", "p1"});
    const double rho_small =
        minimal_rho(family, small, f.restricted_to(small), 1e-9);
    const double rho_full = minimal_rho(family, X, f, 1e-9);
    CHECK(rho_full >= rho_small - 1e-9 * (1.0 + rho_small));
  }
}

TEST_CASE("restricting the family and restricting the data agree") {
  Rng rng(109);
  const PointSet X = random_disc_points(rng, 4, 0.8);
  const PointSet Y = X.sublist({"p0", "p2"});
  const ScalarFunction g = random_function(rng, Y, 0.8);

  KernelFamily family = disc_family(2);
  const double via_data = minimal_rho(family, Y, g, 1e-9);

  KernelFamily restricted = family;
  restricted.generators.clear();
  for (const Kernel& k : family.generators) {
    restricted.generators.push_back(restrict_kernel(k, Y));
  }
  const double via_family = minimal_rho(restricted, Y, g, 1e-9);
  CHECK(via_data == doctest::Approx(via_family).epsilon(1e-12));
}
