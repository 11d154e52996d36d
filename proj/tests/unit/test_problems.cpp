#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pstruct/problems.hpp"
#include "pstruct/solver.hpp"

using namespace pstruct;
using namespace pstruct::problems;
using constitutive::ConstitutiveParams;
using constitutive::Structure;
using grid::DomainKind;

TEST_CASE("rhs catalog") {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 8);
  const auto c = rhs_sample("constant", 2.0, d);
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    if (d.is_dirichlet(n)) continue;
    CHECK(c(0, n) == 2.0);
    CHECK(c(1, n) == 0.0);
    CHECK(c(2, n) == 0.0);
  }
  const auto t = rhs_sample("smooth-trig", 1.0, d);
  const double pi = std::numbers::pi;
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    const auto x = d.coords(n);
    const double v = std::sin(2 * pi * x[0] * d.h()) * std::cos(2 * pi * x[1] * d.h()) * std::sin(pi * x[2] * d.h());
    for (std::size_t i = 0; i < 3; ++i) CHECK(t(i, n) == doctest::Approx(v).epsilon(1e-14).scale(1.0));
  }
  const auto r1 = rhs_sample("band-limited-random", 3.0, d, 7);
  const auto r2 = rhs_sample("band-limited-random(7)", 3.0, d);
  CHECK(r1.data() == r2.data());
  CHECK(rhs_sample("band-limited-random", 3.0, d, 8).data() != r1.data());
  CHECK(grid::norm(r1, 2.0) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK_THROWS_AS(rhs_sample("gaussian", 1.0, d), Error);
  CHECK_THROWS_AS(make_problem(d, {2.0, 1.0}, {"constant", 0.0, 0}), Error);
}

TEST_CASE("discrete manufactured forcing") {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 10);
  CHECK(grid::norm(manufactured_discrete(grid::VectorField(d), {1.5, 0.1}, 1e-3), INFINITY) == 0.0);
  const auto u = sample(smooth_test_field(DomainKind::CubicPeriodic), d);
  const auto f = manufactured_discrete(u, {2.0, 0.3}, 0.0);
  const auto lap = grid::laplacian(u);
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    if (d.is_dirichlet(n)) continue;
    for (std::size_t i = 0; i < 3; ++i) CHECK(f(i, n) == doctest::Approx(-lap(i, n)).epsilon(1e-12).scale(1.0));
  }
  for (auto structure : {Structure::FullGradient, Structure::SymmetricGradient}) {
    const ConstitutiveParams prm(1.5, 0.1, structure);
    const auto g = manufactured_discrete(u, prm, 1e-3);
    CHECK(solver::relative_residual(u, g, prm, 1e-3) <= 1e-12);
  }
}

TEST_CASE("continuous manufactured forcing reduces to the Laplacian for p = 2") {
  const auto d = grid::build_domain(DomainKind::DirichletBox, 8);
  const auto field = smooth_test_field(DomainKind::DirichletBox);
  const auto f = manufactured_continuous(field, {2.0, 0.5}, 0.25, d);
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    if (d.is_dirichlet(n)) continue;
    const auto c = d.coords(n);
    const auto lap = field.laplacian({c[0] * d.h(), c[1] * d.h(), c[2] * d.h()});
    for (std::size_t i = 0; i < 3; ++i) CHECK(f(i, n) == doctest::Approx(-1.25 * lap[i]).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("one-dimensional profile") {
  for (double mu : {0.0, 0.7}) {
    const auto u = oned_profile_oracle(2.0, mu, 3.0, 16);
    for (int k = 0; k <= 16; ++k) {
      const double x = k / 16.0;
      CHECK(u[static_cast<std::size_t>(k)] == doctest::Approx(1.5 * x * (1 - x)).epsilon(1e-12).scale(1.0));
    }
  }
  const auto pr = oned_profile(1.5, 0.0, 1.0);
  CHECK(pr.value(0.5) == doctest::Approx(1.0 / 24).epsilon(1e-13));
  CHECK(pr.slope(0.2) == doctest::Approx(0.09).epsilon(1e-13));
  CHECK(pr.value(0.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(pr.value(1.0) == doctest::Approx(0.0).epsilon(1e-14).scale(1.0));

  const auto q = oned_profile(1.5, 1.0, 1.0);
  for (double x = 0.0; x <= 1.0; x += 0.05) {
    const double s = q.slope(x);
    CHECK(std::abs(std::pow(1.0 + std::abs(s), -0.5) * s - (0.5 - x)) < 1e-10);
    const double step = 1e-4;
    if (x > 0.01 && x < 0.99) {
      CHECK((q.value(x + step) - q.value(x - step)) / (2 * step) == doctest::Approx(s).epsilon(1e-6).scale(1.0));
    }
  }
  CHECK(q.value(0.3) == doctest::Approx(q.value(0.7)).epsilon(1e-13));
}

TEST_CASE("profile field is a fixed point of the residual") {
  // the third derivative of the profile jumps at x3 = 1/2 for p != 2: second
  // order away from the mid-plane, order 3/2 in the global l2 norm
  double global[2], away[2];
  for (int k = 0; k < 2; ++k) {
    const auto d = grid::build_domain(DomainKind::CubicPeriodic, 16 << k);
    const ConstitutiveParams prm(1.5, 0.5);
    const auto u = oned_profile_field(oned_profile(1.5, 0.5, 2.0), d);
    const auto f = rhs_sample("constant", 2.0, d);
    global[k] = solver::relative_residual(u, f, prm, 0.0);
    const auto r = solver::residual_field(u, f, prm, 0.0);
    away[k] = 0.0;
    for (std::size_t n = 0; n < d.node_count(); ++n) {
      if (std::abs(d.coords(n)[2] * d.h() - 0.5) > 2.5 * d.h()) away[k] = std::max(away[k], std::abs(r(0, n)));
    }
  }
  CHECK(global[0] < 1e-2);
  CHECK(global[0] / global[1] >= std::pow(2.0, 1.4));
  CHECK(away[0] / away[1] >= 3.5);
}
