#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "gen.hpp"
#include "pstruct/field_io.hpp"
#include "pstruct/grid.hpp"

using namespace pstruct;
using namespace pstruct::grid;

namespace {

constexpr double pi = std::numbers::pi;

template <typename F>
VectorField vector_field(const DomainSpec& d, F fn) {
  VectorField u(d);
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    const auto c = d.coords(n);
    const std::array<double, 3> x{c[0] * d.h(), c[1] * d.h(), c[2] * d.h()};
    const auto v = fn(x);
    for (std::size_t i = 0; i < 3; ++i) u(i, n) = v[i];
  }
  return u;
}

VectorField random_smooth(const DomainSpec& d, std::mt19937_64& rng) {
  double a[3][3];
  for (auto& row : a)
    for (auto& x : row) x = gen::uniform(rng, -1, 1);
  return vector_field(d, [&](const std::array<double, 3>& x) {
    std::array<double, 3> v{};
    for (int i = 0; i < 3; ++i)
      v[static_cast<std::size_t>(i)] = a[i][0] * std::sin(2 * pi * x[0] + a[i][1]) *
                                           std::cos(2 * pi * x[1] + a[i][2]) * std::sin(pi * x[2]);
    return v;
  });
}

VectorField random_field(const DomainSpec& d, std::mt19937_64& rng) {
  VectorField u(d);
  for (auto& x : u.data()) x = gen::uniform(rng, -1, 1);
  u.apply_constraints();
  return u;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <std::size_t N>
double max_abs(const NodalField<N>& f) {
  return max_abs(std::span<const double>(f.data()));
}

}  // namespace

TEST_CASE("build_domain") {
  const auto d = build_domain(DomainKind::CubicPeriodic, 32);
  CHECK(d.h() == 1.0 / 32);
  CHECK(d.extents() == std::array<int, 3>{32, 32, 33});
  const auto b = build_domain(DomainKind::DirichletBox, 16);
  CHECK(b.is_dirichlet(0, 5, 5));
  CHECK(b.is_dirichlet(5, 16, 5));
  CHECK_FALSE(b.is_dirichlet(5, 5, 5));
  CHECK_THROWS_AS(build_domain(DomainKind::CubicPeriodic, 4), Error);
  try {
    build_domain(DomainKind::CubicPeriodic, 4);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooCoarse);
  }
}

TEST_CASE("gradient of zero and of a linear rotation") {
  const auto d = build_domain(DomainKind::CubicPeriodic, 8);
  CHECK(max_abs(gradient(VectorField(d))) == 0.0);
  const auto b = build_domain(DomainKind::DirichletBox, 8);
  const auto rot = vector_field(b, [](const std::array<double, 3>& x) {
    return std::array<double, 3>{x[1] - 0.5, 0.5 - x[0], 0.0};
  });
  CHECK(max_abs(gradient(rot, GradientMode::Symmetric)) < 1e-13);
  CHECK(max_abs(gradient(rot, GradientMode::Full)) == doctest::Approx(1.0));
}

TEST_CASE("second-order convergence of gradient, Laplacian and div grad") {
  const auto field = [](const std::array<double, 3>& x) {
    const double s = std::sin(2 * pi * x[0]) * std::sin(pi * x[2]);
    return std::array<double, 3>{s, 0.0, 0.0};
  };
  double eg[2], el[2], ed[2];
  for (int r = 0; r < 2; ++r) {
    const auto d = build_domain(DomainKind::CubicPeriodic, 16 << r);
    const auto u = vector_field(d, field);
    const auto g = gradient(u);
    const auto lap = laplacian(u);
    const auto dg = divergence(g);
    eg[r] = el[r] = ed[r] = 0.0;
    for (std::size_t n = 0; n < d.node_count(); ++n) {
      const auto c = d.coords(n);
      const double x = c[0] * d.h(), z = c[2] * d.h();
      eg[r] = std::max(eg[r], std::abs(g(0, n) - 2 * pi * std::cos(2 * pi * x) * std::sin(pi * z)));
      el[r] = std::max(el[r], std::abs(lap(0, n) + 5 * pi * pi * u(0, n)));
      if (!d.is_dirichlet(n)) ed[r] = std::max(ed[r], std::abs(dg(0, n) - lap(0, n)));
    }
  }
  CHECK(eg[0] / eg[1] >= 3.5);
  CHECK(eg[0] / eg[1] <= 4.5);
  CHECK(el[0] / el[1] >= 3.5);
  CHECK(el[0] / el[1] <= 4.5);
  CHECK(ed[0] / ed[1] >= 3.5);
  CHECK(ed[0] / ed[1] <= 4.5);
}

TEST_CASE("stencils are exact on quadratics") {
  const auto d = build_domain(DomainKind::CubicPeriodic, 16);
  const auto u = vector_field(d, [](const std::array<double, 3>& x) {
    const double q = x[2] * (1 - x[2]);
    return std::array<double, 3>{q, q, q};
  });
  const auto lap = laplacian(u);
  for (double v : lap.data()) CHECK(v == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(max_abs(laplacian(VectorField(d))) == 0.0);

  const auto b = build_domain(DomainKind::DirichletBox, 12);
  const auto w = vector_field(b, [](const std::array<double, 3>& x) {
    return std::array<double, 3>{x[0] * x[1], x[2] * x[2], x[0] * x[2] + x[1] * x[1]};
  });
  const auto sd = second_derivatives(w);
  for (std::size_t n = 0; n < b.node_count(); ++n) {
    CHECK(sd.at(0, 0, 1, n) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sd.at(0, 0, 0, n) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sd.at(1, 2, 2, n) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(sd.at(2, 0, 2, n) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sd.at(2, 1, 1, n) == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("second derivatives: star split and trace") {
  std::mt19937_64 rng(41);
  for (auto kind : {DomainKind::CubicPeriodic, DomainKind::DirichletBox}) {
    const auto d = build_domain(kind, 12);
    const auto u = random_smooth(d, rng);
    const auto sd = second_derivatives(u);
    const auto lap = laplacian(u);
    for (std::size_t n = 0; n < d.node_count(); ++n) {
      CHECK(sd.full_squared(n) - sd.star_squared(n) ==
            doctest::Approx(sd.normal_squared(n)).epsilon(1e-12).scale(sd.full_squared(n)));
      for (int i = 0; i < 3; ++i) {
        CHECK(sd.trace(i, n) == doctest::Approx(lap(static_cast<std::size_t>(i), n)).epsilon(1e-12).scale(100.0));
      }
    }
  }
}

TEST_CASE("operators are linear") {
  std::mt19937_64 rng(43);
  const auto d = build_domain(DomainKind::CubicPeriodic, 8);
  const auto u = random_field(d, rng), v = random_field(d, rng);
  const double a = 0.7, b = -1.3;
  const auto w = a * u + b * v;
  const auto dg = gradient(w) - (a * gradient(u) + b * gradient(v));
  CHECK(max_abs(dg) < 1e-12);
  const auto dl = laplacian(w) - (a * laplacian(u) + b * laplacian(v));
  CHECK(max_abs(dl) < 1e-10);
  const auto ds = second_derivatives(w);
  const auto su = second_derivatives(u), sv = second_derivatives(v);
  double m = 0.0;
  for (std::size_t i = 0; i < ds.data().size(); ++i)
    m = std::max(m, std::abs(ds.data()[i] - a * su.data()[i] - b * sv.data()[i]));
  CHECK(m < 1e-10);
  const auto t = gradient(u);
  const auto tt = gradient(v);
  CHECK(max_abs(divergence(a * t + b * tt) - (a * divergence(t) + b * divergence(tt))) < 1e-10);
}

TEST_CASE("summation by parts in the periodic directions") {
  std::mt19937_64 rng(47);
  const auto d = build_domain(DomainKind::CubicPeriodic, 8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto u = random_field(d, rng);
    TensorField t(d);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        for (auto& x : t.component(3 * i + j)) x = gen::uniform(rng, -1, 1);
    const auto g = gradient(u);
    double tg = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t n = 0; n < d.node_count(); ++n) tg += t(3 * i + j, n) * g(3 * i + j, n);
    const double lhs = inner(divergence(t), u);
    CHECK(lhs == doctest::Approx(-tg).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("discrete norms") {
  for (auto kind : {DomainKind::CubicPeriodic, DomainKind::DirichletBox}) {
    const auto d = build_domain(kind, 10);
    ScalarField one(d);
    for (auto& x : one.data()) x = 1.0;
    for (double q : {1.0, 2.0, 3.5, 7.0}) CHECK(lq_norm(one, q) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(lq_norm(one, INFINITY) == 1.0);
  }
  const auto d = build_domain(DomainKind::CubicPeriodic, 16);
  VectorField e1(d);
  for (auto& x : e1.component(0)) x = 1.0;
  e1.apply_constraints();
  CHECK(norm(e1, 2.0) == doctest::Approx(1.0).epsilon(1.0 / 16));
  std::mt19937_64 rng(53);
  const auto u = random_field(d, rng);
  double m = 0.0;
  for (std::size_t n = 0; n < d.node_count(); ++n)
    m = std::max(m, std::sqrt(u(0, n) * u(0, n) + u(1, n) * u(1, n) + u(2, n) * u(2, n)));
  CHECK(norm(u, INFINITY) == m);
  CHECK_THROWS_AS(lq_norm(u, 0.5), Error);
  CHECK(norm(u, 2.0, 2) >= norm(u, 2.0, 1));
  CHECK(norm(u, 2.0, 1) >= norm(u, 2.0, 0));
}

TEST_CASE("pairwise summation is deterministic and accurate") {
  std::vector<double> v(100000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(10000.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::span<const double>{}) == 0.0);
}

TEST_CASE("mollifier: errors, constants and mass") {
  const auto d = build_domain(DomainKind::CubicPeriodic, 16);
  ScalarField c(d);
  for (auto& x : c.data()) x = 3.0;
  CHECK_THROWS_AS(mollify(c, 0.3), Error);
  CHECK_THROWS_AS(mollify(c, 1.5 / 16), Error);
  const auto mc = mollify(c, 2.0 / 16);
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    const int k = d.coords(n)[2];
    if (k >= 2 && k <= 14) CHECK(mc(0, n) == doctest::Approx(3.0).epsilon(1e-14));
  }
  std::mt19937_64 rng(59);
  ScalarField pos(d);
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    const int k = d.coords(n)[2];
    if (k >= 3 && k <= 13) pos(0, n) = gen::uniform(rng, 0, 1);
  }
  const auto mp = mollify(pos, 2.0 / 16);
  CHECK(pairwise_sum(mp.data()) == doctest::Approx(pairwise_sum(pos.data())).epsilon(1e-14));
  const auto w = mollifier_weights(3);
  CHECK(w[0] + 2 * (w[1] + w[2]) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mollifier converges as eps shrinks and respects the gradient bound") {
  std::mt19937_64 rng(61);
  const auto d = build_domain(DomainKind::CubicPeriodic, 32);
  const auto u = random_smooth(d, rng);
  double prev = INFINITY;
  for (int m : {8, 4, 2, 1}) {
    const auto mu = mollify(u, m * d.h());
    const double e = max_abs(mu - u);
    CHECK(e < prev);
    prev = e;
  }
  const auto gu = magnitude(gradient(u));
  const double gmax = max_abs(gu);
  for (int m : {1, 2, 4}) {
    const double eps = m * d.h();
    const auto lhs = magnitude(gradient(mollify(u, eps)));
    const auto rhs = mollify(gu, eps);
    double excess = 0.0;
    for (std::size_t n = 0; n < d.node_count(); ++n) excess = std::max(excess, lhs(0, n) - rhs(0, n));
    CHECK(excess <= d.h() * gmax);
  }
}

TEST_CASE("field serialization round trips bit-exactly") {
  std::mt19937_64 rng(67);
  const auto dir = std::filesystem::temp_directory_path() / "pstruct_grid_io";
  std::filesystem::create_directories(dir);
  for (auto kind : {DomainKind::CubicPeriodic, DomainKind::DirichletBox}) {
    const auto d = build_domain(kind, 9);
    VectorField u(d);
    for (auto& x : u.data()) x = gen::log_uniform(rng, 1e-300, 1e300) * (rng() % 2 ? 1 : -1);
    write_field_binary(dir / "u.bin", u);
    const auto b = read_field_binary<3>(dir / "u.bin");
    CHECK(b.domain() == d);
    CHECK(b.data() == u.data());
    write_field_csv(dir / "u.csv", u);
    const auto c = read_field_csv<3>(dir / "u.csv");
    CHECK(c.domain() == d);
    CHECK(c.data() == u.data());
    CHECK_THROWS_AS(read_field_binary<1>(dir / "u.bin"), Error);
  }
  CHECK_THROWS_AS(read_field_binary<3>(dir / "missing.bin"), Error);
  std::filesystem::remove_all(dir);
}
