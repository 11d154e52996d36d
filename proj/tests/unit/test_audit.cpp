#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "pstruct/audit.hpp"
#include "pstruct/problems.hpp"

using namespace pstruct;
using namespace pstruct::audit;
using grid::DomainKind;

TEST_CASE("Laplacian constant on the convex box") {
  const auto d32 = grid::build_domain(DomainKind::DirichletBox, 32);
  const auto table = estimate_c5_table(d32, {2, 4, 8, 16}, 20, 1);
  const double c4 = estimate_c4(d32, 20, 1);
  CHECK(c4 >= 0.95);
  CHECK(c4 <= 1.05);
  CHECK(table.c5[0] == doctest::Approx(c4).epsilon(0.02));
  CHECK(estimate_c5(d32, 2.0, 20, 1) == doctest::Approx(c4).epsilon(0.02));
  CHECK(table.k1 > 0.0);
  CHECK(table.k2 >= table.k1);
  CHECK(std::isfinite(table.k2));
  CHECK(table.k_fit > 0.0);
  CHECK_THROWS_AS(estimate_c5(d32, 1.5, 2, 1), Error);
}

TEST_CASE("Laplacian constant is stable under refinement" * doctest::test_suite("slow")) {
  const double a = estimate_c4(grid::build_domain(DomainKind::DirichletBox, 24), 20, 1);
  const double b = estimate_c4(grid::build_domain(DomainKind::DirichletBox, 48), 20, 1);
  CHECK(std::abs(b - a) < 0.03 * b);
}

TEST_CASE("Laplacian ratio of a field with only a normal second derivative") {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 16);
  grid::VectorField v(d);
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    const double z = d.coords(n)[2] * d.h();
    for (std::size_t i = 0; i < 3; ++i) v(i, n) = z * (1 - z);
  }
  const double ratio = grid::second_derivative_norm(grid::second_derivatives(v), 2.0) /
                       grid::lq_norm(grid::laplacian(v), 2.0, grid::NodeSet::Interior);
  CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("r(q)") {
  CHECK(r_of_q(2.0, 1.5) == doctest::Approx(2.4).epsilon(1e-15));
  for (double p : {1.25, 1.5, 1.75}) CHECK(r_of_q(2.0, p) == 6.0 / (p + 1.0));
  for (double p : {1.1, 1.5, 2.0}) CHECK(r_of_q(6.0, p) == 6.0);
  CHECK(r_of_q(2.0, 2.0) == 2.0);
  for (double p : {1.01, 1.3, 1.7, 1.99}) {
    CHECK(std::abs(r_of_q(3.0 - 1e-6, p) - 3.0) < 1e-5);
    CHECK(std::abs(r_of_q(3.0 + 1e-6, p) - 3.0) < 1e-5);
    CHECK(r_of_q(2.5, p) > 2.5);
  }
  CHECK_THROWS_AS(r_of_q(1.9, 1.5), Error);
  CHECK_THROWS_AS(r_of_q(2.5, 2.5), Error);
  CHECK_THROWS_AS(r_of_q(2.5, 1.0), Error);
}

TEST_CASE("admissible exponents") {
  const auto iv = admissible_p({2.0, 4.0, 8.0}, 1.0, 4.0);
  CHECK(iv[0].lower == 1.0);
  CHECK(iv[0].upper == 2.0);
  CHECK(iv[1].lower == 1.75);
  CHECK(iv[2].constant == 4.0);
  CHECK_FALSE(iv[1].flagged);
  const auto tight = admissible_p({4.0}, 1.0, 1e6);
  CHECK(tight[0].flagged);
  CHECK(tight[0].upper - tight[0].lower == doctest::Approx(1e-6));
  CHECK(c6_hat(1.1, {0.9, 1.4, 1.2}) == 1.4);
  CHECK(c6_hat(1.1, {0.9}) == 1.1);
}

TEST_CASE("estimate checks: coverage and exact scalings") {
  SweepSpec s;
  s.n = 8;
  s.seeds = {1, 2};
  CHECK_THROWS_AS(verify_estimate("p_gt_3", s), Error);

  s.p = 2.0;
  s.mus = {1.0};
  const auto lin = verify_estimate("p_gt_2_W22", s);
  CHECK(lin.verdict == "INFORMATIONAL");
  CHECK(lin.spread <= 1.0 + 1e-6);
  CHECK(lin.points.size() == 8);

  s.p = 1.5;
  s.structure = constitutive::Structure::SymmetricGradient;
  s.mus = {0.5};
  const auto sym = verify_estimate("p_lt_2_W22", s);
  CHECK(sym.verdict == "INFORMATIONAL");
  CHECK_FALSE(sym.covered);
  CHECK_FALSE(sym.note.empty());

  s.structure = constitutive::Structure::FullGradient;
  s.mus = {0.0};
  s.seeds = {3};
  s.amplitudes = {4.0, 16.0};
  s.solver.outer_tol = 1e-10;
  s.solver.continuation.eta_floor = 1e-12;
  s.solver.continuation.mu_floor = 1e-12;
  const auto hom = verify_estimate("p_lt_2_W22", s);
  CHECK(hom.verdict == "PASS");
  // degree 1/(p-1) = 2 homogeneity of the solution map
  CHECK(hom.points[1].lhs / hom.points[0].lhs == doctest::Approx(16.0).epsilon(1e-4));

  s.p = 1.5;
  s.c_hat = 4.0;
  CHECK(verify_estimate("p_lt_2_W22", s).verdict == "INFORMATIONAL");
}

TEST_CASE("estimate errors carry the sweep point") {
  SweepSpec s;
  s.n = 8;
  s.p = 1.5;
  s.mus = {0.0};
  s.seeds = {5};
  s.amplitudes = {1.0};
  s.solver.max_outer = 1;
  s.solver.outer_tol = 1e-14;
  try {
    verify_estimate("p_lt_2_W22", s);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("mu=0") != std::string::npos);
    CHECK(what.find("seed=5") != std::string::npos);
    CHECK(what.find("amplitude=1") != std::string::npos);
  }
}

TEST_CASE("tangential energies") {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 16);
  const auto zero = tangential_energy_check(grid::VectorField(d), 3.0, 1.0, 1);
  CHECK(zero.i_s == 0.0);
  CHECK(zero.ratio == 1.0);
  const auto u = problems::sample(problems::smooth_test_field(DomainKind::CubicPeriodic), d);
  for (int s : {1, 2}) {
    CHECK(tangential_energy_check(u, 2.0, 0.5, s).ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tangential_energy_check(u, 3.0, 1.0, s).ratio >= 0.95);
    CHECK(tangential_energy_check(u, 1.5, 0.2, s).ratio >= 0.5 - 0.05);
  }
  CHECK_THROWS_AS(tangential_energy_check(u, 3.0, 1.0, 3), Error);
  const auto b = grid::build_domain(DomainKind::DirichletBox, 8);
  CHECK_THROWS_AS(tangential_energy_check(grid::VectorField(b), 3.0, 1.0, 1), Error);
}

TEST_CASE("Hoelder seminorm") {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 12);
  grid::TensorField g(d);
  for (std::size_t c = 0; c < 9; ++c)
    for (auto& x : g.component(c)) x = 0.3 * static_cast<double>(c);
  CHECK(holder_seminorm(g, 0.5, 1000, 1) == 0.0);
  CHECK_THROWS_AS(holder_seminorm(g, 1.0, 10, 1), Error);
  const double alpha = 1.0 - 3.0 / 6.0;
  CHECK(alpha == 0.5);
  const auto u = problems::sample(problems::smooth_test_field(DomainKind::CubicPeriodic), d);
  const auto gu = grid::gradient(u);
  CHECK(holder_seminorm(gu, 0.5, 2000, 4) == holder_seminorm(gu, 0.5, 2000, 4));
  CHECK(holder_seminorm(gu, 0.5, 2000, 4) > 0.0);
}

TEST_CASE("Hoelder seminorm is stable under refinement" * doctest::test_suite("slow")) {
  std::vector<double> values;
  for (int n : {24, 32, 48}) {
    const auto d = grid::build_domain(DomainKind::CubicPeriodic, n);
    const auto prob = problems::make_problem(d, {1.8, 0.0}, {"smooth-trig", 1.0, 0});
    solver::SolveConfig cfg;
    cfg.continuation.enabled = true;
    const auto s = solver::run(prob, cfg);
    values.push_back(holder_seminorm(grid::gradient(s.v), 0.5, 20000, 1));
  }
  const double lo = *std::min_element(values.begin(), values.end());
  const double hi = *std::max_element(values.begin(), values.end());
  CHECK(hi < 1.2 * lo);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  std::atomic<int> count{0};
  CHECK_THROWS_AS(parallel_for(10, 2,
                               [&](std::size_t i) {
                                 ++count;
                                 if (i == 4) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  CHECK(count == 10);
}

TEST_CASE("thread count does not change estimate results") {
  SweepSpec s;
  s.n = 8;
  s.p = 2.5;
  s.mus = {1.0, 0.5};
  s.seeds = {1};
  const auto a = verify_estimate("p_gt_2_W22", s);
  s.threads = 3;
  const auto b = verify_estimate("p_gt_2_W22", s);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].ratio == b.points[i].ratio);
  CHECK(a.mu_slope == b.mu_slope);
}
