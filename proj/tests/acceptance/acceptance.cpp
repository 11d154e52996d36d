// Acceptance suite. Prints one PASS/FAIL line per criterion; `--only N` runs a
// single criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gen.hpp"
#include "pstruct/audit.hpp"
#include "pstruct/constitutive.hpp"
#include "pstruct/grid.hpp"
#include "pstruct/problems.hpp"
#include "pstruct/reconstruct.hpp"
#include "pstruct/solver.hpp"

using namespace pstruct;
using constitutive::ConstitutiveParams;
using constitutive::Structure;
using constitutive::Tensor3;
using grid::DomainKind;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// least-squares slope of log err against log h
double order_fit(const std::vector<int>& ns, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double x = std::log(1.0 / ns[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void constitutive_suite(Verdict& v) {
  const int pairs = 100000;
  for (double p : {1.2, 1.5, 2.0, 2.5, 3.5}) {
    for (double mu : {0.0, 0.1, 1.0}) {
      std::array<double, 3> ext[2];
      for (int scaled = 0; scaled < 2; ++scaled) {
        const double s = scaled ? 100.0 : 1.0;
        std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(10 * p + 100 * mu));
        const ConstitutiveParams prm(p, s * mu);
        double ell = 1e300, mono = 1e300, lip = 0.0;
        for (int i = 0; i < pairs; ++i) {
          const Tensor3 a = s * gen::tensor(rng, 1e-3, 1e3);
          const Tensor3 b = s * gen::tensor(rng, 1e-3, 1e3);
          const auto r = constitutive::inequality_ratios(a, b, prm);
          ell = std::min(ell, r.ellipticity);
          mono = std::min(mono, r.monotonicity);
          lip = std::max(lip, r.lipschitz);
        }
        ext[scaled] = {ell, mono, lip};
      }
      const auto& e = ext[0];
      std::ostringstream tag;
      tag << "p=" << p << " mu=" << mu;
      v.require(e[0] >= std::min(1.0, p - 1.0) - 1e-9, tag.str() + " ellipticity");
      v.require(e[1] > 0.0 && std::isfinite(e[1]), tag.str() + " monotonicity");
      v.require(std::isfinite(e[2]), tag.str() + " lipschitz");
      for (int k = 0; k < 3; ++k) v.require(rel_diff(e[k], ext[1][k]) <= 1e-9, tag.str() + " scale invariance");
      v.detail << " " << tag.str() << ":(" << e[0] << "," << e[1] << "," << e[2] << ")";
    }
  }
}

void jacobian_check(Verdict& v) {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  const double mus[] = {0.0, 0.1, 1.0};
  for (int s = 0; s < 10000; ++s) {
    const double p = gen::uniform(rng, 1.2, 3.5);
    const double mu = mus[rng() % 3];
    const ConstitutiveParams prm(p, mu);
    const Tensor3 a = gen::tensor(rng, 1e-2, 1e2);
    const auto jac = constitutive::stress_jacobian(a, prm);
    const double step = 1e-5 * (mu + a.norm());
    double num = 0.0, den = 0.0;
    for (std::size_t kl = 0; kl < 9; ++kl) {
      Tensor3 ap = a, am = a;
      ap.v[kl] += step;
      am.v[kl] -= step;
      const auto sp = constitutive::stress(ap, prm), sm = constitutive::stress(am, prm);
      for (std::size_t ij = 0; ij < 9; ++ij) {
        const double fd = (sp.v[ij] - sm.v[ij]) / (2 * step);
        const double ex = jac.v[9 * ij + kl];
        num += (fd - ex) * (fd - ex);
        den += ex * ex;
      }
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  v.require(worst < 1e-5, "relative error");
  v.detail << " max relative error " << worst << " over 10000 samples";
}

void triple_product(Verdict& v) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  double worst = 1e300;
  for (int s = 0; s < 100000; ++s) {
    const Tensor3 g = gen::tensor(rng, 1e-3, 1e3);
    const auto h = gen::array3(rng);
    std::array<double, 3> l{nd(rng), nd(rng), nd(rng)};
    const auto t = constitutive::triple_product_check(g, h, l);
    const double slack = (t.rhs - t.lhs) / t.rhs;
    worst = std::min(worst, slack);
  }
  v.require(worst >= -8 * kEps, "slack");
  v.detail << " min (rhs-lhs)/rhs = " << worst;
}

void normal_systems(Verdict& v) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  double asym = 0.0, qf = 0.0, rayleigh = 1e300, growth = 0.0;
  int strict_growth = 0;
  for (int s = 0; s < 1000; ++s) {
    const double p = gen::uniform(rng, 2.05, 4.0);
    const double mu = gen::log_uniform(rng, 1e-2, 1.0);
    const Tensor3 du = s % 2 ? constitutive::sym_part(gen::tensor(rng, 1e-2, 1e2)) : gen::tensor(rng, 1e-2, 1e2);
    reconstruct::StarDerivatives star{};
    for (auto& x : star) x = nd(rng);
    const std::array<double, 3> f{nd(rng), nd(rng), nd(rng)};
    const auto sys = s % 2 ? reconstruct::assemble_normal_system(du, star, f, p, mu)
                           : reconstruct::assemble_normal_system_full(du, star, f, p, mu);
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t l = 0; l < 3; ++l) asym = std::max(asym, std::abs(sys.at(j, l) - sys.at(l, j)));
    for (int d = 0; d < 1000; ++d) {
      const std::array<double, 3> xi{nd(rng), nd(rng), nd(rng)};
      const double a = reconstruct::quadratic_form(sys, xi);
      const double b = reconstruct::quadratic_form_closed(sys, xi);
      qf = std::max(qf, std::abs(a - b) / std::abs(b));
      rayleigh = std::min(rayleigh, a / (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]));
    }
    const auto x = reconstruct::solve_normal(sys);
    const double nx = std::hypot(x[0], x[1], x[2]), ng = std::hypot(sys.g[0], sys.g[1], sys.g[2]);
    if (nx > ng) ++strict_growth;
    growth = std::max(growth, nx / ng);
  }
  v.require(asym == 0.0, "symmetry");
  v.require(qf <= 1e-13, "quadratic form identity");
  v.require(rayleigh >= 1 - 1e-12, "Rayleigh quotient");
  v.require(growth <= 1 + 4 * kEps, "|x| <= |g|");
  v.detail << " asymmetry " << asym << ", qf rel err " << qf << ", min Rayleigh " << rayleigh
           << ", max |x|/|g| " << growth << " (" << strict_growth << " systems above 1 by rounding)";
}

void solver_correctness(Verdict& v) {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 24);
  const auto u_star = problems::sample(problems::smooth_test_field(DomainKind::CubicPeriodic), d);
  const double un = grid::norm(u_star, 2.0, 1);
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0})
    for (double mu : {0.1, 1.0})
      for (double eta : {0.0, 1e-3}) {
        const ConstitutiveParams prm(p, mu);
        problems::ProblemSpec prob{d, prm, problems::manufactured_discrete(u_star, prm, eta), {}};
        solver::SolveConfig cfg;
        cfg.eta = eta;
        cfg.outer_tol = 1e-11;
        cfg.inner_tol = 1e-4;
        const auto s = solver::solve(prob, cfg);
        const double e = grid::norm(s.v - u_star, 2.0, 1) / un;
        worst = std::max(worst, e);
        v.require(e <= 1e-7, "manufactured p=" + std::to_string(p));
      }
  v.detail << " manufactured max W12 rel err " << worst << ";";

  const std::vector<int> ns{16, 24, 32, 48};
  for (double p : {1.5, 2.0, 2.5}) {
    std::vector<double> errs;
    for (int n : ns) {
      const auto dn = grid::build_domain(DomainKind::CubicPeriodic, n);
      const ConstitutiveParams prm(p, 0.5);
      const auto exact = problems::oned_profile_field(problems::oned_profile(p, 0.5, 2.0), dn);
      problems::ProblemSpec prob{dn, prm, problems::rhs_sample("constant", 2.0, dn), {"constant", 2.0, 0}};
      solver::SolveConfig cfg;
      cfg.outer_tol = 1e-11;
      cfg.inner_tol = 1e-4;
      const auto s = solver::solve(prob, cfg);
      errs.push_back(grid::lq_norm(s.v - exact, 2.0) / grid::lq_norm(exact, 2.0));
    }
    const bool exact = *std::max_element(errs.begin(), errs.end()) < 1e-10;
    const double order = order_fit(ns, errs);
    v.detail << " 1D p=" << p << " errors";
    for (double e : errs) v.detail << " " << e;
    if (exact) {
      v.detail << " (exact)";
    } else {
      v.detail << " order " << order;
      v.require(order >= 1.8, "1D order p=" + std::to_string(p));
    }
    v.detail << ";";
  }
}

void homogeneity(Verdict& v) {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 16);
  for (double p : {1.3, 1.6}) {
    const ConstitutiveParams prm(p, 0.0);
    solver::SolveConfig cfg;
    cfg.outer_tol = 1e-10;
    cfg.continuation.enabled = true;
    cfg.continuation.eta_floor = 1e-10;
    cfg.continuation.mu_floor = 1e-10;
    const auto s1 = solver::run(problems::make_problem(d, prm, {"smooth-trig", 1.0, 0}), cfg);
    const auto s4 = solver::run(problems::make_problem(d, prm, {"smooth-trig", 4.0, 0}), cfg);
    const double e = grid::norm(s4.v - std::pow(4.0, 1.0 / (p - 1.0)) * s1.v, 2.0, 1) / grid::norm(s4.v, 2.0, 1);
    v.require(e <= 1e-5, "p=" + std::to_string(p));
    v.detail << " p=" << p << " rel err " << e;
  }
}

void constants(Verdict& v) {
  const auto d = grid::build_domain(DomainKind::DirichletBox, 32);
  const auto table = audit::estimate_c5_table(d, {2, 3, 4, 6, 8, 12, 16}, 20, 1);
  const double c4 = audit::estimate_c4(d, 20, 1);
  v.require(c4 >= 0.9 && c4 <= 1.1, "c4 range");
  v.require(std::abs(table.c5[0] - c4) <= 0.02 * c4, "c5(2) = c4");
  for (double p : {1.25, 1.5, 1.75}) v.require(audit::r_of_q(2.0, p) == 6.0 / (p + 1.0), "r(2, p)");
  v.detail << " c4 " << c4 << ", c5(2) " << table.c5[0] << ", c5(16) " << table.c5.back()
           << ", monotone " << (table.monotone ? "yes" : "no") << ", K in [" << table.k1 << ", " << table.k2 << "]";
}

void estimate_audits(Verdict& v) {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 16);
  const auto table = audit::estimate_c5_table(d, {2, 4}, 20, 1);
  const double c4 = table.c5[0];
  const double c6 = audit::c6_hat(c4, table.c5);
  struct Case {
    const char* name;
    double p;
    std::vector<double> mus;
    double q;
    Structure structure;
  };
  const std::vector<Case> cases{
      {"p_gt_2_W22", 2.5, {1.0, 0.5, 0.25, 0.125}, 2.0, Structure::FullGradient},
      {"p_lt_2_W22", 1.5, {0.0, 0.1}, 2.0, Structure::FullGradient},
      {"p_lt_2_W2q", 1.8, {0.1}, 4.0, Structure::FullGradient},
      {"tangential_fe1", 2.5, {1.0, 0.5, 0.25, 0.125}, 2.0, Structure::SymmetricGradient},
  };
  for (const auto& c : cases) {
    audit::SweepSpec s;
    s.n = 16;
    s.p = c.p;
    s.mus = c.mus;
    s.q = c.q;
    s.structure = c.structure;
    s.c_hat = c.q == 2.0 ? c4 : c6;
    const auto r = audit::verify_estimate(c.name, s);
    v.require(r.verdict != "FAIL", std::string(c.name) + " verdict");
    v.require(r.spread < 10.0, std::string(c.name) + " spread");
    v.detail << " " << c.name << ": " << r.verdict << " spread " << r.spread;
    if (c.p > 2.0) {
      v.require(r.has_mu_fit && std::abs(r.mu_slope + (c.p - 2.0)) <= 0.3, std::string(c.name) + " mu slope");
      v.detail << " slope " << r.mu_slope;
    }
    v.detail << ";";
  }
}

void frozen_system(Verdict& v) {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 32);
  const double p = 1.5, mu = 0.5;
  const auto field = problems::smooth_test_field(DomainKind::CubicPeriodic);
  const auto u = problems::sample(field, d);
  const auto f = problems::manufactured_continuous(field, ConstitutiveParams(p, mu), 0.0, d);
  const double un = grid::norm(u, 2.0, 1);
  double prev = 1e300;
  for (int m : {8, 4, 2, 1}) {
    const auto r = solver::frozen_linear_solve(u, m * d.h(), p, mu, f);
    const double e = grid::norm(r.w - u, 2.0, 1) / un;
    v.require(r.report.max_c <= 1.0 + 5.0 * d.h(), "max|c| eps=" + std::to_string(m) + "h");
    v.require(e < prev, "monotone at eps=" + std::to_string(m) + "h");
    prev = e;
    v.detail << " eps=" << m << "h: max|c| " << r.report.max_c << " err " << e << ";";
  }
}

void eta_uniformity(Verdict& v) {
  const auto d = grid::build_domain(DomainKind::CubicPeriodic, 16);
  const auto prob = problems::make_problem(d, ConstitutiveParams(1.5, 0.1), {"smooth-trig", 1.0, 0});
  double norms[2];
  const double floors[2] = {1e-8, 5e-9};
  for (int k = 0; k < 2; ++k) {
    solver::SolveConfig cfg;
    cfg.outer_tol = 1e-10;
    cfg.continuation.enabled = true;
    cfg.continuation.eta_floor = floors[k];
    const auto s = solver::run(prob, cfg);
    norms[k] = grid::second_derivative_norm(grid::second_derivatives(s.v), 2.0);
  }
  const double diff = rel_diff(norms[0], norms[1]);
  v.require(diff < 0.02, "D2 difference");
  v.detail << " ||D2 v|| " << norms[0] << " vs " << norms[1] << ", rel diff " << diff;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pstruct acceptance suite"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"constitutive inequality suite", constitutive_suite},
      {"jacobian vs central differences", jacobian_check},
      {"triple product inequality", triple_product},
      {"normal-system identities", normal_systems},
      {"solver correctness", solver_correctness},
      {"homogeneity law", homogeneity},
      {"constant estimation", constants},
      {"estimate audits", estimate_audits},
      {"frozen-coefficient system", frozen_system},
      {"eta-uniformity", eta_uniformity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [error: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %s: %s (%.1f s)%s\n", i + 1, criteria[i].first, v.pass ? "PASS" : "FAIL", secs,
                v.detail.str().c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed ? 1 : 0;
}
