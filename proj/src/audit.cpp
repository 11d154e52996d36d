#include "pstruct/audit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "pstruct/kuhn.hpp"
#include "pstruct/problems.hpp"

namespace pstruct::audit {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(guard);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct LaplaceSample {
  grid::SecondDerivField d2;
  VectorField lap;
};

std::vector<LaplaceSample> laplace_samples(const DomainSpec& d, int samples, std::uint64_t seed) {
  std::vector<LaplaceSample> out;
  const std::vector<double> unit(kuhn::tet_count(d), 1.0);
  for (int s = 0; s < samples; ++s) {
    const VectorField g = problems::rhs_sample("band-limited-random", 1.0, d, seed + static_cast<std::uint64_t>(s));
    const VectorField v = solver::linear_subsolve(unit, 0.0, g, Structure::FullGradient, 1e-12);
    out.push_back({grid::second_derivatives(v), grid::laplacian(v)});
  }
  return out;
}

double max_ratio(const std::vector<LaplaceSample>& set, double q) {
  double best = 0.0;
  for (const auto& s : set) {
    const double den = grid::lq_norm(s.lap, q, grid::NodeSet::Interior);
    if (den > 0.0) best = std::max(best, grid::second_derivative_norm(s.d2, q) / den);
  }
  return best;
}

}  // namespace

double estimate_c4(const DomainSpec& domain, int samples, std::uint64_t seed) {
  return max_ratio(laplace_samples(domain, samples, seed), 2.0);
}

double estimate_c5(const DomainSpec& domain, double q, int samples, std::uint64_t seed) {
  if (!(q >= 2.0)) throw Error(ErrorCode::BadRange, "c5 needs q >= 2");
  return max_ratio(laplace_samples(domain, samples, seed), q);
}

C5Table estimate_c5_table(const DomainSpec& domain, const std::vector<double>& qs, int samples,
                          std::uint64_t seed) {
  const auto set = laplace_samples(domain, samples, seed);
  C5Table t;
  t.q = qs;
  double sqq = 0.0, sqc = 0.0;
  t.k1 = std::numeric_limits<double>::infinity();
  t.k2 = 0.0;
  for (double q : qs) {
    if (!(q >= 2.0)) throw Error(ErrorCode::BadRange, "c5 needs q >= 2");
    const double c = max_ratio(set, q);
    if (!t.c5.empty() && c < t.c5.back()) t.monotone = false;
    t.c5.push_back(c);
    if (q >= 4.0 && q <= 16.0) {
      t.k1 = std::min(t.k1, c / q);
      t.k2 = std::max(t.k2, c / q);
      sqq += q * q;
      sqc += q * c;
    }
  }
  if (sqq > 0.0) t.k_fit = sqc / sqq;
  else t.k1 = 0.0;
  return t;
}

double r_of_q(double q, double p) {
  if (!(q >= 2.0)) {
    std::ostringstream os;
    os << "r(q) needs q >= 2, got " << q;
    throw Error(ErrorCode::BadRange, os.str());
  }
  if (!(p > 1.0 && p <= 2.0)) {
    std::ostringstream os;
    os << "r(q) needs 1 < p <= 2, got " << p;
    throw Error(ErrorCode::BadRange, os.str());
  }
  if (q == 3.0) return 3.0;
  if (q > 3.0) return q;
  return 3.0 * q / (3.0 - (3.0 - q) * (2.0 - p));
}

double c6_hat(double c4, const std::vector<double>& c5) {
  double c = c4;
  for (double v : c5) c = std::max(c, v);
  return c;
}

std::vector<PInterval> admissible_p(const std::vector<double>& qs, double c4, double c6) {
  std::vector<PInterval> out;
  for (double q : qs) {
    PInterval iv;
    iv.q = q;
    iv.constant = q == 2.0 ? c4 : c6;
    iv.lower = iv.constant > 0.0 ? std::max(1.0, 2.0 - 1.0 / iv.constant) : 1.0;
    iv.flagged = iv.upper - iv.lower < 1e-3;
    out.push_back(iv);
  }
  return out;
}

namespace {

struct Functional {
  double lhs, rhs;
};

Functional evaluate_functional(const std::string& name, const VectorField& u, const VectorField& f,
                               double p, double q) {
  if (name == "p_gt_2_W22") {
    return {grid::second_derivative_norm(grid::second_derivatives(u), 2.0), grid::norm(f, 2.0)};
  }
  if (name == "tangential_fe1") {
    return {grid::second_derivative_norm(grid::second_derivatives(u), 2.0, true), grid::norm(f, 2.0)};
  }
  if (name == "p_lt_2_W22") {
    return {grid::norm(u, 2.0, 2),
            grid::norm(f, 2.0) + std::pow(grid::norm(f, 6.0 / (p + 1.0)), 1.0 / (p - 1.0))};
  }
  return {grid::norm(u, q, 2), grid::norm(f, q) + std::pow(grid::norm(f, r_of_q(q, p)), 1.0 / (p - 1.0))};
}

bool coverage(const std::string& name, const SweepSpec& s, std::string& why) {
  const double mu_min = *std::min_element(s.mus.begin(), s.mus.end());
  if (name == "p_gt_2_W22") {
    if (!(s.p > 2.0)) why = "needs p > 2";
    else if (!(mu_min > 0.0)) why = "needs mu > 0";
    else if (s.kind != grid::DomainKind::CubicPeriodic) why = "proved on the cubic domain only";
  } else if (name == "tangential_fe1") {
    if (!(s.p >= 2.0)) why = "needs p >= 2";
    else if (!(mu_min > 0.0)) why = "needs mu > 0";
    else if (s.structure != Structure::SymmetricGradient) why = "stated for the symmetric-gradient law";
    else if (s.kind != grid::DomainKind::CubicPeriodic) why = "proved on the cubic domain only";
  } else {
    if (!(s.p > 1.0 && s.p <= 2.0)) why = "needs 1 < p <= 2";
    else if (s.structure != Structure::FullGradient) why = "no theorem coverage for the symmetric gradient with p < 2";
    else if (!((2.0 - s.p) * s.c_hat < 1.0)) why = "(2 - p) c >= 1";
    else if (name == "p_lt_2_W2q" && !(s.q > 2.0)) why = "needs q > 2";
  }
  return why.empty();
}

}  // namespace

EstimateCheck verify_estimate(const std::string& name, const SweepSpec& spec) {
  if (name != "p_gt_2_W22" && name != "p_lt_2_W22" && name != "p_lt_2_W2q" && name != "tangential_fe1") {
    throw Error(ErrorCode::UnknownId, "unknown estimate '" + name + "'");
  }
  if (spec.mus.empty() || spec.amplitudes.empty() || spec.seeds.empty()) {
    throw Error(ErrorCode::BadParams, "estimate sweep needs mu values, amplitudes and seeds");
  }
  EstimateCheck check;
  check.name = name;
  check.spec = spec;
  std::string why;
  check.covered = coverage(name, spec, why);
  if (!check.covered) check.note = "no theorem coverage: " + why;

  const DomainSpec d = grid::build_domain(spec.kind, spec.n);
  std::vector<VectorField> shapes;
  for (auto seed : spec.seeds) shapes.push_back(problems::rhs_sample("band-limited-random", 1.0, d, seed));

  const std::size_t na = spec.amplitudes.size(), ns = spec.seeds.size();
  check.points.resize(spec.mus.size() * ns * na);
  parallel_for(check.points.size(), spec.threads, [&](std::size_t idx) {
    const std::size_t im = idx / (ns * na), is = (idx / na) % ns, ia = idx % na;
    SweepPoint& pt = check.points[idx];
    pt.mu = spec.mus[im];
    pt.seed = spec.seeds[is];
    pt.amplitude = spec.amplitudes[ia];
    const constitutive::ConstitutiveParams params(spec.p, pt.mu, spec.structure);
    problems::ProblemSpec prob{d, params, pt.amplitude * shapes[is],
                               {"band-limited-random", pt.amplitude, pt.seed}};
    solver::SolveConfig cfg = spec.solver;
    if (pt.mu == 0.0 && cfg.eta == 0.0) cfg.continuation.enabled = true;
    solver::Solution sol;
    try {
      sol = solver::run(prob, cfg);
    } catch (const Error& e) {
      std::ostringstream os;
      const std::string what = e.what();
      const std::string prefix = std::string(to_string(e.code())) + ": ";
      os << name << " point (domain=" << grid::to_string(spec.kind) << ", n=" << spec.n << ", p=" << spec.p
         << ", mu=" << pt.mu << ", amplitude=" << pt.amplitude << ", seed=" << pt.seed
         << "): " << (what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what);
      throw Error(e.code(), os.str());
    }
    const Functional fn = evaluate_functional(name, sol.v, prob.f, spec.p, spec.q);
    pt.lhs = fn.lhs;
    pt.rhs = fn.rhs;
    pt.ratio = fn.rhs > 0.0 ? fn.lhs / fn.rhs : 0.0;
    pt.residual = sol.report.residual;
    pt.iterations = sol.report.iterations;
  });

  // spread across the amplitude sweep for every (mu, shape)
  for (std::size_t g = 0; g < spec.mus.size() * ns; ++g) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t ia = 0; ia < na; ++ia) {
      const double r = check.points[g * na + ia].ratio;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    const double spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    check.spread = std::max(check.spread, spread);
  }
  bool ok = std::isfinite(check.spread) && check.spread < 10.0;

  const bool mu_fit = (name == "p_gt_2_W22" || name == "tangential_fe1") && spec.mus.size() >= 2 &&
                      *std::min_element(spec.mus.begin(), spec.mus.end()) > 0.0;
  if (mu_fit) {
    std::vector<double> lx, ly;
    for (std::size_t im = 0; im < spec.mus.size(); ++im) {
      double cmax = 0.0;
      for (std::size_t k = 0; k < ns * na; ++k) cmax = std::max(cmax, check.points[im * ns * na + k].ratio);
      lx.push_back(std::log(spec.mus[im]));
      ly.push_back(std::log(cmax));
    }
    const double m = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    check.has_mu_fit = true;
    check.mu_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    check.expected_slope = 2.0 - spec.p;
    ok = ok && std::abs(check.mu_slope - check.expected_slope) <= 0.3;
  }
  check.verdict = !check.covered ? "INFORMATIONAL" : ok ? "PASS" : "FAIL";
  return check;
}

TangentialEnergy tangential_energy_check(const VectorField& u, double p, double mu, int s) {
  const DomainSpec& d = u.domain();
  if (d.kind() != grid::DomainKind::CubicPeriodic) {
    throw Error(ErrorCode::BadParams, "tangential energies need the periodic cubic domain");
  }
  if (s != 1 && s != 2) throw Error(ErrorCode::BadRange, "tangential direction must be 1 or 2");
  const constitutive::ConstitutiveParams params(p, mu, Structure::SymmetricGradient);
  const TensorField du = grid::gradient(u, grid::GradientMode::Symmetric);
  TensorField su(d);
  std::vector<double> base(d.node_count());
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    constitutive::Tensor3 t;
    for (std::size_t c = 0; c < 9; ++c) t.v[c] = du(c, n);
    base[n] = mu + t.norm();
    const auto st = constitutive::stress(t, params);
    for (std::size_t c = 0; c < 9; ++c) su(c, n) = st.v[c];
  }
  const auto along = [&](const TensorField& t) {
    TensorField out(d);
    grid::ScalarField comp(d);
    for (std::size_t c = 0; c < 9; ++c) {
      std::copy(t.component(c).begin(), t.component(c).end(), comp.data().begin());
      const VectorField g = grid::gradient(comp);
      const auto src = g.component(static_cast<std::size_t>(s - 1));
      std::copy(src.begin(), src.end(), out.component(c).begin());
    }
    return out;
  };
  const TensorField ddu = along(du);
  const TensorField dsu = along(su);
  std::vector<double> iv, jv;
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    if (d.is_dirichlet(n)) continue;
    double sq = 0.0, cross = 0.0;
    for (std::size_t c = 0; c < 9; ++c) {
      sq += ddu(c, n) * ddu(c, n);
      cross += dsu(c, n) * ddu(c, n);
    }
    const double w = base[n] > 0.0 ? std::pow(base[n], p - 2.0) : 0.0;
    iv.push_back(w * sq);
    jv.push_back(cross);
  }
  const double h3 = d.h() * d.h() * d.h();
  TangentialEnergy out;
  out.i_s = h3 * grid::pairwise_sum(iv);
  out.j_s = h3 * grid::pairwise_sum(jv);
  out.ratio = out.i_s > 0.0 ? out.j_s / out.i_s : 1.0;
  return out;
}

double holder_seminorm(const TensorField& grad_u, double alpha, std::size_t pair_budget,
                       std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::BadRange, "alpha must lie in (0, 1)");
  const DomainSpec& d = grad_u.domain();
  const std::size_t nodes = d.node_count();
  const double h = d.h();
  std::mt19937_64 rng(seed);
  double best = 0.0;
  std::size_t used = 0;
  for (std::size_t attempt = 0; used < pair_budget && attempt < 20 * pair_budget; ++attempt) {
    const std::size_t a = rng() % nodes, b = rng() % nodes;
    const auto ca = d.coords(a), cb = d.coords(b);
    double dist2 = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
      double dx = std::abs(ca[static_cast<std::size_t>(ax)] - cb[static_cast<std::size_t>(ax)]) * h;
      if (d.periodic(ax)) dx = std::min(dx, 1.0 - dx);
      dist2 += dx * dx;
    }
    const double dist = std::sqrt(dist2);
    if (dist < 2.0 * h - 1e-12) continue;
    ++used;
    double diff = 0.0;
    for (std::size_t c = 0; c < 9; ++c) {
      const double v = grad_u(c, a) - grad_u(c, b);
      diff += v * v;
    }
    best = std::max(best, std::sqrt(diff) / std::pow(dist, alpha));
  }
  return best;
}

}  // namespace pstruct::audit
