#include "pstruct/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pstruct/krylov.hpp"
#include "pstruct/kuhn.hpp"
#include "pstruct/multigrid.hpp"

namespace pstruct::solver {

namespace {

double cube(double x) { return x * x * x; }

double interior_norm(const VectorField& f) {
  const DomainSpec& d = f.domain();
  std::vector<double> sq(d.node_count(), 0.0);
  for (std::size_t n = 0; n < sq.size(); ++n) {
    if (d.is_dirichlet(n)) continue;
    sq[n] = f(0, n) * f(0, n) + f(1, n) * f(1, n) + f(2, n) * f(2, n);
  }
  return std::sqrt(grid::pairwise_sum(sq));
}

VectorField load_vector(const VectorField& f) {
  VectorField b = f;
  b.apply_constraints();
  b *= cube(f.domain().h());
  return b;
}

// Linear system A_a w = b together with its multigrid preconditioner.
class LinearSystem {
 public:
  LinearSystem(const DomainSpec& d, Structure mode, std::vector<double> coeff, double eta)
      : d_(d), mode_(mode), coeff_(std::move(coeff)), eta_(eta),
        edges_(kuhn::edge_coefficients(d, coeff_, eta)), mg_(d, edges_) {}

  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t nodes = d_.node_count();
    if (mode_ == Structure::FullGradient) {
      for (std::size_t c = 0; c < 3; ++c)
        kuhn::apply_edges(d_, edges_, x.subspan(c * nodes, nodes), y.subspan(c * nodes, nodes));
      return;
    }
    VectorField v(d_);
    std::copy(x.begin(), x.end(), v.data().begin());
    const VectorField out = kuhn::apply_operator(d_, mode_, coeff_, eta_, v);
    std::copy(out.data().begin(), out.data().end(), y.begin());
  }

  void precondition(std::span<const double> r, std::span<double> z) const {
    const std::size_t nodes = d_.node_count();
    for (std::size_t c = 0; c < 3; ++c) mg_.apply(r.subspan(c * nodes, nodes), z.subspan(c * nodes, nodes));
  }

  krylov::Result solve(std::span<const double> b, std::span<double> x, double abs_tol,
                       int max_iter) const {
    return krylov::pcg([this](auto in, auto out) { apply(in, out); },
                       [this](auto in, auto out) { precondition(in, out); }, b, x, abs_tol, max_iter);
  }

 private:
  DomainSpec d_;
  Structure mode_;
  std::vector<double> coeff_;
  double eta_;
  kuhn::EdgeCoefficients edges_;
  mg::Multigrid mg_;
};

struct Evaluation {
  std::vector<double> coeff;
  std::size_t floored = 0;
  VectorField gradient;  // load-scaled residual A_a(v) v - h^3 f
  double residual_norm = 0.0;
};

Evaluation evaluate(const VectorField& v, const VectorField& load, const ConstitutiveParams& params,
                    double eta) {
  Evaluation e;
  kuhn::CoefficientInfo info;
  e.coeff = kuhn::secant_coefficients(kuhn::tet_gradient_norms(v, params.structure()), params, &info);
  e.floored = info.floored;
  e.gradient = kuhn::apply_operator(v.domain(), params.structure(), e.coeff, eta, v);
  e.gradient -= load;
  e.residual_norm = krylov::norm2(e.gradient.data());
  return e;
}

NormSample norm_sample(const VectorField& v, double p) {
  NormSample s;
  s.grad_lp = grid::lq_norm(grid::gradient(v), p);
  s.w22 = grid::norm(v, 2.0, 2);
  return s;
}

VectorField axpy(const VectorField& v, double t, const VectorField& d) {
  VectorField out = v;
  auto& o = out.data();
  const auto& dd = d.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += t * dd[i];
  return out;
}

void validate(const SolveConfig& config) {
  if (!(config.eta >= 0.0)) throw Error(ErrorCode::BadParams, "eta must be >= 0");
  if (!(config.outer_tol > 0.0)) throw Error(ErrorCode::BadParams, "outer_tol must be positive");
  if (config.max_outer < 1) throw Error(ErrorCode::BadParams, "max_outer must be >= 1");
  if (!(config.inner_tol >= 0.0 && config.inner_tol < 1.0)) {
    throw Error(ErrorCode::BadParams, "inner_tol must lie in [0, 1)");
  }
}

}  // namespace

VectorField residual_field(const VectorField& v, const VectorField& f,
                           const ConstitutiveParams& params, double eta) {
  const Evaluation e = evaluate(v, load_vector(f), params, eta);
  VectorField r = e.gradient;
  r *= 1.0 / cube(v.domain().h());
  return r;
}

double relative_residual(const VectorField& v, const VectorField& f,
                         const ConstitutiveParams& params, double eta) {
  const double fn = interior_norm(f);
  const double rn = interior_norm(residual_field(v, f, params, eta));
  return fn > 0.0 ? rn / fn : rn;
}

double energy(const VectorField& v, const ProblemSpec& problem, double eta) {
  return kuhn::energy(v, problem.f, problem.params, eta);
}

Solution solve(const ProblemSpec& problem, const SolveConfig& config, const VectorField* initial) {
  validate(config);
  const ConstitutiveParams& params = problem.params;
  const double eta = config.eta;
  if (eta == 0.0 && params.mu() == 0.0) {
    throw Error(ErrorCode::DegenerateConfig,
                "eta = mu = 0 cannot be solved directly; use a continuation path");
  }
  const DomainSpec& d = problem.domain;
  if (!(problem.f.domain() == d)) throw Error(ErrorCode::ShapeMismatch, "rhs lives on another grid");
  const double h3 = cube(d.h());
  const VectorField load = load_vector(problem.f);
  const double fnorm = interior_norm(problem.f);
  const double bnorm = krylov::norm2(load.data());

  Solution out{VectorField(d), {}};
  SolveReport& rep = out.report;
  rep.eta = eta;
  rep.mu = params.mu();
  if (fnorm == 0.0) {
    rep.iterations = 1;
    rep.converged = true;
    rep.energy_history.push_back(0.0);
    rep.residual_history.push_back(0.0);
    rep.norm_history.push_back({});
    return out;
  }

  VectorField v = initial ? *initial : VectorField(d);
  v.apply_constraints();
  Evaluation ev = evaluate(v, load, params, eta);
  double rel = ev.residual_norm / h3 / fnorm;
  rep.residual_history.push_back(rel);
  rep.energy_history.push_back(kuhn::energy(v, problem.f, params, eta));
  rep.norm_history.push_back(norm_sample(v, params.p()));
  rep.floor_active = ev.floored;

  VectorField best = v;
  double best_rel = rel;
  const bool linear = params.p() == 2.0;
  const double forcing = linear ? 0.0 : config.inner_tol;

  for (int k = 1; rel > config.outer_tol; ++k) {
    if (k > config.max_outer) {
      rep.residual = best_rel;
      std::ostringstream os;
      os << "Kacanov iteration stopped after " << config.max_outer
         << " steps at relative residual " << best_rel;
      throw NoConvergence(os.str(), best, rep);
    }
    const LinearSystem sys(d, params.structure(), ev.coeff, eta);
    VectorField w = v;
    const double tol = std::max(forcing * ev.residual_norm, 0.1 * config.outer_tol * bnorm);
    const auto kr = sys.solve(load.data(), w.data(), tol, config.inner_max);
    rep.inner_iterations += kr.iterations;

    VectorField dir = w;
    dir -= v;
    double t = 1.0;
    Evaluation next;
    if (linear) {
      next = evaluate(w, load, params, eta);
    } else {
      // minimize the convex energy along dir through its monotone derivative
      const auto slope = [&](double s, Evaluation& e) {
        e = evaluate(axpy(v, s, dir), load, params, eta);
        return krylov::dot(e.gradient.data(), dir.data());
      };
      const double g0 = krylov::dot(ev.gradient.data(), dir.data());
      Evaluation e1;
      const double g1 = slope(1.0, e1);
      double lo = 0.0, glo = g0, hi = 1.0, ghi = g1;
      Evaluation elo, ehi = e1;
      bool bracket = true;
      if (g0 >= 0.0) {
        bracket = false;
        next = std::move(e1);
      } else if (g1 <= 0.0) {
        lo = 1.0;
        glo = g1;
        elo = std::move(e1);
        bracket = false;
        for (double s : {2.0, 4.0}) {
          Evaluation es;
          const double gs = slope(s, es);
          if (gs > 0.0) {
            hi = s;
            ghi = gs;
            ehi = std::move(es);
            bracket = true;
            break;
          }
          lo = s;
          glo = gs;
          elo = std::move(es);
        }
        t = lo;
        if (!bracket) next = std::move(elo);
      }
      if (bracket) {
        int side = 0;
        double tbest = glo == g0 ? hi : lo;
        Evaluation ebest = glo == g0 ? ehi : elo;
        double gbest = glo == g0 ? ghi : glo;
        for (int it = 0; it < 6 && std::abs(gbest) > 0.02 * std::abs(g0); ++it) {
          const double s = (lo * ghi - hi * glo) / (ghi - glo);
          Evaluation es;
          const double gs = slope(s, es);
          if (std::abs(gs) < std::abs(gbest)) {
            tbest = s;
            gbest = gs;
            ebest = es;
          }
          if (gs < 0.0) {
            lo = s;
            glo = gs;
            if (side == -1) ghi *= 0.5;
            side = -1;
          } else {
            hi = s;
            ghi = gs;
            if (side == 1) glo *= 0.5;
            side = 1;
          }
        }
        t = tbest;
        next = std::move(ebest);
      }
    }
    v = axpy(v, t, dir);
    ev = std::move(next);
    rel = ev.residual_norm / h3 / fnorm;
    rep.iterations = k;
    rep.floor_active = ev.floored;
    rep.residual_history.push_back(rel);
    rep.energy_history.push_back(kuhn::energy(v, problem.f, params, eta));
    rep.norm_history.push_back(norm_sample(v, params.p()));
    if (rel < best_rel) {
      best_rel = rel;
      best = v;
    }
  }
  rep.residual = rel;
  rep.converged = true;
  out.v = std::move(v);
  return out;
}

Solution continuation_solve(const ProblemSpec& problem, const SolveConfig& config) {
  const ContinuationSchedule& cs = config.continuation;
  if (!(cs.ratio > 0.0 && cs.ratio < 1.0)) throw Error(ErrorCode::BadParams, "continuation ratio must lie in (0, 1)");
  if (!(cs.eta_floor > 0.0 && cs.mu_floor > 0.0)) {
    throw Error(ErrorCode::BadParams, "continuation floors must be positive");
  }
  if (cs.steps < 0) throw Error(ErrorCode::BadParams, "continuation steps must be >= 0");
  const double eta_t = config.eta > 0.0 ? config.eta : cs.eta_floor;
  const double mu_t = problem.params.mu() > 0.0 ? problem.params.mu() : cs.mu_floor;

  std::vector<std::pair<double, double>> path;
  for (int j = 0; j < cs.steps; ++j) {
    const double scale = std::pow(cs.ratio, j);
    const double e = cs.eta0 > eta_t ? std::max(cs.eta0 * scale, eta_t) : eta_t;
    const double m = cs.mu0 > mu_t ? std::max(cs.mu0 * scale, mu_t) : mu_t;
    if (path.empty() || path.back() != std::make_pair(e, m)) path.emplace_back(e, m);
  }
  if (path.empty() || path.back() != std::make_pair(eta_t, mu_t)) path.emplace_back(eta_t, mu_t);

  Solution current{VectorField(problem.domain), {}};
  std::vector<ContinuationStep> trace;
  int total = 0, total_inner = 0, increases = 0;
  double prev_diff = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < path.size(); ++j) {
    ProblemSpec step = problem;
    step.params = problem.params.with_mu(path[j].second);
    SolveConfig sc = config;
    sc.eta = path[j].first;
    Solution next = solve(step, sc, j == 0 ? nullptr : &current.v);
    ContinuationStep rec;
    rec.eta = path[j].first;
    rec.mu = path[j].second;
    rec.d2_norm = grid::second_derivative_norm(grid::second_derivatives(next.v), 2.0);
    rec.step_diff = j == 0 ? 0.0 : grid::norm(next.v - current.v, 2.0, 1);
    rec.iterations = next.report.iterations;
    rec.residual = next.report.residual;
    trace.push_back(rec);
    total += next.report.iterations;
    total_inner += next.report.inner_iterations;
    if (j >= 2) {
      increases = rec.step_diff > prev_diff ? increases + 1 : 0;
      if (cs.stall_window > 0 && increases >= cs.stall_window) {
        std::ostringstream os;
        os << "continuation stalled at eta = " << rec.eta << ", mu = " << rec.mu
           << ": step differences grew " << increases << " times in a row";
        throw Error(ErrorCode::PathStalled, os.str());
      }
    }
    if (j >= 1) prev_diff = rec.step_diff;
    current = std::move(next);
  }
  current.report.trace = std::move(trace);
  current.report.iterations = total;
  current.report.inner_iterations = total_inner;
  return current;
}

Solution run(const ProblemSpec& problem, const SolveConfig& config) {
  return config.continuation.enabled ? continuation_solve(problem, config) : solve(problem, config);
}

VectorField linear_operator(std::span<const double> tet_coeff, double eta, const VectorField& v,
                            Structure mode) {
  VectorField out = kuhn::apply_operator(v.domain(), mode, tet_coeff, eta, v);
  out *= 1.0 / cube(v.domain().h());
  return out;
}

VectorField linear_subsolve(std::span<const double> tet_coeff, double eta, const VectorField& f,
                            Structure mode, double tol, int max_iter, LinearReport* report) {
  const DomainSpec& d = f.domain();
  if (tet_coeff.size() != kuhn::tet_count(d)) {
    throw Error(ErrorCode::ShapeMismatch, "coefficient count does not match the grid");
  }
  const double amin = *std::min_element(tet_coeff.begin(), tet_coeff.end());
  if (!(amin >= 0.0) || !(amin + eta > 0.0)) {
    throw Error(ErrorCode::BadParams, "coefficient plus eta must be positive everywhere");
  }
  const VectorField load = load_vector(f);
  VectorField w(d);
  const double bn = krylov::norm2(load.data());
  if (bn == 0.0) {
    if (report) *report = {};
    return w;
  }
  const LinearSystem sys(d, mode, std::vector<double>(tet_coeff.begin(), tet_coeff.end()), eta);
  const auto res = sys.solve(load.data(), w.data(), tol * bn, max_iter);
  if (report) *report = {res.iterations, res.residual / bn};
  if (!res.converged) {
    std::ostringstream os;
    os << "linear solve stopped after " << res.iterations << " iterations at relative residual "
       << res.residual / bn;
    throw Error(ErrorCode::IllConditioned, os.str());
  }
  return w;
}

VectorField linear_subsolve(const ScalarField& coefficient, double eta, const VectorField& f,
                            Structure mode, double tol, int max_iter, LinearReport* report) {
  const DomainSpec& d = f.domain();
  std::vector<double> a(kuhn::tet_count(d));
  kuhn::for_each_tet(d, [&](std::size_t id, const kuhn::Tet& t) {
    double s = 0.0;
    for (std::size_t v : t.vertex) s += coefficient(0, v);
    a[id] = 0.25 * s;
  });
  return linear_subsolve(a, eta, f, mode, tol, max_iter, report);
}

// ---------------------------------------------------------------------------
// Frozen-coefficient system

namespace {

struct FrozenCoefficients {
  grid::TensorField b;  // b_{ih} = d_h J(u_i) / sqrt((mu + J|grad u|) J|grad u|)
  double max_c = 0.0;
};

FrozenCoefficients frozen_coefficients(const VectorField& u_base, double eps, double p, double mu) {
  if (!(p > 1.0 && p <= 2.0)) {
    std::ostringstream os;
    os << "frozen system needs 1 < p <= 2, got p = " << p;
    throw Error(ErrorCode::BadExponent, os.str());
  }
  if (!(mu > 0.0)) throw Error(ErrorCode::BadParams, "frozen system needs mu > 0");
  const DomainSpec& d = u_base.domain();
  const grid::TensorField grad_j = grid::gradient(grid::mollify(u_base, eps));
  const ScalarField j_mag = grid::mollify(grid::magnitude(grid::gradient(u_base)), eps);
  FrozenCoefficients fc{grid::TensorField(d), 0.0};
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    const double jm = j_mag(0, n);
    if (jm <= 0.0) continue;
    const double base = mu + jm;
    const double denom = std::sqrt(base * jm);
    if (!(denom > 0.0) || !std::isfinite(1.0 / denom)) {
      throw Error(ErrorCode::CoefficientBlowup, "mu + J|grad u| underflows; mu is too small");
    }
    double bmax = 0.0;
    for (std::size_t c = 0; c < 9; ++c) {
      const double v = grad_j(c, n) / denom;
      fc.b(c, n) = v;
      bmax = std::max(bmax, std::abs(v));
    }
    if (!d.is_dirichlet(n)) fc.max_c = std::max(fc.max_c, bmax * bmax);
  }
  return fc;
}

VectorField frozen_apply(const FrozenCoefficients& fc, double p, const VectorField& w) {
  const DomainSpec& d = w.domain();
  VectorField out = grid::laplacian(w);
  out *= -1.0;
  if (p != 2.0) {
    const grid::SecondDerivField d2 = grid::second_derivatives(w);
    for (std::size_t n = 0; n < d.node_count(); ++n) {
      if (d.is_dirichlet(n)) continue;
      std::array<double, 3> s{};
      for (int h = 0; h < 3; ++h) {
        double acc = 0.0;
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k)
            acc += fc.b(3 * static_cast<std::size_t>(j) + static_cast<std::size_t>(k), n) * d2.at(j, h, k, n);
        s[static_cast<std::size_t>(h)] = acc;
      }
      for (std::size_t i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (std::size_t h = 0; h < 3; ++h) acc += fc.b(3 * i + h, n) * s[h];
        out(i, n) -= (p - 2.0) * acc;
      }
    }
  }
  out.apply_constraints();
  return out;
}

FrozenSolution frozen_solve(const FrozenCoefficients& fc, const VectorField& rhs, double p,
                            double tol) {
  const DomainSpec& d = rhs.domain();
  VectorField b = rhs;
  b.apply_constraints();
  FrozenSolution sol{VectorField(d), {}};
  sol.report.max_c = fc.max_c;
  sol.report.bound = 1.0 + 5.0 * d.h();
  sol.report.within_bound = fc.max_c <= sol.report.bound;
  const double bn = krylov::norm2(b.data());
  if (bn == 0.0) return sol;

  const std::vector<double> unit(kuhn::tet_count(d), 1.0);
  const auto edges = kuhn::edge_coefficients(d, unit, 0.0);
  const mg::Multigrid mgl(d, edges);
  const double h3 = cube(d.h());
  const std::size_t nodes = d.node_count();
  const auto apply = [&](std::span<const double> x, std::span<double> y) {
    VectorField w(d);
    std::copy(x.begin(), x.end(), w.data().begin());
    const VectorField out = frozen_apply(fc, p, w);
    std::copy(out.data().begin(), out.data().end(), y.begin());
  };
  const auto precond = [&](std::span<const double> r, std::span<double> z) {
    for (std::size_t c = 0; c < 3; ++c) mgl.apply(r.subspan(c * nodes, nodes), z.subspan(c * nodes, nodes));
    for (double& v : z) v *= h3;
  };
  const auto res = krylov::bicgstab(apply, precond, b.data(), sol.w.data(), tol * bn, 500);
  sol.report.iterations = res.iterations;
  sol.report.residual = res.residual / bn;
  if (!res.converged) {
    std::ostringstream os;
    os << "frozen system solve stopped at relative residual " << sol.report.residual;
    throw Error(ErrorCode::IllConditioned, os.str());
  }
  return sol;
}

}  // namespace

VectorField frozen_operator_apply(const VectorField& u_base, double eps, double p, double mu,
                                  const VectorField& w) {
  return frozen_apply(frozen_coefficients(u_base, eps, p, mu), p, w);
}

FrozenSolution frozen_linear_solve(const VectorField& u_base, double eps, double p, double mu,
                                   const VectorField& f_rhs, double tol) {
  const FrozenCoefficients fc = frozen_coefficients(u_base, eps, p, mu);
  const ScalarField gmag = grid::magnitude(grid::gradient(u_base));
  VectorField rhs = f_rhs;
  for (std::size_t n = 0; n < rhs.nodes(); ++n) {
    const double wgt = std::pow(mu + gmag(0, n), 2.0 - p);
    for (std::size_t c = 0; c < 3; ++c) rhs(c, n) *= wgt;
  }
  return frozen_solve(fc, rhs, p, tol);
}

FrozenSolution frozen_linear_solve_raw(const VectorField& u_base, double eps, double p, double mu,
                                       const VectorField& rhs, double tol) {
  return frozen_solve(frozen_coefficients(u_base, eps, p, mu), rhs, p, tol);
}

}  // namespace pstruct::solver
