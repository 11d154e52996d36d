#include "pstruct/runner.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <sstream>

#include "pstruct/audit.hpp"
#include "pstruct/reconstruct.hpp"

namespace pstruct::runner {

namespace {

using config::Command;
using config::ExperimentConfig;
using config::format_double;
using report::CsvTable;
using report::Json;

constexpr const char* kVersion = "1.0.0";

grid::DomainSpec domain_of(const ExperimentConfig& c) { return grid::build_domain(c.kind, c.n); }

constitutive::ConstitutiveParams params_of(const ExperimentConfig& c) { return {c.p, c.mu, c.structure}; }

Json inputs(const ExperimentConfig& c) {
  Json j;
  j["domain"] = std::string(grid::to_string(c.kind));
  j["n"] = c.n;
  j["p"] = c.p;
  j["mu"] = c.mu;
  j["structure"] = c.structure == constitutive::Structure::FullGradient ? "full" : "symmetric";
  j["rhs"] = {{"id", c.rhs.id}, {"amplitude", c.rhs.amplitude}, {"seed", c.rhs.seed}};
  j["eta"] = c.solver.eta;
  j["continuation"] = c.solver.continuation.enabled;
  return j;
}

struct SolveOutcome {
  solver::Solution sol;
  problems::ProblemSpec problem;
};

SolveOutcome solve_configured(const ExperimentConfig& c) {
  const auto problem = problems::make_problem(domain_of(c), params_of(c), c.rhs);
  try {
    return {solver::run(problem, c.solver), problem};
  } catch (const solver::NoConvergence& e) {
    return {{e.best(), e.report()}, problem};
  }
}

Json solve_json(const solver::Solution& s, const problems::ProblemSpec& prob) {
  const auto& r = s.report;
  Json j;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["inner_iterations"] = r.inner_iterations;
  j["residual"] = r.residual;
  j["eta"] = r.eta;
  j["mu"] = r.mu;
  j["floor_active"] = r.floor_active;
  if (!r.energy_history.empty()) j["energy"] = r.energy_history.back();
  j["norms"] = {{"l2", grid::norm(s.v, 2.0)},
                {"w12", grid::norm(s.v, 2.0, 1)},
                {"w22", grid::norm(s.v, 2.0, 2)},
                {"d2_l2", grid::second_derivative_norm(grid::second_derivatives(s.v), 2.0)},
                {"f_l2", grid::norm(prob.f, 2.0)}};
  return j;
}

CsvTable history_table(const solver::SolveReport& r) {
  CsvTable t;
  t.header = {"iteration", "energy", "residual", "grad_lp", "w22"};
  for (std::size_t i = 0; i < r.residual_history.size(); ++i) {
    t.rows.push_back({std::to_string(i), format_double(r.energy_history[i]), format_double(r.residual_history[i]),
                      format_double(r.norm_history[i].grad_lp), format_double(r.norm_history[i].w22)});
  }
  return t;
}

CsvTable trace_table(const solver::SolveReport& r) {
  CsvTable t;
  t.header = {"step", "eta", "mu", "d2_norm", "step_diff", "iterations", "residual"};
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const auto& s = r.trace[i];
    t.rows.push_back({std::to_string(i), format_double(s.eta), format_double(s.mu), format_double(s.d2_norm),
                      format_double(s.step_diff), std::to_string(s.iterations), format_double(s.residual)});
  }
  return t;
}

void run_solve(const ExperimentConfig& c, Outcome& out) {
  const auto so = solve_configured(c);
  const auto& r = so.sol.report;
  auto& res = out.results;
  res.report["solve"] = solve_json(so.sol, so.problem);
  res.report["verdict"] = r.converged ? "PASS" : "FAIL";
  if (!r.converged) ++out.failures;
  res.tables.emplace_back("history", history_table(r));
  if (!r.trace.empty()) res.tables.emplace_back("continuation", trace_table(r));
  res.vector_fields.emplace_back("solution", so.sol.v);
  res.vector_fields.emplace_back("rhs", so.problem.f);
  std::ostringstream os;
  os << "solve: " << (r.converged ? "converged" : "NOT converged") << " in " << r.iterations
     << " outer iterations, residual " << r.residual;
  out.summary = os.str();
}

struct Constants {
  double c4 = 0.0;
  audit::C5Table c5;
  double c6 = 0.0;
  std::vector<audit::PInterval> admissible;
};

Constants estimate_constants(const ExperimentConfig& c) {
  const auto d = domain_of(c);
  Constants k;
  k.c5 = audit::estimate_c5_table(d, c.constants.qs, c.constants.samples, c.constants.seed);
  // c4 shares the sample set with the q = 2 entry when present
  const auto it = std::find(k.c5.q.begin(), k.c5.q.end(), 2.0);
  k.c4 = it != k.c5.q.end() ? k.c5.c5[static_cast<std::size_t>(it - k.c5.q.begin())]
                            : audit::estimate_c4(d, c.constants.samples, c.constants.seed);
  k.c6 = audit::c6_hat(k.c4, k.c5.c5);
  k.admissible = audit::admissible_p(c.constants.qs, k.c4, k.c6);
  return k;
}

void add_constants(const ExperimentConfig& c, const Constants& k, Outcome& out) {
  auto& res = out.results;
  Json j;
  j["label"] = "empirical lower bounds (max over samples)";
  j["domain"] = std::string(grid::to_string(c.kind));
  j["n"] = c.n;
  j["samples"] = c.constants.samples;
  j["seed"] = c.constants.seed;
  j["c4_hat"] = k.c4;
  Json tab = Json::array();
  for (std::size_t i = 0; i < k.c5.q.size(); ++i) tab.push_back({{"q", k.c5.q[i]}, {"c5_hat", k.c5.c5[i]}});
  j["c5_hat"] = tab;
  j["c6_hat"] = k.c6;
  j["k1_hat"] = k.c5.k1;
  j["k2_hat"] = k.c5.k2;
  j["k_fit"] = k.c5.k_fit;
  j["c5_monotone_in_q"] = k.c5.monotone;
  Json adm = Json::array();
  for (const auto& iv : k.admissible) {
    adm.push_back({{"q", iv.q}, {"constant", iv.constant}, {"lower_open", iv.lower}, {"upper_closed", iv.upper},
                   {"flagged", iv.flagged}});
  }
  j["admissible_p"] = adm;
  res.report["constants"] = j;

  CsvTable t;
  t.header = {"q", "c5_hat", "c5_over_q"};
  for (std::size_t i = 0; i < k.c5.q.size(); ++i) {
    t.rows.push_back({format_double(k.c5.q[i]), format_double(k.c5.c5[i]), format_double(k.c5.c5[i] / k.c5.q[i])});
  }
  res.tables.emplace_back("constants", t);
  CsvTable a;
  a.header = {"q", "constant", "p_lower_open", "p_upper_closed", "flagged"};
  for (const auto& iv : k.admissible) {
    a.rows.push_back({format_double(iv.q), format_double(iv.constant), format_double(iv.lower),
                      format_double(iv.upper), iv.flagged ? "true" : "false"});
  }
  res.tables.emplace_back("admissible", a);
}

void run_constants(const ExperimentConfig& c, Outcome& out) {
  const auto k = estimate_constants(c);
  add_constants(c, k, out);
  std::ostringstream os;
  os << "constants: c4_hat = " << k.c4 << ", c6_hat = " << k.c6;
  out.summary = os.str();
}

audit::SweepSpec sweep_spec(const ExperimentConfig& c, double p, const std::vector<double>& mus,
                            const std::vector<double>& amplitudes, const std::vector<std::uint64_t>& seeds,
                            double q, double c_hat) {
  audit::SweepSpec s;
  s.kind = c.kind;
  s.n = c.n;
  s.p = p;
  s.structure = c.structure;
  s.mus = mus;
  s.amplitudes = amplitudes;
  s.seeds = seeds;
  s.q = q;
  s.c_hat = c_hat;
  s.solver = c.solver;
  s.threads = c.threads;
  return s;
}

void record_checks(const std::vector<audit::EstimateCheck>& checks, Outcome& out) {
  Json arr = Json::array();
  for (const auto& ch : checks) {
    arr.push_back(report::to_json(ch));
    if (ch.verdict == "FAIL") ++out.failures;
  }
  out.results.report["estimate_checks"] = arr;
  Json sum = Json::array();
  for (const auto& g : report::summarize(checks)) sum.push_back(report::to_json(g));
  out.results.report["summary"] = sum;
  out.results.tables.emplace_back("estimates", report::estimate_table(checks));
}

void run_audit(const ExperimentConfig& c, Outcome& out) {
  const auto k = estimate_constants(c);
  add_constants(c, k, out);
  std::vector<audit::EstimateCheck> checks;
  for (const auto& name : c.audit.estimates) {
    const double q = name == "p_lt_2_W2q" ? c.audit.q : 2.0;
    checks.push_back(audit::verify_estimate(
        name, sweep_spec(c, c.p, c.audit.mus, c.audit.amplitudes, c.audit.seeds, q, q == 2.0 ? k.c4 : k.c6)));
  }
  record_checks(checks, out);

  const auto so = solve_configured(c);
  const double alpha = 1.0 - 3.0 / c.audit.holder_q;
  const auto grad = grid::gradient(so.sol.v, grid::GradientMode::Full);
  Json h;
  h["q"] = c.audit.holder_q;
  h["alpha"] = alpha;
  if (alpha > 0.0 && alpha < 1.0) h["seminorm"] = audit::holder_seminorm(grad, alpha, c.audit.pair_budget, c.rhs.seed);
  else h["note"] = "needs holder_q > 3";
  h["pair_budget"] = c.audit.pair_budget;
  h["solve_converged"] = so.sol.report.converged;
  out.results.report["holder"] = h;

  std::ostringstream os;
  os << "audit:";
  for (const auto& ch : checks) os << " " << ch.name << "=" << ch.verdict;
  out.summary = os.str();
}

void run_reconstruct(const ExperimentConfig& c, Outcome& out) {
  const auto so = solve_configured(c);
  const auto bc = reconstruct::pointwise_bound_check(so.sol.v, so.problem.f, params_of(c), c.solver.eta,
                                                     c.residual_tol);
  Json j;
  j["solve"] = solve_json(so.sol, so.problem);
  j["ratio_definition"] = "|d33 u| / (mu^(2-p) |f| + |D2_* u|)";
  j["nodes"] = bc.nodes;
  j["max"] = bc.max;
  j["median"] = bc.median;
  j["p95"] = bc.p95;
  j["reconstruction_gap_median"] = bc.gap_median;
  j["reconstruction_gap_l2"] = bc.gap_l2;
  j["residual"] = bc.residual;
  out.results.report["reconstruct"] = j;
  CsvTable t;
  t.header = {"statistic", "value"};
  t.rows = {{"max", format_double(bc.max)},
            {"median", format_double(bc.median)},
            {"p95", format_double(bc.p95)},
            {"gap_median", format_double(bc.gap_median)},
            {"gap_l2", format_double(bc.gap_l2)}};
  out.results.tables.emplace_back("reconstruct", t);
  CsvTable pts;
  pts.header = {"i", "j", "k", "ratio"};
  const auto& d = so.sol.v.domain();
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    if (d.is_dirichlet(n)) continue;
    const auto x = d.coords(n);
    pts.rows.push_back({std::to_string(x[0]), std::to_string(x[1]), std::to_string(x[2]),
                        format_double(bc.ratio(0, n))});
  }
  out.results.tables.emplace_back("reconstruct_ratio", pts);
  out.results.vector_fields.emplace_back("solution", so.sol.v);
  out.results.scalar_fields.emplace_back("ratio", bc.ratio);
  std::ostringstream os;
  os << "reconstruct: max ratio " << bc.max << ", median " << bc.median << ", gap " << bc.gap_l2;
  out.summary = os.str();
}

void run_sweep(const ExperimentConfig& c, Outcome& out) {
  std::vector<audit::EstimateCheck> checks;
  for (double p : c.sweep.ps) {
    std::string name = c.sweep.estimate;
    if (name == "auto") name = p > 2.0 ? "p_gt_2_W22" : c.sweep.q > 2.0 ? "p_lt_2_W2q" : "p_lt_2_W22";
    checks.push_back(audit::verify_estimate(
        name, sweep_spec(c, p, c.sweep.mus, c.sweep.amplitudes, c.sweep.seeds, c.sweep.q, 1.0)));
  }
  record_checks(checks, out);
  std::ostringstream os;
  os << "sweep:";
  for (const auto& ch : checks) os << " p=" << ch.spec.p << " " << ch.name << "=" << ch.verdict;
  out.summary = os.str();
}

}  // namespace

Outcome execute(const ExperimentConfig& c) {
  Outcome out;
  out.results.report["command"] = config::to_string(c.command);
  out.results.report["inputs"] = inputs(c);
  switch (c.command) {
    case Command::Solve: run_solve(c, out); break;
    case Command::Constants: run_constants(c, out); break;
    case Command::Audit: run_audit(c, out); break;
    case Command::Reconstruct: run_reconstruct(c, out); break;
    case Command::Sweep: run_sweep(c, out); break;
  }
  out.results.report["failures"] = out.failures;
  return out;
}

Json manifest(const ExperimentConfig& c, double wall_seconds) {
  Json m;
  m["command"] = config::to_string(c.command);
  m["config"] = config::to_ini(c);
  m["versions"] = {{"pstruct", kVersion},
                   {"compiler", __VERSION__},
                   {"cxx_standard", __cplusplus},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION}};
  m["threads"] = c.threads;
  m["wall_time_seconds"] = wall_seconds;
  return m;
}

int run(const ExperimentConfig& c, bool strict, std::string* summary) {
  const auto t0 = std::chrono::steady_clock::now();
  const Outcome out = execute(c);
  report::emit_report(out.results, {c.output.json, c.output.csv, c.output.fields}, c.output.directory);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report::write_text(c.output.directory / "manifest.json", manifest(c, wall).dump(2) + "\n");
  if (summary) *summary = out.summary;
  return strict && out.failures > 0 ? 1 : 0;
}

}  // namespace pstruct::runner
