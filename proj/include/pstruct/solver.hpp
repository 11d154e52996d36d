#pragma once

// Kacanov iteration for  -eta Lap v - div S(G v) = f, continuation in
// (eta, mu), and the frozen-coefficient linear system built from a given
// field through the Friedrichs mollifier.

#include <optional>
#include <span>
#include <vector>

#include "pstruct/constitutive.hpp"
#include "pstruct/grid.hpp"
#include "pstruct/problems.hpp"

namespace pstruct::solver {

using constitutive::ConstitutiveParams;
using constitutive::Structure;
using grid::DomainSpec;
using grid::ScalarField;
using grid::VectorField;
using problems::ProblemSpec;

struct ContinuationSchedule {
  bool enabled = false;
  double eta0 = 0.1;
  double mu0 = 0.1;
  double ratio = 0.5;
  int steps = 20;
  double eta_floor = 1e-10;
  double mu_floor = 1e-10;
  /// Consecutive increases of ||v_j - v_{j-1}|| that abort the path; 0 disables.
  int stall_window = 3;
};

struct SolveConfig {
  double eta = 0.0;
  double outer_tol = 1e-8;
  int max_outer = 200;
  double inner_tol = 1e-3;  // forcing term of the inner Krylov solve
  int inner_max = 500;
  ContinuationSchedule continuation;
};

struct NormSample {
  double grad_lp = 0.0;  // ||grad v||_p
  double w22 = 0.0;      // ||v||_{2,2}
};

struct ContinuationStep {
  double eta = 0.0;
  double mu = 0.0;
  double d2_norm = 0.0;    // ||D^2 v_j||_2 over interior nodes
  double step_diff = 0.0;  // ||v_j - v_{j-1}||_{1,2}
  int iterations = 0;
  double residual = 0.0;
};

struct SolveReport {
  int iterations = 0;
  int inner_iterations = 0;
  double residual = 0.0;  // relative strong-form residual
  bool converged = false;
  std::vector<double> energy_history;
  std::vector<double> residual_history;
  std::vector<NormSample> norm_history;
  std::vector<ContinuationStep> trace;
  std::size_t floor_active = 0;  // tetrahedra whose coefficient base was floored
  double eta = 0.0;
  double mu = 0.0;
};

/// Thrown when the outer iteration hits max_outer; carries the best iterate.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& msg, VectorField best, SolveReport report)
      : Error(ErrorCode::NoConvergence, msg), best_(std::move(best)), report_(std::move(report)) {}
  const VectorField& best() const noexcept { return best_; }
  const SolveReport& report() const noexcept { return report_; }

 private:
  VectorField best_;
  SolveReport report_;
};

struct Solution {
  VectorField v;
  SolveReport report;
};

/// Single Kacanov solve at (config.eta, problem.params.mu()). Throws
/// DegenerateConfig if both vanish, NoConvergence past max_outer.
Solution solve(const ProblemSpec& problem, const SolveConfig& config,
               const VectorField* initial = nullptr);

/// Warm-started solves along eta_j = max(eta0 r^j, eta*), mu_j = max(mu0 r^j, mu*)
/// for j < steps, then one solve at (eta*, mu*). eta* is config.eta when positive
/// and eta_floor otherwise; mu* likewise.
Solution continuation_solve(const ProblemSpec& problem, const SolveConfig& config);

/// Dispatches to continuation_solve when the schedule is enabled.
Solution run(const ProblemSpec& problem, const SolveConfig& config);

/// ||-eta Lap v - div S(G v) - f||_2 / ||f||_2 over non-Dirichlet nodes.
double relative_residual(const VectorField& v, const VectorField& f,
                         const ConstitutiveParams& params, double eta);

/// Strong-form residual field  (-eta Lap - div S(G .))(v) - f, zero on Dirichlet nodes.
VectorField residual_field(const VectorField& v, const VectorField& f,
                           const ConstitutiveParams& params, double eta);

/// Energy  eta/2 ||grad v||^2 + sum |T| Phi(|G v|) - h^3 sum f.v.
double energy(const VectorField& v, const ProblemSpec& problem, double eta);

struct LinearReport {
  int iterations = 0;
  double residual = 0.0;  // relative
};

/// Solves  -eta Lap w - div[a G w] = f  with a given per tetrahedron
/// (size kuhn::tet_count). Throws IllConditioned past max_iter.
VectorField linear_subsolve(std::span<const double> tet_coeff, double eta, const VectorField& f,
                            Structure mode, double tol = 1e-10, int max_iter = 1000,
                            LinearReport* report = nullptr);

/// Same with a nodal coefficient; each tetrahedron takes the mean of its
/// four vertex values.
VectorField linear_subsolve(const ScalarField& coefficient, double eta, const VectorField& f,
                            Structure mode, double tol = 1e-10, int max_iter = 1000,
                            LinearReport* report = nullptr);

/// Discrete operator v -> -eta Lap v - div[a G v] in strong scaling.
VectorField linear_operator(std::span<const double> tet_coeff, double eta, const VectorField& v,
                            Structure mode);

struct FrozenReport {
  double max_c = 0.0;       // max |c_{ijhk}|
  double bound = 0.0;       // 1 + 5h
  bool within_bound = false;
  int iterations = 0;
  double residual = 0.0;    // relative
};

struct FrozenSolution {
  VectorField w;
  FrozenReport report;
};

/// Operator  w -> -Lap w_i - (p-2) c_{ijhk} d_hk w_j  with the mollified
/// coefficients built from u_base.
VectorField frozen_operator_apply(const VectorField& u_base, double eps, double p, double mu,
                                  const VectorField& w);

/// Solves the frozen system with right side f (mu + |grad u_base|)^(2-p).
FrozenSolution frozen_linear_solve(const VectorField& u_base, double eps, double p, double mu,
                                   const VectorField& f_rhs, double tol = 1e-10);

/// Same with an explicit right side, no weighting.
FrozenSolution frozen_linear_solve_raw(const VectorField& u_base, double eps, double p, double mu,
                                       const VectorField& rhs, double tol = 1e-10);

}  // namespace pstruct::solver
