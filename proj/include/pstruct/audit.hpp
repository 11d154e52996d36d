#pragma once

// Empirical constants of the Laplacian estimates, admissible exponent ranges
// and scaling audits of the second-derivative estimates on solver output.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pstruct/constitutive.hpp"
#include "pstruct/grid.hpp"
#include "pstruct/solver.hpp"

namespace pstruct::audit {

using constitutive::Structure;
using grid::DomainSpec;
using grid::TensorField;
using grid::VectorField;

/// max over samples of ||D^2 v||_2 / ||Lap v||_2 (interior nodes), where
/// Lap v = g for band-limited random g with seeds seed, seed+1, ...
double estimate_c4(const DomainSpec& domain, int samples, std::uint64_t seed);

/// Same ratio in L^q.
double estimate_c5(const DomainSpec& domain, double q, int samples, std::uint64_t seed);

struct C5Table {
  std::vector<double> q;
  std::vector<double> c5;
  double k1 = 0.0;     // min c5/q over the fit window
  double k2 = 0.0;     // max c5/q over the fit window
  double k_fit = 0.0;  // least-squares K in c5 ~ K q over the fit window
  bool monotone = true;
};

/// Ratios for every q in qs on one shared sample set; fit window q in [4, 16].
C5Table estimate_c5_table(const DomainSpec& domain, const std::vector<double>& qs, int samples,
                          std::uint64_t seed);

/// r(q) = 3q / (3 - (3-q)(2-p)) for q < 3, q for q >= 3. Throws BadRange if
/// q < 2 or p outside (1, 2].
double r_of_q(double q, double p);

struct PInterval {
  double q = 2.0;
  double constant = 1.0;  // c4 for q = 2, c6 otherwise
  double lower = 1.0;     // open end
  double upper = 2.0;     // closed end
  bool flagged = false;   // width below 1e-3
};

/// {p in (1, 2] : (2-p) c < 1} with c = c4 for q = 2 and c = c6 for q > 2.
std::vector<PInterval> admissible_p(const std::vector<double>& qs, double c4, double c6);

/// max(c4, max c5)
double c6_hat(double c4, const std::vector<double>& c5);

struct SweepSpec {
  grid::DomainKind kind = grid::DomainKind::CubicPeriodic;
  int n = 16;
  double p = 2.5;
  Structure structure = Structure::FullGradient;
  std::vector<double> mus{1.0};
  std::vector<double> amplitudes{0.25, 1.0, 4.0, 16.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double q = 2.0;
  double c_hat = 1.0;  // c4 (q = 2) or c6 (q > 2) for the hypothesis check
  solver::SolveConfig solver;
  int threads = 1;
};

struct SweepPoint {
  double mu = 0.0;
  double amplitude = 0.0;
  std::uint64_t seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

struct EstimateCheck {
  std::string name;
  std::string verdict;  // PASS, FAIL or INFORMATIONAL
  bool covered = true;
  double spread = 0.0;  // max over (mu, seed) of max/min ratio across amplitudes
  bool has_mu_fit = false;
  double mu_slope = 0.0;
  double expected_slope = 0.0;
  std::vector<SweepPoint> points;
  std::string note;
  SweepSpec spec;
};

/// name in {p_gt_2_W22, p_lt_2_W22, p_lt_2_W2q, tangential_fe1}; throws UnknownId.
EstimateCheck verify_estimate(const std::string& name, const SweepSpec& spec);

struct TangentialEnergy {
  double i_s = 0.0;
  double j_s = 0.0;
  double ratio = 1.0;
};

/// I_s = sum (mu+|Du|)^(p-2) |d_s Du|^2 and J_s = sum d_s[S(Du)] . d_s Du over
/// interior nodes, s in {1, 2}. Needs a CubicPeriodic field.
TangentialEnergy tangential_energy_check(const VectorField& u, double p, double mu, int s);

/// max |grad u(x) - grad u(y)| / |x - y|^alpha over pair_budget random node
/// pairs with |x - y| >= 2h (periodic directions use the nearest image).
double holder_seminorm(const TensorField& grad_u, double alpha, std::size_t pair_budget,
                       std::uint64_t seed = 0);

struct AuditReport {
  DomainSpec domain;
  int samples = 0;
  std::uint64_t seed = 0;
  double c4_hat = 0.0;
  C5Table c5;
  double c6_hat = 0.0;
  std::vector<PInterval> admissible;
  std::vector<EstimateCheck> checks;
  double holder_q = 6.0;
  double holder_alpha = 0.5;
  double holder_seminorm = 0.0;
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace pstruct::audit
