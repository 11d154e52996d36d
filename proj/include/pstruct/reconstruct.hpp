#pragma once

// Pointwise reconstruction of the normal second derivatives d2_33 u from the
// tangential ones and the data, through the 3x3 system a_jl d2_33 u_l = G_j
// obtained from the strong form of the equation.

#include <array>

#include "pstruct/constitutive.hpp"
#include "pstruct/grid.hpp"

namespace pstruct::reconstruct {

using constitutive::ConstitutiveParams;
using constitutive::Tensor3;
using grid::ScalarField;
using grid::VectorField;

/// Second partials d2_{km} u_l at one point, stored as 6 l + pair(k, m) like
/// SecondDerivField. Entries with (k, m) = (3, 3) are ignored.
using StarDerivatives = std::array<double, 18>;

struct NormalSystem {
  std::array<double, 9> a{};  // row-major a_jl
  std::array<double, 3> g{};  // G_j
  double b = 0.0;             // mu + |Du|
  Tensor3 du;
  double p = 0.0;
  double mu = 0.0;
  bool full_gradient = false;

  double at(std::size_t j, std::size_t l) const { return a[3 * j + l]; }
};

/// Symmetric-gradient system. Rows 1, 2: a_jl = delta_jl + c D_j3 D_l3,
/// row 3: a_3l = 2 delta_3l + c D_33 D_l3, with c = 2(p-2)/(B |Du|) (0 when
/// Du = 0), and G_j = B^(2-p) (F_j - 2 f_j). Throws BadExponent if p <= 2.
NormalSystem assemble_normal_system(const Tensor3& du, const StarDerivatives& dstar,
                                    const std::array<double, 3>& f_point, double p, double mu);

/// Full-gradient analogue: a_jl = delta_jl + (p-2)/(B |grad u|) G_j3 G_l3.
NormalSystem assemble_normal_system_full(const Tensor3& grad, const StarDerivatives& dstar,
                                         const std::array<double, 3>& f_point, double p,
                                         double mu);

/// Solves a x = g by Cholesky elimination.
std::array<double, 3> solve_normal(const NormalSystem& system);

/// a_jl xi_j xi_l
double quadratic_form(const NormalSystem& system, const std::array<double, 3>& xi);

/// |xi|^2 + xi_3^2 + c [(Du xi)_3]^2, the closed form of the quadratic form
/// (symmetric system; the full-gradient system drops the xi_3^2 term and uses
/// (p-2)/(B|grad u|)).
double quadratic_form_closed(const NormalSystem& system, const std::array<double, 3>& xi);

struct BoundCheck {
  ScalarField ratio;          // |d2_33 u| / (mu^(2-p) |f| + |D2_* u| + 1e-14)
  double max = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  double gap_median = 0.0;    // pointwise |x - d2_33 u| / |d2_33 u| (nodes with d2_33 u != 0)
  double gap_l2 = 0.0;        // ||x - d2_33 u||_2 / ||d2_33 u||_2
  double residual = 0.0;
  std::size_t nodes = 0;
};

/// Evaluates the pointwise estimate on every interior node of a converged
/// solution and compares the reconstructed d2_33 u with finite differences.
/// Throws NotConverged when the relative residual exceeds residual_tol.
BoundCheck pointwise_bound_check(const VectorField& u, const VectorField& f,
                                 const ConstitutiveParams& params, double eta = 0.0,
                                 double residual_tol = 1e-6);

}  // namespace pstruct::reconstruct
