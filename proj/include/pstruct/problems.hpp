#pragma once

// Right-hand-side catalog, manufactured solutions and the exact
// one-dimensional profile used to validate the solver.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "pstruct/constitutive.hpp"
#include "pstruct/grid.hpp"

namespace pstruct::problems {

using constitutive::ConstitutiveParams;
using constitutive::Tensor3;
using grid::DomainSpec;
using grid::VectorField;

struct RhsDescriptor {
  std::string id = "smooth-trig";
  double amplitude = 1.0;
  std::uint64_t seed = 0;
};

struct ProblemSpec {
  DomainSpec domain;
  ConstitutiveParams params;
  VectorField f;
  RhsDescriptor rhs;
};

/// Catalog ids: "constant", "smooth-trig", "band-limited-random". The seed of
/// the random family may also be given inline as "band-limited-random(7)".
/// Throws UnknownId.
VectorField rhs_sample(std::string_view id, double amplitude, const DomainSpec& domain,
                       std::uint64_t seed = 0);

/// Builds a problem from a catalog entry. Throws BadParams if amplitude <= 0.
ProblemSpec make_problem(const DomainSpec& domain, const ConstitutiveParams& params,
                         const RhsDescriptor& rhs);

/// f such that u_star is an exact solution of the discrete problem the solver
/// uses, i.e. f = (-eta Lap + N)(u_star) with N the solver's nonlinear operator.
VectorField manufactured_discrete(const VectorField& u_star, const ConstitutiveParams& params,
                                  double eta);

/// A smooth vector field known in closed form.
struct AnalyticField {
  std::function<std::array<double, 3>(const std::array<double, 3>&)> value;
  std::function<Tensor3(const std::array<double, 3>&)> gradient;
  std::function<std::array<double, 3>(const std::array<double, 3>&)> laplacian;
};

/// Separable sine field satisfying the boundary conditions of the domain kind.
AnalyticField smooth_test_field(grid::DomainKind kind, double amplitude = 1.0);

/// Nodal samples of an analytic field, with Dirichlet nodes zeroed.
VectorField sample(const AnalyticField& u, const DomainSpec& domain);

/// f = -eta Lap u - div S(G u) from the closed-form gradient; the divergence is
/// taken by fourth-order central differences of the flux with step 1e-3.
VectorField manufactured_continuous(const AnalyticField& u, const ConstitutiveParams& params,
                                    double eta, const DomainSpec& domain);

/// Exact solution of  -[(mu + |u'|)^(p-2) u']' = c on (0,1), u(0) = u(1) = 0.
struct Profile {
  double p, mu, c;
  /// u'(x) from the first integral (mu + |u'|)^(p-2) u' = c (1/2 - x).
  double slope(double x) const;
  double value(double x) const;
};

Profile oned_profile(double p, double mu, double c_amp);

/// Profile sampled at x3 = k h, k = 0..n.
std::vector<double> oned_profile_oracle(double p, double mu, double c_amp, int n);

/// The profile as a 3D field u = (u(x3), 0, 0); it solves the problem with f = c e1.
VectorField oned_profile_field(const Profile& profile, const DomainSpec& domain);

}  // namespace pstruct::problems
