#pragma once

// Piecewise-linear discretization on the Kuhn split of every grid cell into
// six tetrahedra. Each tetrahedron follows a monotone lattice path
// o -> o+e_a -> o+e_a+e_b -> o+e_a+e_b+e_c, so its gradient is a plain
// forward difference along the three path edges. With a unit coefficient the
// stiffness matrix coincides with h^3 times the 7-point Laplacian.

#include <array>
#include <span>
#include <vector>

#include "pstruct/constitutive.hpp"
#include "pstruct/grid.hpp"

namespace pstruct::kuhn {

using constitutive::ConstitutiveParams;
using constitutive::Structure;
using constitutive::Tensor3;
using grid::DomainSpec;
using grid::VectorField;

struct Tet {
  std::array<std::size_t, 4> vertex;  // node indices along the path
  std::array<int, 3> axis;            // axis of path edge m (vertex m -> m+1)
};

std::size_t tet_count(const DomainSpec& d) noexcept;

/// Calls fn(tet_id, Tet) for every tetrahedron, cell by cell.
template <typename Fn>
void for_each_tet(const DomainSpec& d, Fn&& fn);

/// Full gradient of u restricted to one tetrahedron.
Tensor3 tet_gradient(const VectorField& u, const Tet& t, double h);

/// |G_T u| for every tetrahedron (G is the full or symmetric gradient).
std::vector<double> tet_gradient_norms(const VectorField& u, Structure mode);

struct CoefficientInfo {
  std::size_t floored = 0;  // tetrahedra where mu + |Gu| hit the floor
  double max = 0.0;
  double min = 0.0;
};

constexpr double kBaseFloor = 1e-12;

/// Secant coefficients max(mu + |G_T u|, 1e-12)^(p-2) per tetrahedron.
std::vector<double> secant_coefficients(std::span<const double> norms,
                                        const ConstitutiveParams& params,
                                        CoefficientInfo* info = nullptr);

/// Per-node coefficients of the three edges leaving a node in the +x, +y, +z
/// directions: eta*h plus (h/6) times the sum of a_T over the tetrahedra
/// using that edge on their path.
struct EdgeCoefficients {
  std::array<std::vector<double>, 3> k;
};

EdgeCoefficients edge_coefficients(const DomainSpec& d, std::span<const double> tet_coeff,
                                   double eta);

/// y = A x for the scalar edge operator; Dirichlet rows are zero.
void apply_edges(const DomainSpec& d, const EdgeCoefficients& ec, std::span<const double> x,
                 std::span<double> y);

/// Stiffness operator of  eta/2 |grad v|^2 + a_T/2 |G v|^2  applied to v.
/// Result is in load scaling (strong form times h^3).
VectorField apply_operator(const DomainSpec& d, Structure mode, std::span<const double> tet_coeff,
                           double eta, const VectorField& v);

/// Discrete energy  sum_T |T| (eta/2 |grad v|^2 + Phi(|G v|)) - h^3 sum f.v
double energy(const VectorField& v, const VectorField& f, const ConstitutiveParams& params,
              double eta);

// ---------------------------------------------------------------------------

template <typename Fn>
void for_each_tet(const DomainSpec& d, Fn&& fn) {
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  const int n = d.n();
  std::array<std::size_t, 8> corner{};
  std::size_t tet = 0;
  for (int ck = 0; ck < n; ++ck) {
    for (int cj = 0; cj < n; ++cj) {
      for (int ci = 0; ci < n; ++ci) {
        for (int bits = 0; bits < 8; ++bits) {
          int x = ci + (bits & 1), y = cj + ((bits >> 1) & 1), z = ck + ((bits >> 2) & 1);
          if (d.periodic(0) && x == n) x = 0;
          if (d.periodic(1) && y == n) y = 0;
          corner[static_cast<std::size_t>(bits)] = d.index(x, y, z);
        }
        for (const auto& p : perms) {
          const int b1 = 1 << p[0];
          const int b2 = b1 | (1 << p[1]);
          Tet t{{corner[0], corner[static_cast<std::size_t>(b1)], corner[static_cast<std::size_t>(b2)],
                 corner[7]},
                p};
          fn(tet++, t);
        }
      }
    }
  }
}

}  // namespace pstruct::kuhn
