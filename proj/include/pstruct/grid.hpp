#pragma once

// Uniform structured grids on the unit cube, nodal fields, and the
// finite-difference operators used for analysis: centered gradient,
// divergence, 7-point Laplacian, second derivatives, discrete norms and
// a discrete Friedrichs mollifier.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pstruct/error.hpp"

namespace pstruct::grid {

/// CubicPeriodic: u = 0 on x3 in {0, 1}, period 1 in x1 and x2.
/// DirichletBox: u = 0 on all six faces.
enum class DomainKind : std::uint8_t { CubicPeriodic = 0, DirichletBox = 1 };

std::string_view to_string(DomainKind kind) noexcept;
DomainKind domain_kind_from_string(std::string_view name);

class DomainSpec {
 public:
  DomainSpec() = default;
  DomainSpec(DomainKind kind, int n);

  DomainKind kind() const noexcept { return kind_; }
  int n() const noexcept { return n_; }
  double h() const noexcept { return 1.0 / n_; }

  bool periodic(int axis) const noexcept { return kind_ == DomainKind::CubicPeriodic && axis < 2; }
  /// Number of stored nodes along an axis (boundary nodes included).
  int extent(int axis) const noexcept { return periodic(axis) ? n_ : n_ + 1; }
  std::array<int, 3> extents() const noexcept { return {extent(0), extent(1), extent(2)}; }
  std::size_t node_count() const noexcept {
    return static_cast<std::size_t>(extent(0)) * extent(1) * extent(2);
  }
  std::size_t stride(int axis) const noexcept {
    return axis == 0 ? 1 : axis == 1 ? static_cast<std::size_t>(extent(0))
                                     : static_cast<std::size_t>(extent(0)) * extent(1);
  }
  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) + stride(1) * j + stride(2) * k;
  }
  std::array<int, 3> coords(std::size_t idx) const noexcept;

  bool on_dirichlet_face(int axis, int i) const noexcept {
    return !periodic(axis) && (i == 0 || i == n_);
  }
  bool is_dirichlet(int i, int j, int k) const noexcept {
    return on_dirichlet_face(0, i) || on_dirichlet_face(1, j) || on_dirichlet_face(2, k);
  }
  bool is_dirichlet(std::size_t idx) const noexcept {
    const auto c = coords(idx);
    return is_dirichlet(c[0], c[1], c[2]);
  }
  /// Midpoint-rule weight of a node: h^3, halved per Dirichlet face it sits on.
  double quadrature_weight(int i, int j, int k) const noexcept;

  friend bool operator==(const DomainSpec& a, const DomainSpec& b) noexcept {
    return a.kind_ == b.kind_ && a.n_ == b.n_;
  }

 private:
  DomainKind kind_ = DomainKind::CubicPeriodic;
  int n_ = 8;
};

/// Throws TooCoarse when n < 8.
DomainSpec build_domain(DomainKind kind, int n);

/// Nodal field with N components per node, stored component-major.
template <std::size_t N>
class NodalField {
 public:
  static constexpr std::size_t components = N;

  NodalField() = default;
  explicit NodalField(const DomainSpec& domain)
      : domain_(domain), data_(N * domain.node_count(), 0.0) {}

  const DomainSpec& domain() const noexcept { return domain_; }
  std::size_t nodes() const noexcept { return domain_.node_count(); }

  double& operator()(std::size_t c, std::size_t node) { return data_[c * nodes() + node]; }
  double operator()(std::size_t c, std::size_t node) const { return data_[c * nodes() + node]; }

  std::span<double> component(std::size_t c) { return {data_.data() + c * nodes(), nodes()}; }
  std::span<const double> component(std::size_t c) const {
    return {data_.data() + c * nodes(), nodes()};
  }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  /// Sets every component to zero on Dirichlet nodes.
  void apply_constraints();

  NodalField& operator+=(const NodalField& o);
  NodalField& operator-=(const NodalField& o);
  NodalField& operator*=(double s);

 private:
  DomainSpec domain_;
  std::vector<double> data_;
};

using ScalarField = NodalField<1>;
using VectorField = NodalField<3>;
using TensorField = NodalField<9>;

template <std::size_t N>
NodalField<N> operator+(NodalField<N> a, const NodalField<N>& b) { return a += b; }
template <std::size_t N>
NodalField<N> operator-(NodalField<N> a, const NodalField<N>& b) { return a -= b; }
template <std::size_t N>
NodalField<N> operator*(double s, NodalField<N> a) { return a *= s; }

/// All 18 second partials d2_{jk} u_i (unordered pairs stored once).
/// Component index = 6 i + pair, pairs ordered 11, 22, 33, 12, 13, 23.
class SecondDerivField : public NodalField<18> {
 public:
  using NodalField<18>::NodalField;

  static constexpr std::size_t pair_index(int j, int k) noexcept {
    if (j > k) std::swap(j, k);
    if (j == k) return static_cast<std::size_t>(j);
    return j == 0 ? (k == 1 ? 3u : 4u) : 5u;
  }
  static constexpr bool in_star(std::size_t pair) noexcept { return pair != 2; }

  double at(int i, int j, int k, std::size_t node) const {
    return (*this)(6 * static_cast<std::size_t>(i) + pair_index(j, k), node);
  }
  /// |D^2 u|^2 with mixed partials counted for both orderings.
  double full_squared(std::size_t node) const;
  /// |D^2_* u|^2: every (j,k) except (3,3).
  double star_squared(std::size_t node) const;
  /// sum_i (d2_33 u_i)^2
  double normal_squared(std::size_t node) const;
  /// sum_j d2_jj u_i
  double trace(int i, std::size_t node) const;
};

enum class GradientMode { Full, Symmetric };

/// (grad u)_{ij} = d_j u_i with centered differences, periodic wrap and
/// second-order one-sided stencils on Dirichlet faces.
TensorField gradient(const VectorField& u, GradientMode mode = GradientMode::Full);
/// Gradient of a scalar field, stored as a 3-vector field.
VectorField gradient(const ScalarField& u);
/// Row-wise divergence (div T)_i = d_j T_{ij}.
VectorField divergence(const TensorField& t);
/// 7-point Laplacian (one-sided four-point second differences on Dirichlet faces).
VectorField laplacian(const VectorField& u);
SecondDerivField second_derivatives(const VectorField& u);

/// Pointwise Euclidean (Frobenius) magnitude.
template <std::size_t N>
ScalarField magnitude(const NodalField<N>& f);

enum class NodeSet { All, Interior };

/// Discrete L^q norm, q in [1, inf]; All uses the midpoint weights, Interior
/// uses only non-Dirichlet nodes with weight h^3.
template <std::size_t N>
double lq_norm(const NodalField<N>& f, double q, NodeSet set = NodeSet::All);

/// Discrete W^{level,q} norm. The second-derivative term only uses interior nodes.
double norm(const VectorField& u, double q, int sobolev_level = 0);
double norm(const ScalarField& u, double q, int sobolev_level = 0);
/// L^q norm of |D^2 u| (or |D^2_* u|) over interior nodes.
double second_derivative_norm(const SecondDerivField& d2, double q, bool star_only = false);

/// Discrete convolution with a normalized tensor-product bump of radius eps.
/// eps must be an integer multiple of h and at most 1/4.
template <std::size_t N>
NodalField<N> mollify(const NodalField<N>& f, double eps);

/// Normalized 1D bump weights for radius m*h (index 0 is the center).
std::vector<double> mollifier_weights(int m);

/// Deterministic pairwise (cascade) summation.
double pairwise_sum(std::span<const double> values);

/// Euclidean inner product of two fields over all stored values.
template <std::size_t N>
double inner(const NodalField<N>& a, const NodalField<N>& b);

}  // namespace pstruct::grid
