#pragma once

// Pointwise algebra of the p-structure law S(A) = (mu + |A|)^(p-2) A.

#include <array>
#include <cmath>
#include <cstddef>

#include "pstruct/error.hpp"

namespace pstruct::constitutive {

enum class Structure { FullGradient, SymmetricGradient };

/// Exponent, regularization and structure selector of the law.
/// Construction validates p > 1 and mu >= 0.
class ConstitutiveParams {
 public:
  ConstitutiveParams(double p, double mu, Structure structure = Structure::FullGradient);

  double p() const noexcept { return p_; }
  double mu() const noexcept { return mu_; }
  Structure structure() const noexcept { return structure_; }

  ConstitutiveParams with_mu(double mu) const { return {p_, mu, structure_}; }

 private:
  double p_;
  double mu_;
  Structure structure_;
};

/// 3x3 real tensor, row-major. (A)_{ij} = at(i, j).
struct Tensor3 {
  std::array<double, 9> v{};

  static Tensor3 zero() { return {}; }
  static Tensor3 identity();
  static Tensor3 outer(const std::array<double, 3>& a, const std::array<double, 3>& b);

  double& operator()(std::size_t i, std::size_t j) { return v[3 * i + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v[3 * i + j]; }

  Tensor3& operator+=(const Tensor3& o);
  Tensor3& operator-=(const Tensor3& o);
  Tensor3& operator*=(double s);

  Tensor3 transpose() const;
  /// Frobenius norm, the tensor norm used throughout.
  double norm() const;
  double norm_squared() const;
};

Tensor3 operator+(Tensor3 a, const Tensor3& b);
Tensor3 operator-(Tensor3 a, const Tensor3& b);
Tensor3 operator*(double s, Tensor3 a);
/// Full contraction A . B = A_ij B_ij.
double dot(const Tensor3& a, const Tensor3& b);

/// Fourth-order tensor T_{ijkl}, stored as (3i+j, 3k+l).
struct Tensor4 {
  std::array<double, 81> v{};

  double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return v[9 * (3 * i + j) + 3 * k + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return v[9 * (3 * i + j) + 3 * k + l];
  }

  /// B_ij T_ijkl C_kl
  double contract(const Tensor3& b, const Tensor3& c) const;
  /// (T : B)_ij = T_ijkl B_kl
  Tensor3 apply(const Tensor3& b) const;
};

/// Secant coefficient (mu + t)^(p-2) for t = |A| >= 0.
double secant_coefficient(double t, const ConstitutiveParams& params);

/// Potential Phi(t) = int_0^t (mu + s)^(p-2) s ds, so that Phi'(|A|) A/|A| = S(A).
double potential(double t, const ConstitutiveParams& params);

/// S(A) = (mu + |A|)^(p-2) A, with S(0) = 0.
Tensor3 stress(const Tensor3& a, const ConstitutiveParams& params);

/// dS_ij / dA_kl. Throws DegeneratePoint when mu = 0 and A = 0.
Tensor4 stress_jacobian(const Tensor3& a, const ConstitutiveParams& params);

struct InequalityRatios {
  double ellipticity;
  double monotonicity;
  double lipschitz;
};

/// Normalized forms of the ellipticity, monotonicity and Lipschitz inequalities.
/// The ellipticity ratio uses B as the direction; the other two need A != B.
InequalityRatios inequality_ratios(const Tensor3& a, const Tensor3& b,
                                   const ConstitutiveParams& params);

/// (G + G^T) / 2
Tensor3 sym_part(const Tensor3& g);

/// Third-order array H_{khj}, stored as 9k + 3h + j.
struct Tensor333 {
  std::array<double, 27> v{};
  double& operator()(std::size_t k, std::size_t h, std::size_t j) { return v[9 * k + 3 * h + j]; }
  double operator()(std::size_t k, std::size_t h, std::size_t j) const {
    return v[9 * k + 3 * h + j];
  }
  double norm() const;
};

struct TripleProduct {
  double lhs;
  double rhs;
};

/// lhs = |G_kh H_khj b_j| with b_j = G_ij L_i; rhs = |G|^2 |H| |L|.
TripleProduct triple_product_check(const Tensor3& g, const Tensor333& h,
                                   const std::array<double, 3>& l);

}  // namespace pstruct::constitutive
