#include "pstruct/constitutive.hpp"

#include <algorithm>
#include <sstream>

namespace pstruct::constitutive {

ConstitutiveParams::ConstitutiveParams(double p, double mu, Structure structure)
    : p_(p), mu_(mu), structure_(structure) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    std::ostringstream os;
    os << "exponent p must satisfy p > 1, got " << p;
    throw Error(ErrorCode::BadParams, os.str());
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    std::ostringstream os;
    os << "regularization mu must satisfy mu >= 0, got " << mu;
    throw Error(ErrorCode::BadParams, os.str());
  }
}

Tensor3 Tensor3::identity() {
  Tensor3 t;
  t(0, 0) = t(1, 1) = t(2, 2) = 1.0;
  return t;
}

Tensor3 Tensor3::outer(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  Tensor3 t;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) t(i, j) = a[i] * b[j];
  return t;
}

Tensor3& Tensor3::operator+=(const Tensor3& o) {
  for (std::size_t i = 0; i < 9; ++i) v[i] += o.v[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& o) {
  for (std::size_t i = 0; i < 9; ++i) v[i] -= o.v[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& x : v) x *= s;
  return *this;
}

Tensor3 Tensor3::transpose() const {
  Tensor3 t;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) t(i, j) = (*this)(j, i);
  return t;
}

double Tensor3::norm_squared() const {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double Tensor3::norm() const { return std::sqrt(norm_squared()); }

Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

double dot(const Tensor3& a, const Tensor3& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < 9; ++i) s += a.v[i] * b.v[i];
  return s;
}

double Tensor4::contract(const Tensor3& b, const Tensor3& c) const {
  double s = 0.0;
  for (std::size_t r = 0; r < 9; ++r) {
    double row = 0.0;
    for (std::size_t q = 0; q < 9; ++q) row += v[9 * r + q] * c.v[q];
    s += b.v[r] * row;
  }
  return s;
}

Tensor3 Tensor4::apply(const Tensor3& b) const {
  Tensor3 out;
  for (std::size_t r = 0; r < 9; ++r) {
    double row = 0.0;
    for (std::size_t q = 0; q < 9; ++q) row += v[9 * r + q] * b.v[q];
    out.v[r] = row;
  }
  return out;
}

double secant_coefficient(double t, const ConstitutiveParams& params) {
  const double base = params.mu() + t;
  if (params.p() == 2.0) return 1.0;
  if (base == 0.0) {
    throw Error(ErrorCode::DegeneratePoint, "secant coefficient undefined at mu = |A| = 0");
  }
  return std::pow(base, params.p() - 2.0);
}

double potential(double t, const ConstitutiveParams& params) {
  const double p = params.p();
  const double mu = params.mu();
  if (t <= 0.0) return 0.0;
  if (mu == 0.0) return std::pow(t, p) / p;
  const double x = t / mu;
  const double scale = std::pow(mu, p);
  if (x < 1e-3) {
    // Taylor series of int_0^x (1+s)^(p-2) s ds
    const double a = p - 2.0;
    const double x2 = x * x;
    return scale * x2 *
           (0.5 + a * x / 3.0 + a * (a - 1.0) * x2 / 8.0 + a * (a - 1.0) * (a - 2.0) * x2 * x / 30.0);
  }
  // ((1+x)^q - 1) / q evaluated without cancellation
  const auto g = [x](double q) { return std::expm1(q * std::log1p(x)) / q; };
  return scale * (g(p) - g(p - 1.0));
}

Tensor3 stress(const Tensor3& a, const ConstitutiveParams& params) {
  const double t = a.norm();
  if (t == 0.0) return Tensor3::zero();
  return secant_coefficient(t, params) * a;
}

Tensor4 stress_jacobian(const Tensor3& a, const ConstitutiveParams& params) {
  const double t = a.norm();
  const double p = params.p();
  const double base = params.mu() + t;
  if (base == 0.0) {
    throw Error(ErrorCode::DegeneratePoint, "stress Jacobian unbounded at mu = 0, A = 0");
  }
  const double c0 = std::pow(base, p - 2.0);
  // The rank-one correction vanishes quadratically with A.
  const double c1 = (t > 0.0) ? (p - 2.0) * std::pow(base, p - 3.0) / t : 0.0;
  Tensor4 jac;
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t q = 0; q < 9; ++q) {
      jac.v[9 * r + q] = c1 * (a.v[r] * a.v[q]) + (r == q ? c0 : 0.0);
    }
  }
  return jac;
}

InequalityRatios inequality_ratios(const Tensor3& a, const Tensor3& b,
                                   const ConstitutiveParams& params) {
  const double p = params.p();
  const double mu = params.mu();
  const Tensor3 diff = a - b;
  const double dn = diff.norm();
  if (dn == 0.0) {
    throw Error(ErrorCode::DegeneratePoint, "monotonicity and Lipschitz ratios need A != B");
  }
  const double b2 = b.norm_squared();
  if (b2 == 0.0) {
    throw Error(ErrorCode::DegeneratePoint, "ellipticity ratio needs a nonzero direction B");
  }
  InequalityRatios r{};
  const Tensor4 jac = stress_jacobian(a, params);
  r.ellipticity = jac.contract(b, b) / (std::pow(mu + a.norm(), p - 2.0) * b2);

  const Tensor3 ds = stress(a, params) - stress(b, params);
  const double weight = std::pow(mu + a.norm() + b.norm(), 2.0 - p);
  r.monotonicity = dot(ds, diff) * weight / (dn * dn);
  r.lipschitz = ds.norm() * weight / dn;
  return r;
}

Tensor3 sym_part(const Tensor3& g) {
  Tensor3 s;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) s(i, j) = 0.5 * (g(i, j) + g(j, i));
  return s;
}

double Tensor333::norm() const {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TripleProduct triple_product_check(const Tensor3& g, const Tensor333& h,
                                   const std::array<double, 3>& l) {
  std::array<double, 3> b{};
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 3; ++i) b[j] += g(i, j) * l[i];
  double sum = 0.0;
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t hh = 0; hh < 3; ++hh)
      for (std::size_t j = 0; j < 3; ++j) sum += g(k, hh) * h(k, hh, j) * b[j];
  const double lnorm = std::sqrt(l[0] * l[0] + l[1] * l[1] + l[2] * l[2]);
  return {std::abs(sum), g.norm_squared() * h.norm() * lnorm};
}

}  // namespace pstruct::constitutive
