#include "pstruct/krylov.hpp"

#include <cmath>

#include "pstruct/grid.hpp"

namespace pstruct::krylov {

double dot(std::span<const double> a, std::span<const double> b) {
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i];
  return grid::pairwise_sum(prod);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Result pcg(const Operator& a, const Operator& m, std::span<const double> b, std::span<double> x,
           double abs_tol, int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), q(n);
  a(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  Result res;
  res.residual = norm2(r);
  if (res.residual <= abs_tol) {
    res.converged = true;
    return res;
  }
  m(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    a(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    res.iterations = it;
    res.residual = norm2(r);
    if (res.residual <= abs_tol) {
      res.converged = true;
      break;
    }
    m(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  // recompute the true residual so callers see what the iterate achieves
  a(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  res.residual = norm2(r);
  res.converged = res.residual <= 2.0 * abs_tol;
  return res;
}

Result bicgstab(const Operator& a, const Operator& m, std::span<const double> b,
                std::span<double> x, double abs_tol, int max_iter) {
  const std::size_t n = b.size();
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  a(x, v);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - v[i];
  r0 = r;
  std::fill(v.begin(), v.end(), 0.0);
  Result res;
  res.residual = norm2(r);
  if (res.residual <= abs_tol) {
    res.converged = true;
    return res;
  }
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 1; it <= max_iter; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) break;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    m(p, ph);
    a(ph, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) break;
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    res.iterations = it;
    if (norm2(s) <= abs_tol) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * ph[i];
      res.converged = true;
      break;
    }
    m(s, sh);
    a(sh, t);
    const double tt = dot(t, t);
    omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
    if (norm2(r) <= abs_tol) {
      res.converged = true;
      break;
    }
    if (omega == 0.0) break;
  }
  a(x, t);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - t[i];
  res.residual = norm2(r);
  res.converged = res.residual <= 2.0 * abs_tol;
  return res;
}

}  // namespace pstruct::krylov
