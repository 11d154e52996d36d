#include "pstruct/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "pstruct/solver.hpp"

namespace pstruct::reconstruct {

namespace {

using grid::SecondDerivField;

double d2(const StarDerivatives& s, int l, int k, int m) {
  return s[6 * static_cast<std::size_t>(l) + SecondDerivField::pair_index(k, m)];
}

void check_params(double p, double mu) {
  if (!(p > 2.0)) {
    std::ostringstream os;
    os << "normal-derivative system needs p > 2, got p = " << p;
    throw Error(ErrorCode::BadExponent, os.str());
  }
  if (!(mu > 0.0)) throw Error(ErrorCode::BadParams, "normal-derivative system needs mu > 0");
}

}  // namespace

NormalSystem assemble_normal_system(const Tensor3& du, const StarDerivatives& dstar,
                                    const std::array<double, 3>& f_point, double p, double mu) {
  check_params(p, mu);
  NormalSystem sys;
  sys.du = du;
  sys.p = p;
  sys.mu = mu;
  const double dn = du.norm();
  sys.b = mu + dn;
  const double c = dn > 0.0 ? 2.0 * (p - 2.0) / (sys.b * dn) : 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t l = 0; l < 3; ++l) {
      const double diag = j == l ? (j == 2 ? 2.0 : 1.0) : 0.0;
      sys.a[3 * j + l] = diag + c * (du(j, 2) * du(l, 2));
    }
  }
  const double scale = std::pow(sys.b, 2.0 - p);
  for (int j = 0; j < 3; ++j) {
    double lap_t = 0.0;
    for (int k = 0; k < 2; ++k) lap_t += d2(dstar, j, k, k);
    double grad_div = 0.0;
    const int kmax = j == 2 ? 2 : 3;
    for (int k = 0; k < kmax; ++k) grad_div += d2(dstar, k, j, k);
    double corr = 0.0;
    if (c != 0.0) {
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m)
          for (int k = 0; k < 3; ++k) {
            if (m == 2 && k == 2) continue;
            corr += d2(dstar, l, k, m) * du(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) *
                    du(static_cast<std::size_t>(l), static_cast<std::size_t>(m));
          }
    }
    sys.g[static_cast<std::size_t>(j)] =
        -lap_t - grad_div - c * corr - 2.0 * scale * f_point[static_cast<std::size_t>(j)];
  }
  return sys;
}

NormalSystem assemble_normal_system_full(const Tensor3& grad, const StarDerivatives& dstar,
                                         const std::array<double, 3>& f_point, double p,
                                         double mu) {
  check_params(p, mu);
  NormalSystem sys;
  sys.du = grad;
  sys.p = p;
  sys.mu = mu;
  sys.full_gradient = true;
  const double gn = grad.norm();
  sys.b = mu + gn;
  const double c = gn > 0.0 ? (p - 2.0) / (sys.b * gn) : 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t l = 0; l < 3; ++l)
      sys.a[3 * j + l] = (j == l ? 1.0 : 0.0) + c * (grad(j, 2) * grad(l, 2));
  const double scale = std::pow(sys.b, 2.0 - p);
  for (int j = 0; j < 3; ++j) {
    double lap_t = d2(dstar, j, 0, 0) + d2(dstar, j, 1, 1);
    double corr = 0.0;
    if (c != 0.0) {
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m)
          for (int k = 0; k < 3; ++k) {
            if (m == 2 && k == 2) continue;
            corr += d2(dstar, l, k, m) * grad(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) *
                    grad(static_cast<std::size_t>(l), static_cast<std::size_t>(m));
          }
    }
    sys.g[static_cast<std::size_t>(j)] = -lap_t - c * corr - scale * f_point[static_cast<std::size_t>(j)];
  }
  return sys;
}

std::array<double, 3> solve_normal(const NormalSystem& s) {
  // a = L L^T
  const double l00 = std::sqrt(s.at(0, 0));
  const double l10 = s.at(1, 0) / l00;
  const double l20 = s.at(2, 0) / l00;
  const double l11 = std::sqrt(s.at(1, 1) - l10 * l10);
  const double l21 = (s.at(2, 1) - l20 * l10) / l11;
  const double l22 = std::sqrt(s.at(2, 2) - l20 * l20 - l21 * l21);
  const double y0 = s.g[0] / l00;
  const double y1 = (s.g[1] - l10 * y0) / l11;
  const double y2 = (s.g[2] - l20 * y0 - l21 * y1) / l22;
  std::array<double, 3> x{};
  x[2] = y2 / l22;
  x[1] = (y1 - l21 * x[2]) / l11;
  x[0] = (y0 - l10 * x[1] - l20 * x[2]) / l00;
  return x;
}

double quadratic_form(const NormalSystem& s, const std::array<double, 3>& xi) {
  double q = 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t l = 0; l < 3; ++l) q += s.at(j, l) * xi[j] * xi[l];
  return q;
}

double quadratic_form_closed(const NormalSystem& s, const std::array<double, 3>& xi) {
  const double dn = s.du.norm();
  const double xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  const double proj = s.du(0, 2) * xi[0] + s.du(1, 2) * xi[1] + s.du(2, 2) * xi[2];
  if (s.full_gradient) {
    const double c = dn > 0.0 ? (s.p - 2.0) / (s.b * dn) : 0.0;
    return xi2 + c * proj * proj;
  }
  const double c = dn > 0.0 ? 2.0 * (s.p - 2.0) / (s.b * dn) : 0.0;
  return xi2 + xi[2] * xi[2] + c * proj * proj;
}

BoundCheck pointwise_bound_check(const VectorField& u, const VectorField& f,
                                 const ConstitutiveParams& params, double eta,
                                 double residual_tol) {
  const double p = params.p();
  const double mu = params.mu();
  check_params(p, mu);
  BoundCheck out;
  out.residual = solver::relative_residual(u, f, params, eta);
  if (!(out.residual <= residual_tol)) {
    std::ostringstream os;
    os << "solution residual " << out.residual << " exceeds " << residual_tol;
    throw Error(ErrorCode::NotConverged, os.str());
  }
  const grid::DomainSpec& d = u.domain();
  const bool full = params.structure() == constitutive::Structure::FullGradient;
  const grid::TensorField grad =
      grid::gradient(u, full ? grid::GradientMode::Full : grid::GradientMode::Symmetric);
  const SecondDerivField sd = grid::second_derivatives(u);
  const VectorField lap = grid::laplacian(u);
  out.ratio = ScalarField(d);
  const double scale = std::pow(mu, 2.0 - p);
  std::vector<double> ratios, gaps, diff2, ref2;
  for (std::size_t n = 0; n < d.node_count(); ++n) {
    if (d.is_dirichlet(n)) continue;
    Tensor3 g;
    for (std::size_t c = 0; c < 9; ++c) g.v[c] = grad(c, n);
    StarDerivatives ds{};
    for (std::size_t c = 0; c < 18; ++c) ds[c] = sd(c, n);
    std::array<double, 3> fe{};
    for (std::size_t c = 0; c < 3; ++c) fe[c] = f(c, n) + eta * lap(c, n);
    const NormalSystem sys = full ? assemble_normal_system_full(g, ds, fe, p, mu)
                                  : assemble_normal_system(g, ds, fe, p, mu);
    const auto x = solve_normal(sys);
    double n33 = 0.0, gap = 0.0, fn = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double v = sd.at(i, 2, 2, n);
      n33 += v * v;
      gap += (x[static_cast<std::size_t>(i)] - v) * (x[static_cast<std::size_t>(i)] - v);
      fn += f(static_cast<std::size_t>(i), n) * f(static_cast<std::size_t>(i), n);
    }
    const double r = std::sqrt(n33) / (scale * std::sqrt(fn) + std::sqrt(sd.star_squared(n)) + 1e-14);
    out.ratio(0, n) = r;
    ratios.push_back(r);
    diff2.push_back(gap);
    ref2.push_back(n33);
    if (n33 > 0.0) gaps.push_back(std::sqrt(gap / n33));
  }
  out.nodes = ratios.size();
  if (ratios.empty()) return out;
  const auto quantile = [](std::vector<double> v, double q) {
    const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
  };
  out.max = *std::max_element(ratios.begin(), ratios.end());
  out.median = quantile(ratios, 0.5);
  out.p95 = quantile(ratios, 0.95);
  if (!gaps.empty()) out.gap_median = quantile(gaps, 0.5);
  const double r2 = grid::pairwise_sum(ref2);
  out.gap_l2 = r2 > 0.0 ? std::sqrt(grid::pairwise_sum(diff2) / r2) : 0.0;
  return out;
}

}  // namespace pstruct::reconstruct
