#include "pstruct/kuhn.hpp"

#include <algorithm>
#include <cmath>

namespace pstruct::kuhn {

std::size_t tet_count(const DomainSpec& d) noexcept {
  const auto n = static_cast<std::size_t>(d.n());
  return 6 * n * n * n;
}

Tensor3 tet_gradient(const VectorField& u, const Tet& t, double h) {
  Tensor3 g;
  const double inv = 1.0 / h;
  for (std::size_t m = 0; m < 3; ++m) {
    const auto ax = static_cast<std::size_t>(t.axis[m]);
    for (std::size_t i = 0; i < 3; ++i) {
      g(i, ax) = (u(i, t.vertex[m + 1]) - u(i, t.vertex[m])) * inv;
    }
  }
  return g;
}

std::vector<double> tet_gradient_norms(const VectorField& u, Structure mode) {
  const DomainSpec& d = u.domain();
  std::vector<double> out(tet_count(d));
  const double h = d.h();
  for_each_tet(d, [&](std::size_t id, const Tet& t) {
    const Tensor3 g = tet_gradient(u, t, h);
    out[id] = mode == Structure::SymmetricGradient ? constitutive::sym_part(g).norm() : g.norm();
  });
  return out;
}

std::vector<double> secant_coefficients(std::span<const double> norms,
                                        const ConstitutiveParams& params, CoefficientInfo* info) {
  std::vector<double> a(norms.size());
  const double p = params.p();
  const double mu = params.mu();
  CoefficientInfo ci;
  ci.min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < norms.size(); ++t) {
    double base = mu + norms[t];
    if (base < kBaseFloor) {
      base = kBaseFloor;
      ++ci.floored;
    }
    a[t] = p == 2.0 ? 1.0 : std::pow(base, p - 2.0);
    ci.max = std::max(ci.max, a[t]);
    ci.min = std::min(ci.min, a[t]);
  }
  if (norms.empty()) ci.min = 0.0;
  if (info) *info = ci;
  return a;
}

EdgeCoefficients edge_coefficients(const DomainSpec& d, std::span<const double> tet_coeff,
                                   double eta) {
  EdgeCoefficients ec;
  const std::size_t nodes = d.node_count();
  const double h = d.h();
  for (auto& k : ec.k) k.assign(nodes, 0.0);
  const double w = h / 6.0;
  for_each_tet(d, [&](std::size_t id, const Tet& t) {
    const double a = w * tet_coeff[id];
    for (std::size_t m = 0; m < 3; ++m) ec.k[static_cast<std::size_t>(t.axis[m])][t.vertex[m]] += a;
  });
  if (eta != 0.0) {
    const auto ex = d.extents();
    for (int axis = 0; axis < 3; ++axis) {
      auto& k = ec.k[static_cast<std::size_t>(axis)];
      for (int z = 0; z < ex[2]; ++z)
        for (int y = 0; y < ex[1]; ++y)
          for (int x = 0; x < ex[0]; ++x) {
            const int pos = axis == 0 ? x : axis == 1 ? y : z;
            if (!d.periodic(axis) && pos == d.n()) continue;
            k[d.index(x, y, z)] += eta * h;
          }
    }
  }
  return ec;
}

void apply_edges(const DomainSpec& d, const EdgeCoefficients& ec, std::span<const double> x,
                 std::span<double> y) {
  const auto ex = d.extents();
  const int n = d.n();
  std::array<std::size_t, 3> stride{d.stride(0), d.stride(1), d.stride(2)};
  for (int k = 0; k < ex[2]; ++k) {
    for (int j = 0; j < ex[1]; ++j) {
      for (int i = 0; i < ex[0]; ++i) {
        const std::size_t idx = d.index(i, j, k);
        if (d.is_dirichlet(i, j, k)) {
          y[idx] = 0.0;
          continue;
        }
        const std::array<int, 3> pos{i, j, k};
        double acc = 0.0;
        const double xi = x[idx];
        for (std::size_t a = 0; a < 3; ++a) {
          const std::size_t s = stride[a];
          std::size_t up, dn;
          if (d.periodic(static_cast<int>(a))) {
            up = pos[a] + 1 < n ? idx + s : idx + s - s * static_cast<std::size_t>(n);
            dn = pos[a] > 0 ? idx - s : idx - s + s * static_cast<std::size_t>(n);
          } else {
            up = idx + s;
            dn = idx - s;
          }
          acc += ec.k[a][idx] * (xi - x[up]) + ec.k[a][dn] * (xi - x[dn]);
        }
        y[idx] = acc;
      }
    }
  }
}

VectorField apply_operator(const DomainSpec& d, Structure mode, std::span<const double> tet_coeff,
                           double eta, const VectorField& v) {
  VectorField out(d);
  if (mode == Structure::FullGradient) {
    const auto ec = edge_coefficients(d, tet_coeff, eta);
    for (std::size_t c = 0; c < 3; ++c) apply_edges(d, ec, v.component(c), out.component(c));
    return out;
  }
  const double h = d.h();
  const double w = h * h * h / 6.0;
  for_each_tet(d, [&](std::size_t id, const Tet& t) {
    const Tensor3 s = (w * tet_coeff[id] / h) * constitutive::sym_part(tet_gradient(v, t, h));
    for (std::size_t m = 0; m < 3; ++m) {
      const auto ax = static_cast<std::size_t>(t.axis[m]);
      for (std::size_t i = 0; i < 3; ++i) {
        out(i, t.vertex[m + 1]) += s(i, ax);
        out(i, t.vertex[m]) -= s(i, ax);
      }
    }
  });
  if (eta != 0.0) {
    const std::vector<double> zero(tet_count(d), 0.0);
    const auto ec = edge_coefficients(d, zero, eta);
    std::vector<double> tmp(d.node_count());
    for (std::size_t c = 0; c < 3; ++c) {
      apply_edges(d, ec, v.component(c), tmp);
      auto dst = out.component(c);
      for (std::size_t n = 0; n < tmp.size(); ++n) dst[n] += tmp[n];
    }
  }
  out.apply_constraints();
  return out;
}

double energy(const VectorField& v, const VectorField& f, const ConstitutiveParams& params,
              double eta) {
  const DomainSpec& d = v.domain();
  const double h = d.h();
  const double vol = h * h * h / 6.0;
  std::vector<double> terms(tet_count(d));
  const bool sym = params.structure() == Structure::SymmetricGradient;
  for_each_tet(d, [&](std::size_t id, const Tet& t) {
    const Tensor3 g = tet_gradient(v, t, h);
    const double gn = sym ? constitutive::sym_part(g).norm() : g.norm();
    terms[id] = vol * (0.5 * eta * g.norm_squared() + constitutive::potential(gn, params));
  });
  const double stored = grid::pairwise_sum(terms);
  std::vector<double> load(d.node_count());
  for (std::size_t n = 0; n < load.size(); ++n) {
    load[n] = d.is_dirichlet(n) ? 0.0 : f(0, n) * v(0, n) + f(1, n) * v(1, n) + f(2, n) * v(2, n);
  }
  return stored - h * h * h * grid::pairwise_sum(load);
}

}  // namespace pstruct::kuhn
