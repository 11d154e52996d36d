#include "pstruct/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pstruct/kuhn.hpp"

namespace pstruct::problems {

namespace {

constexpr double pi = std::numbers::pi;

// Uniform draw in [-1, 1) from the top 53 bits, identical on every platform.
double symmetric_uniform(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

struct Basis1D {
  int wavenumber;
  bool cosine;  // periodic axes only
};

std::vector<Basis1D> axis_basis(bool periodic) {
  std::vector<Basis1D> b;
  if (periodic) {
    b.push_back({0, true});
    for (int k = 1; k <= 3; ++k) {
      b.push_back({k, true});
      b.push_back({k, false});
    }
  } else {
    for (int m = 1; m <= 4; ++m) b.push_back({m, false});
  }
  return b;
}

double eval_basis(const Basis1D& b, bool periodic, double x) {
  if (periodic) {
    const double arg = 2.0 * pi * b.wavenumber * x;
    return b.cosine ? std::cos(arg) : std::sin(arg);
  }
  return std::sin(pi * b.wavenumber * x);
}

VectorField band_limited_random(const DomainSpec& d, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::array<std::vector<Basis1D>, 3> basis;
  for (int a = 0; a < 3; ++a) basis[static_cast<std::size_t>(a)] = axis_basis(d.periodic(a));
  // tabulate 1D basis values per axis
  std::array<std::vector<std::vector<double>>, 3> table;
  for (std::size_t a = 0; a < 3; ++a) {
    const int len = d.extent(static_cast<int>(a));
    for (const auto& b : basis[a]) {
      std::vector<double> col(static_cast<std::size_t>(len));
      for (int i = 0; i < len; ++i) col[static_cast<std::size_t>(i)] = eval_basis(b, d.periodic(static_cast<int>(a)), i * d.h());
      table[a].push_back(std::move(col));
    }
  }
  VectorField f(d);
  const auto ex = d.extents();
  for (std::size_t c = 0; c < 3; ++c) {
    auto dst = f.component(c);
    for (std::size_t b0 = 0; b0 < basis[0].size(); ++b0) {
      for (std::size_t b1 = 0; b1 < basis[1].size(); ++b1) {
        for (std::size_t b2 = 0; b2 < basis[2].size(); ++b2) {
          const double k2 = std::pow(basis[0][b0].wavenumber, 2) + std::pow(basis[1][b1].wavenumber, 2) +
                            std::pow(basis[2][b2].wavenumber, 2);
          const double coef = symmetric_uniform(rng) / (1.0 + k2);
          for (int k = 0; k < ex[2]; ++k) {
            const double zk = table[2][b2][static_cast<std::size_t>(k)];
            for (int j = 0; j < ex[1]; ++j) {
              const double yz = coef * zk * table[1][b1][static_cast<std::size_t>(j)];
              for (int i = 0; i < ex[0]; ++i) {
                dst[d.index(i, j, k)] += yz * table[0][b0][static_cast<std::size_t>(i)];
              }
            }
          }
        }
      }
    }
  }
  f.apply_constraints();
  const double nrm = grid::norm(f, 2.0);
  if (nrm > 0.0) f *= amplitude / nrm;
  return f;
}

}  // namespace

VectorField rhs_sample(std::string_view id, double amplitude, const DomainSpec& domain,
                       std::uint64_t seed) {
  VectorField f(domain);
  if (id == "constant") {
    for (std::size_t n = 0; n < f.nodes(); ++n) f(0, n) = amplitude;
    return f;
  }
  if (id == "smooth-trig") {
    const auto ex = domain.extents();
    const double h = domain.h();
    for (int k = 0; k < ex[2]; ++k)
      for (int j = 0; j < ex[1]; ++j)
        for (int i = 0; i < ex[0]; ++i) {
          const double v = amplitude * std::sin(2.0 * pi * i * h) * std::cos(2.0 * pi * j * h) *
                           std::sin(pi * k * h);
          const std::size_t idx = domain.index(i, j, k);
          for (std::size_t c = 0; c < 3; ++c) f(c, idx) = v;
        }
    return f;
  }
  constexpr std::string_view random_id = "band-limited-random";
  if (id.starts_with(random_id)) {
    std::string_view rest = id.substr(random_id.size());
    if (!rest.empty()) {
      if (rest.front() != '(' || rest.back() != ')') {
        throw Error(ErrorCode::UnknownId, "unknown rhs id '" + std::string(id) + "'");
      }
      rest = rest.substr(1, rest.size() - 2);
      auto res = std::from_chars(rest.data(), rest.data() + rest.size(), seed);
      if (res.ec != std::errc() || res.ptr != rest.data() + rest.size()) {
        throw Error(ErrorCode::UnknownId, "bad seed in rhs id '" + std::string(id) + "'");
      }
    }
    return band_limited_random(domain, amplitude, seed);
  }
  throw Error(ErrorCode::UnknownId, "unknown rhs id '" + std::string(id) + "'");
}

ProblemSpec make_problem(const DomainSpec& domain, const ConstitutiveParams& params,
                         const RhsDescriptor& rhs) {
  if (!(rhs.amplitude > 0.0)) {
    std::ostringstream os;
    os << "rhs amplitude must be positive, got " << rhs.amplitude;
    throw Error(ErrorCode::BadParams, os.str());
  }
  return {domain, params, rhs_sample(rhs.id, rhs.amplitude, domain, rhs.seed), rhs};
}

VectorField manufactured_discrete(const VectorField& u_star, const ConstitutiveParams& params,
                                  double eta) {
  const DomainSpec& d = u_star.domain();
  const auto norms = kuhn::tet_gradient_norms(u_star, params.structure());
  const auto a = kuhn::secant_coefficients(norms, params);
  VectorField f = kuhn::apply_operator(d, params.structure(), a, eta, u_star);
  const double h = d.h();
  f *= 1.0 / (h * h * h);
  return f;
}

AnalyticField smooth_test_field(grid::DomainKind kind, double amplitude) {
  struct Factor {
    double k, phase;
  };
  struct Term {
    double coef;
    std::array<Factor, 3> f;
  };
  const bool per = kind == grid::DomainKind::CubicPeriodic;
  const auto axis = [per](int m, double phase) {
    return per ? Factor{2.0 * pi * m, phase} : Factor{pi * m, 0.0};
  };
  const std::array<Term, 3> terms{{
      {amplitude, {axis(1, 0.3), axis(1, 1.1), Factor{pi, 0.0}}},
      {0.7 * amplitude, {axis(1, 1.7), axis(2, 0.5), Factor{pi, 0.0}}},
      {0.5 * amplitude, {axis(2, 0.9), axis(1, 2.3), Factor{2.0 * pi, 0.0}}},
  }};
  AnalyticField u;
  u.value = [terms](const std::array<double, 3>& x) {
    std::array<double, 3> v{};
    for (std::size_t i = 0; i < 3; ++i) {
      double prod = terms[i].coef;
      for (std::size_t a = 0; a < 3; ++a) prod *= std::sin(terms[i].f[a].k * x[a] + terms[i].f[a].phase);
      v[i] = prod;
    }
    return v;
  };
  u.gradient = [terms](const std::array<double, 3>& x) {
    Tensor3 g;
    for (std::size_t i = 0; i < 3; ++i) {
      std::array<double, 3> s{}, c{};
      for (std::size_t a = 0; a < 3; ++a) {
        const double arg = terms[i].f[a].k * x[a] + terms[i].f[a].phase;
        s[a] = std::sin(arg);
        c[a] = std::cos(arg);
      }
      g(i, 0) = terms[i].coef * terms[i].f[0].k * c[0] * s[1] * s[2];
      g(i, 1) = terms[i].coef * terms[i].f[1].k * s[0] * c[1] * s[2];
      g(i, 2) = terms[i].coef * terms[i].f[2].k * s[0] * s[1] * c[2];
    }
    return g;
  };
  u.laplacian = [terms, value = u.value](const std::array<double, 3>& x) {
    auto v = value(x);
    for (std::size_t i = 0; i < 3; ++i) {
      double k2 = 0.0;
      for (const auto& f : terms[i].f) k2 += f.k * f.k;
      v[i] *= -k2;
    }
    return v;
  };
  return u;
}

VectorField sample(const AnalyticField& u, const DomainSpec& domain) {
  VectorField out(domain);
  const auto ex = domain.extents();
  const double h = domain.h();
  for (int k = 0; k < ex[2]; ++k)
    for (int j = 0; j < ex[1]; ++j)
      for (int i = 0; i < ex[0]; ++i) {
        const auto v = u.value({i * h, j * h, k * h});
        const std::size_t idx = domain.index(i, j, k);
        for (std::size_t c = 0; c < 3; ++c) out(c, idx) = v[c];
      }
  out.apply_constraints();
  return out;
}

VectorField manufactured_continuous(const AnalyticField& u, const ConstitutiveParams& params,
                                    double eta, const DomainSpec& domain) {
  constexpr double step = 1e-3;
  const bool sym = params.structure() == constitutive::Structure::SymmetricGradient;
  const auto flux = [&](std::array<double, 3> x) {
    Tensor3 g = u.gradient(x);
    if (sym) g = constitutive::sym_part(g);
    return constitutive::stress(g, params);
  };
  VectorField f(domain);
  const auto ex = domain.extents();
  const double h = domain.h();
  for (int k = 0; k < ex[2]; ++k)
    for (int j = 0; j < ex[1]; ++j)
      for (int i = 0; i < ex[0]; ++i) {
        if (domain.is_dirichlet(i, j, k)) continue;
        const std::array<double, 3> x{i * h, j * h, k * h};
        std::array<double, 3> div{};
        for (std::size_t a = 0; a < 3; ++a) {
          auto shifted = [&](double s) {
            auto y = x;
            y[a] += s;
            return flux(y);
          };
          const Tensor3 d = (1.0 / (12.0 * step)) *
                            (shifted(-2.0 * step) - 8.0 * shifted(-step) + 8.0 * shifted(step) -
                             shifted(2.0 * step));
          for (std::size_t r = 0; r < 3; ++r) div[r] += d(r, a);
        }
        const auto lap = u.laplacian(x);
        const std::size_t idx = domain.index(i, j, k);
        for (std::size_t c = 0; c < 3; ++c) f(c, idx) = -eta * lap[c] - div[c];
      }
  return f;
}

// ---------------------------------------------------------------------------
// One-dimensional profile

namespace {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n)) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[static_cast<std::size_t>(i)] = z;
      w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre& gauss10() {
  static const GaussLegendre g(10);
  return g;
}

// Solves (mu + t)^(p-2) t = g for t >= 0.
double invert_flux(double g, double p, double mu) {
  if (g == 0.0) return 0.0;
  const auto psi = [&](double t) { return std::pow(mu + t, p - 2.0) * t - g; };
  double lo = 0.0, hi = std::max(g, 1e-300);
  while (psi(hi) < 0.0) hi *= 2.0;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double v = psi(t);
    if (v > 0.0) hi = t;
    else lo = t;
    const double dv = std::pow(mu + t, p - 3.0) * (mu + (p - 1.0) * t);
    double next = t - v / dv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::max(t, 1e-300)) {
      t = next;
      break;
    }
    t = next;
  }
  return t;
}

}  // namespace

double Profile::slope(double x) const {
  const double g = c * (0.5 - x);
  const double s = g < 0.0 ? -1.0 : 1.0;
  if (mu == 0.0) return s * std::pow(std::abs(g), 1.0 / (p - 1.0));
  return s * invert_flux(std::abs(g), p, mu);
}

double Profile::value(double x) const {
  if (x > 0.5) x = 1.0 - x;
  if (x <= 0.0) return 0.0;
  if (mu == 0.0) {
    const double q = 1.0 / (p - 1.0);
    const double s = c < 0.0 ? -1.0 : 1.0;
    return s * std::pow(std::abs(c), q) * (std::pow(0.5, q + 1.0) - std::pow(0.5 - x, q + 1.0)) /
           (q + 1.0);
  }
  const auto& gl = gauss10();
  constexpr int panels = 32;
  const double width = x / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = k * width;
    double part = 0.0;
    for (std::size_t i = 0; i < gl.x.size(); ++i) part += gl.w[i] * slope(a + 0.5 * width * (gl.x[i] + 1.0));
    total += 0.5 * width * part;
  }
  return total;
}

Profile oned_profile(double p, double mu, double c_amp) {
  ConstitutiveParams check(p, mu);
  (void)check;
  return {p, mu, c_amp};
}

std::vector<double> oned_profile_oracle(double p, double mu, double c_amp, int n) {
  const Profile prof = oned_profile(p, mu, c_amp);
  std::vector<double> u(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) u[static_cast<std::size_t>(k)] = prof.value(static_cast<double>(k) / n);
  return u;
}

VectorField oned_profile_field(const Profile& profile, const DomainSpec& domain) {
  VectorField u(domain);
  const auto ex = domain.extents();
  for (int k = 0; k < ex[2]; ++k) {
    const double v = profile.value(k * domain.h());
    for (int j = 0; j < ex[1]; ++j)
      for (int i = 0; i < ex[0]; ++i) u(0, domain.index(i, j, k)) = v;
  }
  u.apply_constraints();
  return u;
}

}  // namespace pstruct::problems
