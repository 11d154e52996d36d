#include "pstruct/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace pstruct::grid {

std::string_view to_string(DomainKind kind) noexcept {
  return kind == DomainKind::CubicPeriodic ? "cubic_periodic" : "dirichlet_box";
}

DomainKind domain_kind_from_string(std::string_view name) {
  if (name == "cubic_periodic" || name == "CubicPeriodic") return DomainKind::CubicPeriodic;
  if (name == "dirichlet_box" || name == "DirichletBox") return DomainKind::DirichletBox;
  throw Error(ErrorCode::UnknownId, "unknown domain kind '" + std::string(name) + "'");
}

DomainSpec::DomainSpec(DomainKind kind, int n) : kind_(kind), n_(n) {
  if (n < 8) {
    std::ostringstream os;
    os << "grid needs at least 8 nodes per axis, got n = " << n;
    throw Error(ErrorCode::TooCoarse, os.str());
  }
}

std::array<int, 3> DomainSpec::coords(std::size_t idx) const noexcept {
  const auto ex = static_cast<std::size_t>(extent(0));
  const auto ey = static_cast<std::size_t>(extent(1));
  const int i = static_cast<int>(idx % ex);
  const int j = static_cast<int>((idx / ex) % ey);
  const int k = static_cast<int>(idx / (ex * ey));
  return {i, j, k};
}

double DomainSpec::quadrature_weight(int i, int j, int k) const noexcept {
  const double h3 = h() * h() * h();
  double w = h3;
  if (on_dirichlet_face(0, i)) w *= 0.5;
  if (on_dirichlet_face(1, j)) w *= 0.5;
  if (on_dirichlet_face(2, k)) w *= 0.5;
  return w;
}

DomainSpec build_domain(DomainKind kind, int n) { return DomainSpec(kind, n); }

// ---------------------------------------------------------------------------
// NodalField

template <std::size_t N>
void NodalField<N>::apply_constraints() {
  if (domain_.kind() == DomainKind::CubicPeriodic) {
    const std::size_t plane = domain_.stride(2);
    const std::size_t top = plane * static_cast<std::size_t>(domain_.n());
    for (std::size_t c = 0; c < N; ++c) {
      double* base = data_.data() + c * nodes();
      std::fill(base, base + plane, 0.0);
      std::fill(base + top, base + top + plane, 0.0);
    }
    return;
  }
  for (std::size_t idx = 0; idx < nodes(); ++idx) {
    if (!domain_.is_dirichlet(idx)) continue;
    for (std::size_t c = 0; c < N; ++c) (*this)(c, idx) = 0.0;
  }
}

template <std::size_t N>
NodalField<N>& NodalField<N>::operator+=(const NodalField& o) {
  if (!(o.domain_ == domain_)) throw Error(ErrorCode::ShapeMismatch, "field domains differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

template <std::size_t N>
NodalField<N>& NodalField<N>::operator-=(const NodalField& o) {
  if (!(o.domain_ == domain_)) throw Error(ErrorCode::ShapeMismatch, "field domains differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

template <std::size_t N>
NodalField<N>& NodalField<N>::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

template class NodalField<1>;
template class NodalField<3>;
template class NodalField<9>;
template class NodalField<18>;

// ---------------------------------------------------------------------------
// SecondDerivField

double SecondDerivField::star_squared(std::size_t node) const {
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t pair = 0; pair < 6; ++pair) {
      if (!in_star(pair)) continue;
      const double v = (*this)(6 * i + pair, node);
      s += (pair < 3 ? 1.0 : 2.0) * v * v;
    }
  }
  return s;
}

double SecondDerivField::normal_squared(std::size_t node) const {
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = (*this)(6 * i + 2, node);
    s += v * v;
  }
  return s;
}

double SecondDerivField::full_squared(std::size_t node) const {
  return star_squared(node) + normal_squared(node);
}

double SecondDerivField::trace(int i, std::size_t node) const {
  const std::size_t base = 6 * static_cast<std::size_t>(i);
  return (*this)(base, node) + (*this)(base + 1, node) + (*this)(base + 2, node);
}

// ---------------------------------------------------------------------------
// 1D stencils along an axis

namespace {

void first_difference(const DomainSpec& d, int axis, std::span<const double> in,
                      std::span<double> out) {
  const auto ex = d.extents();
  const std::size_t s = d.stride(axis);
  const int len = ex[static_cast<std::size_t>(axis)];
  const double inv2h = 0.5 / d.h();
  const bool per = d.periodic(axis);
  for (int k = 0; k < ex[2]; ++k) {
    for (int j = 0; j < ex[1]; ++j) {
      for (int i = 0; i < ex[0]; ++i) {
        const std::size_t idx = d.index(i, j, k);
        const int pos = axis == 0 ? i : axis == 1 ? j : k;
        double v;
        if (per) {
          const std::size_t up = pos + 1 < len ? idx + s : idx + s - s * len;
          const std::size_t dn = pos > 0 ? idx - s : idx - s + s * len;
          v = (in[up] - in[dn]) * inv2h;
        } else if (pos == 0) {
          v = (-3.0 * in[idx] + 4.0 * in[idx + s] - in[idx + 2 * s]) * inv2h;
        } else if (pos == len - 1) {
          v = (3.0 * in[idx] - 4.0 * in[idx - s] + in[idx - 2 * s]) * inv2h;
        } else {
          v = (in[idx + s] - in[idx - s]) * inv2h;
        }
        out[idx] = v;
      }
    }
  }
}

void second_difference(const DomainSpec& d, int axis, std::span<const double> in,
                       std::span<double> out) {
  const auto ex = d.extents();
  const std::size_t s = d.stride(axis);
  const int len = ex[static_cast<std::size_t>(axis)];
  const double invh2 = 1.0 / (d.h() * d.h());
  const bool per = d.periodic(axis);
  for (int k = 0; k < ex[2]; ++k) {
    for (int j = 0; j < ex[1]; ++j) {
      for (int i = 0; i < ex[0]; ++i) {
        const std::size_t idx = d.index(i, j, k);
        const int pos = axis == 0 ? i : axis == 1 ? j : k;
        double v;
        if (per) {
          const std::size_t up = pos + 1 < len ? idx + s : idx + s - s * len;
          const std::size_t dn = pos > 0 ? idx - s : idx - s + s * len;
          v = (in[up] - 2.0 * in[idx] + in[dn]) * invh2;
        } else if (pos == 0) {
          v = (2.0 * in[idx] - 5.0 * in[idx + s] + 4.0 * in[idx + 2 * s] - in[idx + 3 * s]) * invh2;
        } else if (pos == len - 1) {
          v = (2.0 * in[idx] - 5.0 * in[idx - s] + 4.0 * in[idx - 2 * s] - in[idx - 3 * s]) * invh2;
        } else {
          v = (in[idx + s] - 2.0 * in[idx] + in[idx - s]) * invh2;
        }
        out[idx] = v;
      }
    }
  }
}

}  // namespace

TensorField gradient(const VectorField& u, GradientMode mode) {
  const DomainSpec& d = u.domain();
  TensorField g(d);
  for (std::size_t i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) first_difference(d, j, u.component(i), g.component(3 * i + j));
  if (mode == GradientMode::Symmetric) {
    for (std::size_t node = 0; node < g.nodes(); ++node) {
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
          const double s = 0.5 * (g(3 * i + j, node) + g(3 * j + i, node));
          g(3 * i + j, node) = s;
          g(3 * j + i, node) = s;
        }
      }
    }
  }
  return g;
}

VectorField gradient(const ScalarField& u) {
  const DomainSpec& d = u.domain();
  VectorField g(d);
  for (int j = 0; j < 3; ++j) first_difference(d, j, u.component(0), g.component(j));
  return g;
}

VectorField divergence(const TensorField& t) {
  const DomainSpec& d = t.domain();
  VectorField out(d);
  std::vector<double> tmp(d.node_count());
  for (std::size_t i = 0; i < 3; ++i) {
    auto dst = out.component(i);
    for (int j = 0; j < 3; ++j) {
      first_difference(d, j, t.component(3 * i + j), tmp);
      for (std::size_t n = 0; n < tmp.size(); ++n) dst[n] += tmp[n];
    }
  }
  return out;
}

VectorField laplacian(const VectorField& u) {
  const DomainSpec& d = u.domain();
  VectorField out(d);
  std::array<std::vector<double>, 3> parts;
  for (auto& p : parts) p.resize(d.node_count());
  for (std::size_t i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) second_difference(d, j, u.component(i), parts[j]);
    auto dst = out.component(i);
    for (std::size_t n = 0; n < dst.size(); ++n) dst[n] = parts[0][n] + parts[1][n] + parts[2][n];
  }
  return out;
}

SecondDerivField second_derivatives(const VectorField& u) {
  const DomainSpec& d = u.domain();
  SecondDerivField out(d);
  std::vector<double> first(d.node_count());
  for (std::size_t i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      second_difference(d, j, u.component(i), out.component(6 * i + j));
    }
    for (int j = 0; j < 3; ++j) {
      first_difference(d, j, u.component(i), first);
      for (int k = j + 1; k < 3; ++k) {
        first_difference(d, k, first, out.component(6 * i + SecondDerivField::pair_index(j, k)));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Norms

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t block = 32;
  if (values.size() <= block) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

template <std::size_t N>
ScalarField magnitude(const NodalField<N>& f) {
  ScalarField out(f.domain());
  for (std::size_t node = 0; node < f.nodes(); ++node) {
    double s = 0.0;
    for (std::size_t c = 0; c < N; ++c) s += f(c, node) * f(c, node);
    out(0, node) = std::sqrt(s);
  }
  return out;
}

namespace {

// Sum of w |value|^q (or max for q = inf) over a node set, given per-node magnitudes.
struct Accumulator {
  double q;
  bool infinite;
  std::vector<double> terms;
  double max_value = 0.0;

  explicit Accumulator(double q_) : q(q_), infinite(std::isinf(q_)) {
    if (!(q_ >= 1.0)) throw Error(ErrorCode::BadRange, "norm exponent q must be >= 1");
  }
  void add(double weight, double mag) {
    if (infinite) {
      max_value = std::max(max_value, mag);
    } else {
      terms.push_back(weight * std::pow(mag, q));
    }
  }
  double total() const { return infinite ? max_value : pairwise_sum(terms); }
};

double finish(double total, double q) {
  return std::isinf(q) ? total : std::pow(total, 1.0 / q);
}

template <std::size_t N>
void accumulate(Accumulator& acc, const NodalField<N>& f, NodeSet set) {
  const DomainSpec& d = f.domain();
  const auto ex = d.extents();
  const double h3 = d.h() * d.h() * d.h();
  for (int k = 0; k < ex[2]; ++k) {
    for (int j = 0; j < ex[1]; ++j) {
      for (int i = 0; i < ex[0]; ++i) {
        const bool dir = d.is_dirichlet(i, j, k);
        if (set == NodeSet::Interior && dir) continue;
        const std::size_t idx = d.index(i, j, k);
        double s = 0.0;
        for (std::size_t c = 0; c < N; ++c) s += f(c, idx) * f(c, idx);
        const double w = set == NodeSet::Interior ? h3 : d.quadrature_weight(i, j, k);
        acc.add(w, std::sqrt(s));
      }
    }
  }
}

void accumulate_second(Accumulator& acc, const SecondDerivField& d2, bool star_only) {
  const DomainSpec& d = d2.domain();
  const double h3 = d.h() * d.h() * d.h();
  const auto ex = d.extents();
  for (int k = 0; k < ex[2]; ++k) {
    for (int j = 0; j < ex[1]; ++j) {
      for (int i = 0; i < ex[0]; ++i) {
        if (d.is_dirichlet(i, j, k)) continue;
        const std::size_t idx = d.index(i, j, k);
        const double s = star_only ? d2.star_squared(idx) : d2.full_squared(idx);
        acc.add(h3, std::sqrt(s));
      }
    }
  }
}

double combine(const std::vector<double>& parts, double q) {
  if (std::isinf(q)) return *std::max_element(parts.begin(), parts.end());
  double s = 0.0;
  for (double p : parts) s += p;
  return std::pow(s, 1.0 / q);
}

}  // namespace

template <std::size_t N>
double lq_norm(const NodalField<N>& f, double q, NodeSet set) {
  Accumulator acc(q);
  accumulate(acc, f, set);
  return finish(acc.total(), q);
}

double second_derivative_norm(const SecondDerivField& d2, double q, bool star_only) {
  Accumulator acc(q);
  accumulate_second(acc, d2, star_only);
  return finish(acc.total(), q);
}

double norm(const VectorField& u, double q, int sobolev_level) {
  if (sobolev_level < 0 || sobolev_level > 2) {
    throw Error(ErrorCode::BadRange, "Sobolev level must be 0, 1 or 2");
  }
  std::vector<double> parts;
  {
    Accumulator acc(q);
    accumulate(acc, u, NodeSet::All);
    parts.push_back(acc.total());
  }
  if (sobolev_level >= 1) {
    Accumulator acc(q);
    accumulate(acc, gradient(u), NodeSet::All);
    parts.push_back(acc.total());
  }
  if (sobolev_level == 2) {
    Accumulator acc(q);
    accumulate_second(acc, second_derivatives(u), false);
    parts.push_back(acc.total());
  }
  return combine(parts, q);
}

double norm(const ScalarField& u, double q, int sobolev_level) {
  VectorField v(u.domain());
  std::copy(u.data().begin(), u.data().end(), v.component(0).begin());
  return norm(v, q, sobolev_level);
}

template <std::size_t N>
double inner(const NodalField<N>& a, const NodalField<N>& b) {
  std::vector<double> prod(a.data().size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = a.data()[i] * b.data()[i];
  return pairwise_sum(prod);
}

// ---------------------------------------------------------------------------
// Mollifier

std::vector<double> mollifier_weights(int m) {
  if (m < 1) throw Error(ErrorCode::BadEps, "mollifier radius must be at least one cell");
  std::vector<double> w(static_cast<std::size_t>(m), 0.0);
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    const double r = static_cast<double>(k) / m;
    w[static_cast<std::size_t>(k)] = std::exp(-1.0 / (1.0 - r * r));
    total += (k == 0 ? 1.0 : 2.0) * w[static_cast<std::size_t>(k)];
  }
  for (double& x : w) x /= total;
  return w;
}

namespace {

void convolve_axis(const DomainSpec& d, int axis, const std::vector<double>& w,
                   std::span<const double> in, std::span<double> out) {
  const auto ex = d.extents();
  const std::size_t s = d.stride(axis);
  const int len = ex[static_cast<std::size_t>(axis)];
  const int m = static_cast<int>(w.size());
  const bool per = d.periodic(axis);
  for (int k = 0; k < ex[2]; ++k) {
    for (int j = 0; j < ex[1]; ++j) {
      for (int i = 0; i < ex[0]; ++i) {
        const std::size_t idx = d.index(i, j, k);
        const int pos = axis == 0 ? i : axis == 1 ? j : k;
        const std::size_t line0 = idx - s * static_cast<std::size_t>(pos);
        double acc = w[0] * in[idx];
        for (int off = 1; off < m; ++off) {
          for (int sign : {-1, 1}) {
            int q = pos + sign * off;
            if (per) {
              q = ((q % len) + len) % len;
            } else if (q < 0 || q >= len) {
              continue;  // zero extension across Dirichlet faces
            }
            acc += w[static_cast<std::size_t>(off)] * in[line0 + s * static_cast<std::size_t>(q)];
          }
        }
        out[idx] = acc;
      }
    }
  }
}

}  // namespace

template <std::size_t N>
NodalField<N> mollify(const NodalField<N>& f, double eps) {
  const DomainSpec& d = f.domain();
  if (eps > 0.25 + 1e-12) {
    std::ostringstream os;
    os << "mollifier radius " << eps << " exceeds 1/4";
    throw Error(ErrorCode::EpsTooLarge, os.str());
  }
  const double ratio = eps / d.h();
  const long m = std::lround(ratio);
  if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os << "mollifier radius " << eps << " is not a positive integer multiple of h = " << d.h();
    throw Error(ErrorCode::BadEps, os.str());
  }
  const auto w = mollifier_weights(static_cast<int>(m));
  NodalField<N> out(d);
  std::vector<double> a(d.node_count()), b(d.node_count());
  for (std::size_t c = 0; c < N; ++c) {
    auto src = f.component(c);
    std::copy(src.begin(), src.end(), a.begin());
    convolve_axis(d, 0, w, a, b);
    convolve_axis(d, 1, w, b, a);
    convolve_axis(d, 2, w, a, out.component(c));
  }
  return out;
}

template ScalarField magnitude(const NodalField<1>&);
template ScalarField magnitude(const NodalField<3>&);
template ScalarField magnitude(const NodalField<9>&);
template ScalarField magnitude(const NodalField<18>&);
template double lq_norm(const NodalField<1>&, double, NodeSet);
template double lq_norm(const NodalField<3>&, double, NodeSet);
template double lq_norm(const NodalField<9>&, double, NodeSet);
template double inner(const NodalField<1>&, const NodalField<1>&);
template double inner(const NodalField<3>&, const NodalField<3>&);
template double inner(const NodalField<9>&, const NodalField<9>&);
template NodalField<1> mollify(const NodalField<1>&, double);
template NodalField<3> mollify(const NodalField<3>&, double);
template NodalField<9> mollify(const NodalField<9>&, double);

}  // namespace pstruct::grid
