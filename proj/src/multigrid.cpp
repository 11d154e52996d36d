#include "pstruct/multigrid.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>

namespace pstruct::mg {

namespace {

constexpr std::size_t kDenseLimit = 6000;

struct Level {
  LevelGrid g;
  std::array<std::vector<double>, 3> k;
  std::vector<double> diag;
  mutable std::vector<double> x, b, r;
};

std::size_t step(const LevelGrid& g, std::size_t idx, int axis, int pos, int dir) {
  const std::size_t s = axis == 0 ? 1
                        : axis == 1 ? static_cast<std::size_t>(g.extent(0))
                                    : static_cast<std::size_t>(g.extent(0)) * g.extent(1);
  const auto n = static_cast<std::size_t>(g.n);
  if (dir > 0) {
    if (g.periodic(axis) && pos + 1 == g.n) return idx + s - s * n;
    return idx + s;
  }
  if (g.periodic(axis) && pos == 0) return idx - s + s * n;
  return idx - s;
}

int wrap(const LevelGrid& g, int axis, int pos) {
  if (!g.periodic(axis)) return pos;
  return ((pos % g.n) + g.n) % g.n;
}

bool inside(const LevelGrid& g, int axis, int pos) {
  return g.periodic(axis) || (pos >= 0 && pos <= g.n);
}

void compute_diag(Level& l) {
  l.diag.assign(l.g.nodes(), 0.0);
  for (int z = 0; z < l.g.extent(2); ++z)
    for (int y = 0; y < l.g.extent(1); ++y)
      for (int x = 0; x < l.g.extent(0); ++x) {
        const std::size_t idx = l.g.index(x, y, z);
        if (l.g.dirichlet(x, y, z)) continue;
        const std::array<int, 3> pos{x, y, z};
        double dsum = 0.0;
        for (int a = 0; a < 3; ++a) {
          const std::size_t dn = step(l.g, idx, a, pos[static_cast<std::size_t>(a)], -1);
          dsum += l.k[static_cast<std::size_t>(a)][idx] + l.k[static_cast<std::size_t>(a)][dn];
        }
        l.diag[idx] = dsum;
      }
}

// One Gauss-Seidel sweep, forward or backward in lexicographic order.
void gauss_seidel(const Level& l, std::vector<double>& x, const std::vector<double>& b, bool forward) {
  const auto& g = l.g;
  const int ex = g.extent(0), ey = g.extent(1), ez = g.extent(2);
  const auto visit = [&](int i, int j, int k) {
    if (g.dirichlet(i, j, k)) return;
    const std::size_t idx = g.index(i, j, k);
    const double dg = l.diag[idx];
    if (dg <= 0.0) return;
    const std::array<int, 3> pos{i, j, k};
    double acc = b[idx];
    for (int a = 0; a < 3; ++a) {
      const auto au = static_cast<std::size_t>(a);
      const std::size_t up = step(g, idx, a, pos[au], 1);
      const std::size_t dn = step(g, idx, a, pos[au], -1);
      acc += l.k[au][idx] * x[up] + l.k[au][dn] * x[dn];
    }
    x[idx] = acc / dg;
  };
  if (forward) {
    for (int k = 0; k < ez; ++k)
      for (int j = 0; j < ey; ++j)
        for (int i = 0; i < ex; ++i) visit(i, j, k);
  } else {
    for (int k = ez - 1; k >= 0; --k)
      for (int j = ey - 1; j >= 0; --j)
        for (int i = ex - 1; i >= 0; --i) visit(i, j, k);
  }
}

void residual(const Level& l, const std::vector<double>& x, const std::vector<double>& b,
              std::vector<double>& r) {
  const auto& g = l.g;
  for (int k = 0; k < g.extent(2); ++k)
    for (int j = 0; j < g.extent(1); ++j)
      for (int i = 0; i < g.extent(0); ++i) {
        const std::size_t idx = g.index(i, j, k);
        if (g.dirichlet(i, j, k)) {
          r[idx] = 0.0;
          continue;
        }
        const std::array<int, 3> pos{i, j, k};
        double ax = l.diag[idx] * x[idx];
        for (int a = 0; a < 3; ++a) {
          const auto au = static_cast<std::size_t>(a);
          ax -= l.k[au][idx] * x[step(g, idx, a, pos[au], 1)] +
                l.k[au][step(g, idx, a, pos[au], -1)] * x[step(g, idx, a, pos[au], -1)];
        }
        r[idx] = b[idx] - ax;
      }
}

Level coarsen(const Level& f) {
  Level c;
  c.g = {f.g.periodic_xy, f.g.n / 2};
  const std::size_t nodes = c.g.nodes();
  for (auto& k : c.k) k.assign(nodes, 0.0);
  static constexpr std::array<double, 3> w1{0.25, 0.5, 0.25};
  for (int z = 0; z < c.g.extent(2); ++z)
    for (int y = 0; y < c.g.extent(1); ++y)
      for (int x = 0; x < c.g.extent(0); ++x) {
        const std::array<int, 3> cpos{x, y, z};
        const std::size_t cidx = c.g.index(x, y, z);
        for (int a = 0; a < 3; ++a) {
          if (!c.g.periodic(a) && cpos[static_cast<std::size_t>(a)] == c.g.n) continue;
          const int t1 = (a + 1) % 3, t2 = (a + 2) % 3;
          double acc = 0.0, wsum = 0.0;
          for (int o1 = -1; o1 <= 1; ++o1) {
            for (int o2 = -1; o2 <= 1; ++o2) {
              std::array<int, 3> fpos{2 * x, 2 * y, 2 * z};
              fpos[static_cast<std::size_t>(t1)] += o1;
              fpos[static_cast<std::size_t>(t2)] += o2;
              if (!inside(f.g, t1, fpos[static_cast<std::size_t>(t1)]) ||
                  !inside(f.g, t2, fpos[static_cast<std::size_t>(t2)]))
                continue;
              for (int b = 0; b < 3; ++b)
                fpos[static_cast<std::size_t>(b)] = wrap(f.g, b, fpos[static_cast<std::size_t>(b)]);
              const std::size_t i1 = f.g.index(fpos[0], fpos[1], fpos[2]);
              const std::size_t i2 = step(f.g, i1, a, fpos[static_cast<std::size_t>(a)], 1);
              const double k1 = f.k[static_cast<std::size_t>(a)][i1];
              const double k2 = f.k[static_cast<std::size_t>(a)][i2];
              const double series = (k1 + k2 > 0.0) ? k1 * k2 / (k1 + k2) : 0.0;
              const double w = w1[static_cast<std::size_t>(o1 + 1)] * w1[static_cast<std::size_t>(o2 + 1)];
              acc += w * series;
              wsum += w;
            }
          }
          if (wsum > 0.0) c.k[static_cast<std::size_t>(a)][cidx] = 4.0 * acc / wsum;
        }
      }
  compute_diag(c);
  return c;
}

// Fine index along one axis -> (coarse index, weight) pairs.
int coarse_stencil(const LevelGrid& cg, int axis, int fpos, std::array<int, 2>& ci,
                   std::array<double, 2>& w) {
  if (fpos % 2 == 0) {
    ci[0] = fpos / 2;
    w[0] = 1.0;
    return 1;
  }
  ci[0] = (fpos - 1) / 2;
  ci[1] = wrap(cg, axis, ci[0] + 1);
  w[0] = w[1] = 0.5;
  return 2;
}

void restrict_to(const Level& f, const std::vector<double>& rf, const Level& c,
                 std::vector<double>& bc) {
  std::fill(bc.begin(), bc.end(), 0.0);
  std::array<std::array<int, 2>, 3> ci;
  std::array<std::array<double, 2>, 3> w;
  std::array<int, 3> cnt;
  for (int k = 0; k < f.g.extent(2); ++k)
    for (int j = 0; j < f.g.extent(1); ++j)
      for (int i = 0; i < f.g.extent(0); ++i) {
        const double v = rf[f.g.index(i, j, k)];
        if (v == 0.0) continue;
        const std::array<int, 3> pos{i, j, k};
        for (int a = 0; a < 3; ++a)
          cnt[static_cast<std::size_t>(a)] =
              coarse_stencil(c.g, a, pos[static_cast<std::size_t>(a)], ci[static_cast<std::size_t>(a)],
                             w[static_cast<std::size_t>(a)]);
        for (int a = 0; a < cnt[0]; ++a)
          for (int b = 0; b < cnt[1]; ++b)
            for (int e = 0; e < cnt[2]; ++e) {
              const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b),
                         ue = static_cast<std::size_t>(e);
              bc[c.g.index(ci[0][ua], ci[1][ub], ci[2][ue])] += w[0][ua] * w[1][ub] * w[2][ue] * v;
            }
      }
  for (int k = 0; k < c.g.extent(2); ++k)
    for (int j = 0; j < c.g.extent(1); ++j)
      for (int i = 0; i < c.g.extent(0); ++i)
        if (c.g.dirichlet(i, j, k)) bc[c.g.index(i, j, k)] = 0.0;
}

void prolong_add(const Level& c, const std::vector<double>& xc, const Level& f,
                 std::vector<double>& xf) {
  std::array<std::array<int, 2>, 3> ci;
  std::array<std::array<double, 2>, 3> w;
  std::array<int, 3> cnt;
  for (int k = 0; k < f.g.extent(2); ++k)
    for (int j = 0; j < f.g.extent(1); ++j)
      for (int i = 0; i < f.g.extent(0); ++i) {
        if (f.g.dirichlet(i, j, k)) continue;
        const std::array<int, 3> pos{i, j, k};
        for (int a = 0; a < 3; ++a)
          cnt[static_cast<std::size_t>(a)] =
              coarse_stencil(c.g, a, pos[static_cast<std::size_t>(a)], ci[static_cast<std::size_t>(a)],
                             w[static_cast<std::size_t>(a)]);
        double acc = 0.0;
        for (int a = 0; a < cnt[0]; ++a)
          for (int b = 0; b < cnt[1]; ++b)
            for (int e = 0; e < cnt[2]; ++e) {
              const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b),
                         ue = static_cast<std::size_t>(e);
              acc += w[0][ua] * w[1][ub] * w[2][ue] * xc[c.g.index(ci[0][ua], ci[1][ub], ci[2][ue])];
            }
        xf[f.g.index(i, j, k)] += acc;
      }
}

}  // namespace

struct Multigrid::Impl {
  std::vector<Level> levels;
  int nu = 2;
  std::vector<std::size_t> dense_index;  // node -> compact unknown, or npos
  std::vector<std::size_t> dense_nodes;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> llt;
  std::optional<Eigen::LDLT<Eigen::MatrixXd>> ldlt;

  void setup_coarse() {
    const Level& l = levels.back();
    constexpr auto npos = static_cast<std::size_t>(-1);
    dense_index.assign(l.g.nodes(), npos);
    for (int k = 0; k < l.g.extent(2); ++k)
      for (int j = 0; j < l.g.extent(1); ++j)
        for (int i = 0; i < l.g.extent(0); ++i) {
          if (l.g.dirichlet(i, j, k)) continue;
          const std::size_t idx = l.g.index(i, j, k);
          dense_index[idx] = dense_nodes.size();
          dense_nodes.push_back(idx);
        }
    const auto m = static_cast<Eigen::Index>(dense_nodes.size());
    if (dense_nodes.size() > kDenseLimit || m == 0) return;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < l.g.extent(2); ++k)
      for (int j = 0; j < l.g.extent(1); ++j)
        for (int i = 0; i < l.g.extent(0); ++i) {
          const std::size_t idx = l.g.index(i, j, k);
          const std::size_t r = dense_index[idx];
          if (r == npos) continue;
          const auto ri = static_cast<Eigen::Index>(r);
          a(ri, ri) += l.diag[idx];
          const std::array<int, 3> pos{i, j, k};
          for (int ax = 0; ax < 3; ++ax) {
            const auto au = static_cast<std::size_t>(ax);
            const std::size_t up = step(l.g, idx, ax, pos[au], 1);
            const std::size_t dn = step(l.g, idx, ax, pos[au], -1);
            if (dense_index[up] != npos) a(ri, static_cast<Eigen::Index>(dense_index[up])) -= l.k[au][idx];
            if (dense_index[dn] != npos) a(ri, static_cast<Eigen::Index>(dense_index[dn])) -= l.k[au][dn];
          }
        }
    llt.emplace(a);
    if (llt->info() != Eigen::Success) {
      llt.reset();
      ldlt.emplace(a);
    }
  }

  void coarse_solve(const Level& l) const {
    std::fill(l.x.begin(), l.x.end(), 0.0);
    if (llt || ldlt) {
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(dense_nodes.size()));
      for (std::size_t r = 0; r < dense_nodes.size(); ++r) rhs[static_cast<Eigen::Index>(r)] = l.b[dense_nodes[r]];
      const Eigen::VectorXd sol = llt ? Eigen::VectorXd(llt->solve(rhs)) : Eigen::VectorXd(ldlt->solve(rhs));
      for (std::size_t r = 0; r < dense_nodes.size(); ++r) l.x[dense_nodes[r]] = sol[static_cast<Eigen::Index>(r)];
      return;
    }
    for (int s = 0; s < 50; ++s) {
      gauss_seidel(l, l.x, l.b, true);
      gauss_seidel(l, l.x, l.b, false);
    }
  }

  void vcycle(std::size_t li) const {
    const Level& l = levels[li];
    if (li + 1 == levels.size()) {
      coarse_solve(l);
      return;
    }
    std::fill(l.x.begin(), l.x.end(), 0.0);
    for (int s = 0; s < nu; ++s) gauss_seidel(l, l.x, l.b, true);
    residual(l, l.x, l.b, l.r);
    const Level& c = levels[li + 1];
    restrict_to(l, l.r, c, c.b);
    vcycle(li + 1);
    prolong_add(c, c.x, l, l.x);
    for (int s = 0; s < nu; ++s) gauss_seidel(l, l.x, l.b, false);
  }
};

Multigrid::Multigrid(const grid::DomainSpec& d, const kuhn::EdgeCoefficients& ec, int smoothing_steps)
    : impl_(std::make_unique<Impl>()) {
  impl_->nu = smoothing_steps;
  Level top;
  top.g = {d.kind() == grid::DomainKind::CubicPeriodic, d.n()};
  top.k = ec.k;
  compute_diag(top);
  impl_->levels.push_back(std::move(top));
  while (impl_->levels.back().g.n % 2 == 0 && impl_->levels.back().g.n / 2 >= 4) {
    impl_->levels.push_back(coarsen(impl_->levels.back()));
  }
  for (auto& l : impl_->levels) {
    l.x.assign(l.g.nodes(), 0.0);
    l.b.assign(l.g.nodes(), 0.0);
    l.r.assign(l.g.nodes(), 0.0);
  }
  impl_->setup_coarse();
}

Multigrid::~Multigrid() = default;
Multigrid::Multigrid(Multigrid&&) noexcept = default;
Multigrid& Multigrid::operator=(Multigrid&&) noexcept = default;

int Multigrid::levels() const noexcept { return static_cast<int>(impl_->levels.size()); }

void Multigrid::apply(std::span<const double> r, std::span<double> z) const {
  const Level& top = impl_->levels.front();
  std::copy(r.begin(), r.end(), top.b.begin());
  for (int k = 0; k < top.g.extent(2); ++k)
    for (int j = 0; j < top.g.extent(1); ++j)
      for (int i = 0; i < top.g.extent(0); ++i)
        if (top.g.dirichlet(i, j, k)) top.b[top.g.index(i, j, k)] = 0.0;
  impl_->vcycle(0);
  std::copy(top.x.begin(), top.x.end(), z.begin());
}

}  // namespace pstruct::mg
