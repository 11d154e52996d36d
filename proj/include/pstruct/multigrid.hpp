#pragma once

// Geometric multigrid V-cycle for the scalar edge operator of kuhn.hpp.
// Vertex-centered coarsening, trilinear prolongation, restriction by the
// transpose, symmetric Gauss-Seidel smoothing and a dense Cholesky solve on
// the coarsest level, so one cycle is a symmetric positive definite
// preconditioner.

#include <memory>
#include <span>
#include <vector>

#include "pstruct/kuhn.hpp"

namespace pstruct::mg {

struct LevelGrid {
  bool periodic_xy = false;
  int n = 0;

  int extent(int axis) const noexcept { return (periodic_xy && axis < 2) ? n : n + 1; }
  std::size_t nodes() const noexcept {
    return static_cast<std::size_t>(extent(0)) * extent(1) * extent(2);
  }
  std::size_t index(int i, int j, int k) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(extent(0)) * (static_cast<std::size_t>(j) +
                                                  static_cast<std::size_t>(extent(1)) * k);
  }
  bool periodic(int axis) const noexcept { return periodic_xy && axis < 2; }
  bool dirichlet(int i, int j, int k) const noexcept {
    return (!periodic(0) && (i == 0 || i == n)) || (!periodic(1) && (j == 0 || j == n)) ||
           k == 0 || k == n;
  }
};

class Multigrid {
 public:
  Multigrid(const grid::DomainSpec& d, const kuhn::EdgeCoefficients& ec, int smoothing_steps = 2);
  ~Multigrid();
  Multigrid(Multigrid&&) noexcept;
  Multigrid& operator=(Multigrid&&) noexcept;

  /// z = M^{-1} r by one V-cycle from a zero initial guess.
  void apply(std::span<const double> r, std::span<double> z) const;

  int levels() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pstruct::mg
