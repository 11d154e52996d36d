#pragma once

// Preconditioned Krylov iterations on flat vectors.

#include <functional>
#include <span>
#include <vector>

namespace pstruct::krylov {

using Operator = std::function<void(std::span<const double>, std::span<double>)>;

struct Result {
  int iterations = 0;
  double residual = 0.0;  // final ||b - A x||_2
  bool converged = false;
};

/// Conjugate gradients for SPD A with SPD preconditioner M. Stops once
/// ||b - A x||_2 <= abs_tol. x holds the initial guess on entry.
Result pcg(const Operator& a, const Operator& m, std::span<const double> b, std::span<double> x,
           double abs_tol, int max_iter);

/// Right-preconditioned BiCGSTAB for nonsymmetric A.
Result bicgstab(const Operator& a, const Operator& m, std::span<const double> b,
                std::span<double> x, double abs_tol, int max_iter);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace pstruct::krylov
