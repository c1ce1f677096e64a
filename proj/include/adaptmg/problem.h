#pragma once

#include <adaptmg/fem.h>

#include <functional>
#include <span>
#include <vector>

namespace adaptmg
{
  using ScalarFunction = std::function<double(const Point &)>;

  /// Condensed load vector C^T (f, phi_i) with zero constrained rows, using
  /// an n-point Gauss rule per direction (p + 2 if n <= 0).
  std::vector<double>
  assemble_rhs(const TreeMesh &mesh, const DofMap &dofs, const ConstraintSet &constraints,
               const ScalarFunction &f, int n_points = 0);

  /// L2 norm of u_h - u over the cells of the DoF map. `u_h` must have its
  /// constrained entries filled in (ConstraintSet::distribute).
  double
  l2_error(const TreeMesh &mesh, const DofMap &dofs, std::span<const double> u_h,
           const ScalarFunction &u, int n_points = 0);

  struct ErrorNorms
  {
    double l2   = 0;
    double linf = 0; // sampled at the quadrature points
  };

  ErrorNorms
  compute_errors(const TreeMesh &mesh, const DofMap &dofs, std::span<const double> u_h,
                 const ScalarFunction &u, int n_points = 0);

  /// Manufactured solution exp(-|x - x0| / a^2) / (a sqrt(2 pi))^3 with
  /// x0 = (-1/2, -1/2, -1/2) and a = 0.1, and its negative Laplacian.
  struct GaussianSolution
  {
    double alpha = 0.1;
    Point  center{-0.5, -0.5, -0.5};
    int    dim = 3;

    double
    value(const Point &x) const;

    double
    laplacian_rhs(const Point &x) const;
  };

} // namespace adaptmg
