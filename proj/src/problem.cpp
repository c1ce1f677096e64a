#include <adaptmg/operator.h>
#include <adaptmg/problem.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace adaptmg
{
  namespace
  {
    // Calls fn(x, w, values) for every tensor quadrature point of `cell`,
    // where values[i] is the i-th shape function at that point.
    template <typename Fn>
    void
    for_each_point(const TreeMesh &mesh, CellId cell, const LagrangeElement &fe,
                   const QuadratureRule1D &q, Fn &&fn)
    {
      const int   dim = fe.dimension();
      const int   nq  = static_cast<int>(q.size());
      const int   n   = fe.n_1d();
      const Point x0  = mesh.lower_corner(cell);
      const double h  = mesh.cell_size(cell);
      const double jac = std::pow(h, dim);

      std::vector<double> v1(nq * n);
      for (int k = 0; k < nq; ++k)
        for (int i = 0; i < n; ++i)
          v1[k * n + i] = fe.basis().value(i, q.points[k]);

      int total = 1;
      for (int k = 0; k < dim; ++k)
        total *= nq;
      std::vector<double> values(fe.dofs_per_cell());
      for (int qp = 0; qp < total; ++qp)
        {
          Point  x{0, 0, 0};
          double w = jac;
          std::array<int, 3> qi{0, 0, 0};
          for (int k = 0, r = qp; k < dim; ++k, r /= nq)
            {
              qi[k] = r % nq;
              x[k]  = x0[k] + h * q.points[qi[k]];
              w *= q.weights[qi[k]];
            }
          for (int a = 0; a < fe.dofs_per_cell(); ++a)
            {
              double v = 1;
              for (int k = 0, r = a; k < dim; ++k, r /= n)
                v *= v1[qi[k] * n + r % n];
              values[a] = v;
            }
          fn(x, w, values);
        }
    }
  } // namespace

  std::vector<double>
  assemble_rhs(const TreeMesh &mesh, const DofMap &dofs, const ConstraintSet &constraints,
               const ScalarFunction &f, int n_points)
  {
    if (constraints.n_dofs() != dofs.n_dofs())
      throw std::invalid_argument("constraint set does not match the DoF map");
    const LagrangeElement    fe(dofs.dimension(), dofs.degree());
    const auto               q = gauss_legendre(n_points > 0 ? n_points : dofs.degree() + 2);
    const CellGather<double> gather(dofs, constraints);
    std::vector<double>      b(dofs.n_dofs(), 0.0), local(fe.dofs_per_cell());
    for (std::size_t c = 0; c < dofs.n_cells(); ++c)
      {
        std::fill(local.begin(), local.end(), 0.0);
        for_each_point(mesh, dofs.cells()[c], fe, q,
                       [&](const Point &x, double w, const std::vector<double> &phi) {
                         const double fw = f(x) * w;
                         for (std::size_t i = 0; i < phi.size(); ++i)
                           local[i] += fw * phi[i];
                       });
        gather.scatter_add(local.data(), c, std::span<double>(b));
      }
    return b;
  }

  ErrorNorms
  compute_errors(const TreeMesh &mesh, const DofMap &dofs, std::span<const double> u_h,
                 const ScalarFunction &u, int n_points)
  {
    if (u_h.size() != dofs.n_dofs())
      throw std::invalid_argument("vector size does not match the DoF map");
    const LagrangeElement fe(dofs.dimension(), dofs.degree());
    const auto            q   = gauss_legendre(n_points > 0 ? n_points : dofs.degree() + 3);
    double                sum = 0, max = 0;
    for (std::size_t c = 0; c < dofs.n_cells(); ++c)
      {
        const auto idx = dofs.cell_dofs(c);
        for_each_point(mesh, dofs.cells()[c], fe, q,
                       [&](const Point &x, double w, const std::vector<double> &phi) {
                         double v = 0;
                         for (std::size_t i = 0; i < phi.size(); ++i)
                           v += u_h[idx[i]] * phi[i];
                         const double e = v - u(x);
                         sum += w * e * e;
                         max = std::max(max, std::abs(e));
                       });
      }
    return {std::sqrt(sum), max};
  }

  double
  l2_error(const TreeMesh &mesh, const DofMap &dofs, std::span<const double> u_h,
           const ScalarFunction &u, int n_points)
  {
    return compute_errors(mesh, dofs, u_h, u, n_points).l2;
  }

  double
  GaussianSolution::value(const Point &x) const
  {
    double r2 = 0;
    for (int k = 0; k < dim; ++k)
      r2 += (x[k] - center[k]) * (x[k] - center[k]);
    const double scale = 1.0 / (alpha * std::sqrt(2 * std::numbers::pi));
    return std::pow(scale, 3) * std::exp(-std::sqrt(r2) / (alpha * alpha));
  }

  // u = c exp(-r/a^2): -Lap u = -(u'' + (d-1)/r u') = u ((d-1)/(a^2 r) - 1/a^4)
  double
  GaussianSolution::laplacian_rhs(const Point &x) const
  {
    double r2 = 0;
    for (int k = 0; k < dim; ++k)
      r2 += (x[k] - center[k]) * (x[k] - center[k]);
    const double r  = std::max(std::sqrt(r2), 1e-300);
    const double a2 = alpha * alpha;
    return value(x) * ((dim - 1) / (a2 * r) - 1.0 / (a2 * a2));
  }

} // namespace adaptmg
