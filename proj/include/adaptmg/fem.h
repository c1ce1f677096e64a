#pragma once

#include <adaptmg/mesh.h>

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace adaptmg
{
  /// Points and weights of a 1D rule on [0,1].
  struct QuadratureRule1D
  {
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t
    size() const
    {
      return points.size();
    }
  };

  /// n-point Gauss-Legendre rule on [0,1], exact for degree 2n-1.
  QuadratureRule1D
  gauss_legendre(int n);

  /// n >= 2 Gauss-Lobatto points on [0,1] including both end points.
  std::vector<double>
  gauss_lobatto_points(int n);

  /// Lagrange polynomials through a set of distinct 1D nodes.
  class LagrangeBasis1D
  {
  public:
    explicit LagrangeBasis1D(std::vector<double> nodes);

    std::size_t
    size() const
    {
      return nodes_.size();
    }

    std::span<const double>
    nodes() const
    {
      return nodes_;
    }

    double
    value(std::size_t i, double x) const;

    double
    derivative(std::size_t i, double x) const;

  private:
    std::vector<double> nodes_;
    std::vector<double> denominators_;
  };

  /**
   * Continuous tensor-product Lagrange element of degree p on the unit cell.
   * Node set: {0,1} for p = 1, Gauss-Lobatto points otherwise. Local DoFs are
   * numbered lexicographically with axis 0 running fastest.
   */
  class LagrangeElement
  {
  public:
    LagrangeElement(int dim, int degree);

    int
    dimension() const
    {
      return dim_;
    }

    int
    degree() const
    {
      return degree_;
    }

    /// Nodes per direction, p + 1.
    int
    n_1d() const
    {
      return degree_ + 1;
    }

    int
    dofs_per_cell() const
    {
      return dofs_per_cell_;
    }

    const LagrangeBasis1D &
    basis() const
    {
      return basis_;
    }

    /// Gauss-Legendre rule with p + 1 points.
    const QuadratureRule1D &
    quadrature() const
    {
      return quadrature_;
    }

    /// values(q, i) = phi_i(x_q), row-major n_q x n.
    std::span<const double>
    shape_values() const
    {
      return shape_values_;
    }

    /// Derivative of the Lagrange basis through the quadrature points,
    /// evaluated at the quadrature points (collocation derivative).
    std::span<const double>
    collocation_gradients() const
    {
      return collocation_gradients_;
    }

    /// Tensor-product shape value at a reference point.
    double
    shape_value(int i, const Point &x) const;

  private:
    int                 dim_;
    int                 degree_;
    int                 dofs_per_cell_;
    LagrangeBasis1D     basis_;
    QuadratureRule1D    quadrature_;
    std::vector<double> shape_values_;
    std::vector<double> collocation_gradients_;
  };

  /**
   * Global enumeration of the continuous Lagrange space on a cell list (a
   * level view or the active mesh). Nodes that coincide geometrically and
   * belong to the same entity type (vertex, or interior of an equal-sized
   * edge/face/cell segment) share an index; nodes on the fine side of a
   * coarse/fine interface get their own (constrained) indices.
   */
  class DofMap
  {
  public:
    DofMap() = default;

    int
    dimension() const
    {
      return dim_;
    }

    int
    degree() const
    {
      return degree_;
    }

    int
    dofs_per_cell() const
    {
      return dofs_per_cell_;
    }

    std::size_t
    n_dofs() const
    {
      return n_dofs_;
    }

    std::size_t
    n_cells() const
    {
      return cells_.size();
    }

    std::span<const CellId>
    cells() const
    {
      return cells_;
    }

    /// Global indices of the cell at position `pos` of the cell list (the
    /// gather list G_e).
    std::span<const std::uint32_t>
    cell_dofs(std::size_t pos) const
    {
      return {cell_dofs_.data() + pos * dofs_per_cell_, static_cast<std::size_t>(dofs_per_cell_)};
    }

    /// Position of a tree cell in the cell list, or -1.
    std::int32_t
    position(CellId id) const
    {
      return id < static_cast<CellId>(position_.size()) ? position_[id] : -1;
    }

    const Point &
    support_point(std::size_t dof) const
    {
      return support_points_[dof];
    }

    bool
    at_boundary(std::size_t dof) const
    {
      return at_boundary_[dof];
    }

  private:
    friend DofMap
    distribute_dofs(const TreeMesh &, std::span<const CellId>, int);

    int                        dim_           = 0;
    int                        degree_        = 0;
    int                        dofs_per_cell_ = 0;
    std::size_t                n_dofs_        = 0;
    std::vector<CellId>        cells_;
    std::vector<std::int32_t>  position_;
    std::vector<std::uint32_t> cell_dofs_;
    std::vector<Point>         support_points_;
    std::vector<bool>          at_boundary_;
  };

  /// Enumerate DoFs of degree `degree` on the cells of `view`, in view order.
  DofMap
  distribute_dofs(const TreeMesh &mesh, std::span<const CellId> view, int degree);

  /// Affine constraint lines x_i = sum_j c_ij x_j + b_i.
  class ConstraintSet
  {
  public:
    struct Entry
    {
      std::uint32_t index;
      double        coefficient;
    };

    ConstraintSet() = default;

    explicit ConstraintSet(std::size_t n_dofs);

    std::size_t
    n_dofs() const
    {
      return line_of_.size();
    }

    std::size_t
    n_constraints() const
    {
      return lines_.size();
    }

    bool
    is_constrained(std::size_t i) const
    {
      return line_of_[i] >= 0;
    }

    /// Adds a line; an existing line for `index` is replaced.
    void
    set_line(std::uint32_t index, std::vector<Entry> entries, double inhomogeneity = 0.0);

    std::span<const Entry>
    entries(std::size_t i) const;

    double
    inhomogeneity(std::size_t i) const;

    /// Sorted list of constrained indices.
    std::vector<std::uint32_t>
    constrained_indices() const;

    /// Substitute lines into each other until no constraining index is
    /// itself constrained. Throws on cyclic constraints.
    void
    close();

    bool
    is_closed() const;

    /// x_i <- sum_j c_ij x_j + b_i for every constrained i (requires closed).
    void
    distribute(std::span<double> x) const;

    /// Union where lines of `priority` replace lines of `base`; closed.
    static ConstraintSet
    merge(const ConstraintSet &base, const ConstraintSet &priority);

  private:
    struct Line
    {
      std::uint32_t      index;
      std::vector<Entry> entries;
      double             inhomogeneity;
    };

    std::vector<std::int32_t> line_of_;
    std::vector<Line>         lines_;
  };

  /// Hanging-node constraints of a 1-irregular view: fine-side nodes on a
  /// coarse/fine interface interpolate the coarse-side polynomial. Closed.
  ConstraintSet
  build_hanging_node_constraints(const TreeMesh &mesh, const DofMap &dofs);

  /// x_i = g(node_i) for every node on the boundary of [-1,1]^d.
  ConstraintSet
  build_dirichlet_constraints(const DofMap &dofs, const std::function<double(const Point &)> &g);

  /// Homogeneous Dirichlet plus hanging-node constraints, Dirichlet winning.
  ConstraintSet
  build_level_constraints(const TreeMesh &mesh, const DofMap &dofs);

} // namespace adaptmg
