#pragma once

#include <adaptmg/fem.h>

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace adaptmg
{
  /**
   * Cell-wise gather/scatter with constraints applied on the fly: the
   * composition C_e o G_e and its transpose. Built from a closed constraint
   * set. Homogeneous gathers ignore inhomogeneities.
   */
  template <typename Number>
  class CellGather
  {
  public:
    CellGather() = default;

    CellGather(const DofMap &dofs, const ConstraintSet &constraints);

    std::size_t
    n_dofs() const
    {
      return line_of_.size();
    }

    std::size_t
    n_cells() const
    {
      return cell_constrained_.size();
    }

    int
    dofs_per_cell() const
    {
      return dofs_per_cell_;
    }

    bool
    is_constrained(std::size_t i) const
    {
      return line_of_[i] >= 0;
    }

    bool
    cell_has_constraints(std::size_t cell) const
    {
      return cell_constrained_[cell];
    }

    std::span<const std::uint32_t>
    cell_dofs(std::size_t cell) const
    {
      return {indices_.data() + cell * dofs_per_cell_, static_cast<std::size_t>(dofs_per_cell_)};
    }

    /// Constraint line of global index i as (columns, values); empty if the
    /// line only carries an inhomogeneity.
    std::span<const std::uint32_t>
    line_columns(std::size_t i) const;

    std::span<const Number>
    line_values(std::size_t i) const;

    double
    line_inhomogeneity(std::size_t i) const
    {
      return line_of_[i] < 0 ? 0.0 : inhomogeneities_[line_of_[i]];
    }

    template <typename VectorNumber>
    void
    gather(std::span<const VectorNumber> src, std::size_t cell, Number *local,
           bool with_inhomogeneities = false) const;

    template <typename VectorNumber>
    void
    scatter_add(const Number *local, std::size_t cell, std::span<VectorNumber> dst) const;

  private:
    int                        dofs_per_cell_ = 0;
    std::vector<std::uint32_t> indices_;
    std::vector<bool>          cell_constrained_;
    std::vector<std::int32_t>  line_of_;
    std::vector<std::uint32_t> line_ptr_;
    std::vector<std::uint32_t> line_cols_;
    std::vector<Number>        line_vals_;
    std::vector<double>        inhomogeneities_;
  };

  /// Interior/refinement-edge split of the DoFs of a local smoothing level.
  struct EdgeDofClassification
  {
    std::vector<bool>          is_edge;
    std::vector<std::uint32_t> edge_dofs;

    bool
    empty() const
    {
      return edge_dofs.empty();
    }
  };

  /// E = level DoFs (not on the domain boundary) lying on the interface of
  /// the level's cells toward coarser active cells.
  EdgeDofClassification
  classify_edge_dofs(const TreeMesh &mesh, const DofMap &dofs);

  /// Constraints of the smoothing operator A_SS of a local smoothing level:
  /// homogeneous Dirichlet plus homogeneous lines on the refinement edge.
  ConstraintSet
  build_edge_constraints(const DofMap &dofs, const EdgeDofClassification &edge);

  /**
   * Matrix-free weak Laplacian on a cell list, evaluated cell by cell with
   * sum factorization at the (p+1)^d Gauss points. Constrained DoFs are
   * condensed: their rows and columns are removed and replaced by the
   * identity.
   */
  template <typename Number>
  class LaplaceOperator
  {
  public:
    LaplaceOperator() = default;

    /// `cell_subset` restricts the cell loop to the given positions of the
    /// cell list (all cells if empty).
    LaplaceOperator(const TreeMesh &mesh, const DofMap &dofs, const ConstraintSet &constraints,
                    std::vector<std::uint32_t> cell_subset = {});

    std::size_t
    n_dofs() const
    {
      return gather_.n_dofs();
    }

    int
    dimension() const
    {
      return dim_;
    }

    int
    degree() const
    {
      return n_ - 1;
    }

    const CellGather<Number> &
    gather() const
    {
      return gather_;
    }

    /// dst = A src.
    void
    vmult(std::span<Number> dst, std::span<const Number> src) const;

    std::vector<Number>
    apply(std::span<const Number> src) const;

    /// Cell loop without the identity rows for constrained DoFs; `dst` is
    /// accumulated into.
    void
    vmult_add_cells(std::span<Number> dst, std::span<const Number> src) const;

    /// dst -= contribution of the constraint inhomogeneities (lifting of
    /// Dirichlet data), zero in constrained rows.
    void
    subtract_inhomogeneities(std::span<double> dst) const;

    /// Diagonal of the condensed operator (1 in constrained rows).
    std::vector<Number>
    compute_diagonal() const;

    /// Dense condensed matrix (small problems only).
    Eigen::MatrixXd
    assemble_matrix() const;

    /// Element matrix of the unit reference cell built column by column from
    /// the cell kernel; the element matrix of a cell of size h is
    /// h^(d-2) times this.
    const Eigen::MatrixXd &
    reference_element_matrix() const
    {
      return reference_matrix_;
    }

    /// Apply the cell kernel A_e to one local vector.
    void
    apply_cell(const Number *local_in, Number *local_out, Number scale) const;

  private:
    template <int dim>
    void
    apply_cell_impl(const Number *local_in, Number *local_out, Number scale) const;

    int                        dim_ = 0;
    int                        n_   = 0;
    CellGather<Number>         gather_;
    std::vector<std::uint32_t> cells_;
    std::vector<Number>        cell_scale_;
    std::vector<Number>        values_;
    std::vector<Number>        gradients_;
    std::vector<Number>        quad_weights_;
    Eigen::MatrixXd            reference_matrix_;
    mutable std::vector<Number> scratch_;
  };

  /**
   * Coupling blocks between interior (S) and refinement-edge (E) DoFs of a
   * local smoothing level, from the level operator with Dirichlet
   * constraints only, looping over the cells that touch the edge.
   */
  template <typename Number>
  class EdgeCoupling
  {
  public:
    enum class Block
    {
      SE,
      ES
    };

    EdgeCoupling() = default;

    EdgeCoupling(const TreeMesh &mesh, const DofMap &dofs, const ConstraintSet &dirichlet,
                 EdgeDofClassification edge);

    const EdgeDofClassification &
    classification() const
    {
      return edge_;
    }

    /// ES: -A_ES x_S at the edge DoFs (zero elsewhere).
    /// SE: A_SE x_E at the interior DoFs (zero elsewhere).
    std::vector<Number>
    apply(Block which, std::span<const Number> x) const;

  private:
    EdgeDofClassification   edge_;
    LaplaceOperator<Number> op_;
  };

} // namespace adaptmg
