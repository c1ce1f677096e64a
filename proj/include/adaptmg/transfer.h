#pragma once

#include <adaptmg/operator.h>

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace adaptmg
{
  enum class Refinement
  {
    with,
    without
  };

  /// 1D element prolongation from degree p_c to degree p_f by mass projection
  /// onto the fine element(s). With refinement the rows cover the 2 p_f + 1
  /// nodes of the two children (child b, node i -> row b p_f + i).
  Eigen::MatrixXd
  prolongation_matrix_1d(int p_c, int p_f, Refinement refinement);

  /// Tensor-product element prolongation matrix in `dim` dimensions.
  Eigen::MatrixXd
  element_prolongation_matrix(int dim, int p_c, int p_f, Refinement refinement);

  /// Nodal interpolation of the fine (patch) space at the coarse nodes.
  Eigen::MatrixXd
  interpolation_matrix_1d(int p_c, int p_f, Refinement refinement);

  enum class TransferCategory
  {
    identity,
    refined,
    polynomial
  };

  /// One category of coarse cells sharing an element prolongation matrix.
  template <typename Number>
  struct TransferScheme
  {
    TransferCategory           category = TransferCategory::identity;
    int                        n_coarse = 0; // 1D sizes
    int                        n_fine   = 0;
    std::vector<Number>        prolongation;  // n_fine x n_coarse, row-major
    std::vector<Number>        interpolation; // n_coarse x n_fine, row-major
    std::vector<std::uint32_t> coarse_cells;  // positions in the coarse DoF map
    std::vector<std::uint32_t> fine_indices;  // n_fine^d per member

    std::size_t
    n_members() const
    {
      return coarse_cells.size();
    }
  };

  /**
   * Prolongation P = W o sum_e S_e P_e C_e G_e and its transpose between two
   * DoF maps, dispatched over categories. The coarse gather resolves the
   * coarse constraints (homogeneously); the fine weights are 1/valence on
   * unconstrained fine DoFs and 0 on constrained ones.
   */
  template <typename Number>
  class TwoLevelTransfer
  {
  public:
    TwoLevelTransfer() = default;

    std::size_t
    n_coarse_dofs() const
    {
      return coarse_gather_.n_dofs();
    }

    std::size_t
    n_fine_dofs() const
    {
      return weights_.size();
    }

    std::span<const TransferScheme<Number>>
    schemes() const
    {
      return schemes_;
    }

    std::span<const Number>
    weights() const
    {
      return weights_;
    }

    /// Number of fine patches containing each fine DoF.
    std::span<const std::uint32_t>
    valence() const
    {
      return valence_;
    }

    void
    prolongate_and_add(std::span<Number> fine, std::span<const Number> coarse) const;

    void
    restrict_and_add(std::span<Number> coarse, std::span<const Number> fine) const;

    /// coarse <- nodal interpolation of the fine field at the coarse nodes
    /// (entries of coarse DoFs not covered by any member are left alone).
    void
    interpolate(std::span<Number> coarse, std::span<const Number> fine) const;

  private:
    template <typename N>
    friend TwoLevelTransfer<N>
    build_geometric_transfer(const TreeMesh &, const DofMap &, const ConstraintSet &,
                             const DofMap &, const ConstraintSet &, bool);

    template <typename N>
    friend TwoLevelTransfer<N>
    build_polynomial_transfer(const DofMap &, const ConstraintSet &, const DofMap &,
                              const ConstraintSet &);

    void
    finalize(const ConstraintSet &fine_weight_constraints);

    int                                 dim_ = 0;
    CellGather<Number>                  coarse_gather_;
    std::vector<TransferScheme<Number>> schemes_;
    std::vector<Number>                 weights_;
    std::vector<std::uint32_t>          valence_;
    mutable std::vector<Number>         scratch_;
  };

  /**
   * Transfer between a level and its one-step geometric coarsening. Every
   * coarse cell is either present on the fine side (identity) or replaced by
   * its 2^d children (refined). With `allow_uncovered` (local smoothing)
   * coarse cells without fine counterpart are skipped; otherwise they are an
   * error. `fine_weight_constraints` decides which fine DoFs get weight 0.
   */
  template <typename Number>
  TwoLevelTransfer<Number>
  build_geometric_transfer(const TreeMesh &mesh, const DofMap &coarse,
                           const ConstraintSet &coarse_constraints, const DofMap &fine,
                           const ConstraintSet &fine_weight_constraints, bool allow_uncovered);

  /// Transfer between two degrees on the same cells (1 <= p_c < p_f).
  template <typename Number>
  TwoLevelTransfer<Number>
  build_polynomial_transfer(const DofMap &coarse, const ConstraintSet &coarse_constraints,
                            const DofMap &fine, const ConstraintSet &fine_weight_constraints);

} // namespace adaptmg
