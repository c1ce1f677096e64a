#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace adaptmg
{
  using CellId = std::int32_t;

  /// Integer anchor of a cell on its own refinement level. Unused axes are 0.
  using CellCoords = std::array<std::uint32_t, 3>;

  using Point = std::array<double, 3>;

  struct Cell
  {
    CellId        parent      = -1;
    CellId        first_child = -1; // children are stored contiguously
    std::uint8_t  level       = 0;
    std::uint8_t  child_index = 0;
    CellCoords    coords{};

    bool
    is_active() const
    {
      return first_child < 0;
    }
  };

  /// Which cells form a multigrid level.
  enum class LevelKind
  {
    local_smoothing,  ///< cells exactly on refinement level l
    global_coarsening ///< leaves of the tree truncated at level l
  };

  /**
   * Forest-of-one-tree adaptive mesh over [-1,1]^d, d in {2,3}.
   *
   * Cells are appended in refinement order and never removed. The child with
   * index c sits at offset bit_k(c) along axis k, so the Morton index of a
   * child is morton(parent) * 2^d + c.
   */
  class TreeMesh
  {
  public:
    explicit TreeMesh(int dim);

    int
    dimension() const
    {
      return dim_;
    }

    int
    children_per_cell() const
    {
      return 1 << dim_;
    }

    /// Finest level present in the tree.
    int
    max_level() const
    {
      return max_level_;
    }

    std::size_t
    n_cells() const
    {
      return cells_.size();
    }

    const Cell &
    cell(CellId id) const
    {
      return cells_[id];
    }

    std::span<const Cell>
    cells() const
    {
      return cells_;
    }

    /// Refine the given active cells (non-active ids are ignored).
    void
    refine(std::span<const CellId> ids);

    /// Refine until vertex-adjacent active cells differ by at most one level.
    /// Returns the number of additional refinements performed.
    std::size_t
    balance();

    /// True if vertex-adjacent active cells differ by at most one level.
    bool
    is_balanced() const;

    /// The cell with the given level and anchor, if present in the tree.
    std::optional<CellId>
    find(int level, const CellCoords &coords) const;

    /// Deepest existing cell whose region contains the level-`level` cell
    /// position `coords`.
    CellId
    locate(int level, const CellCoords &coords) const;

    /// True if the position (level, coords) lies inside [0, 2^level)^d.
    bool
    inside(int level, const std::array<std::int64_t, 3> &coords) const;

    /// Morton index on the cell's own level.
    std::uint64_t
    morton(CellId id) const;

    /// Morton index of the cell anchor expressed on `level` (>= cell level).
    std::uint64_t
    morton_on_level(CellId id, int level) const;

    double
    cell_size(CellId id) const
    {
      return 2.0 / static_cast<double>(1u << cells_[id].level);
    }

    Point
    center(CellId id) const;

    Point
    lower_corner(CellId id) const;

    /// Active cells in space-filling-curve (depth-first) order.
    std::vector<CellId>
    active_cells() const;

    /// Cells of a multigrid level in space-filling-curve order.
    std::vector<CellId>
    level_cells(LevelKind kind, int level) const;

    /// Depth-first traversal; `descend(id)` decides whether to visit the
    /// children of a non-active cell, `collect(id)` whether to output it.
    std::vector<CellId>
    traverse(const std::function<bool(CellId)> &descend,
             const std::function<bool(CellId)> &collect) const;

    /// Number of cells on each refinement level.
    std::vector<std::size_t>
    cells_per_level() const;

    /// For each cell of `view` (a list of cells forming a conforming-or-1-irregular
    /// cover of the domain or a single LS level), whether some codim>0 entity
    /// of dimension >= 1 is shared with a coarser cell of the same view, i.e.
    /// whether the cell carries hanging-node constraints.
    std::vector<bool>
    hanging_flags(std::span<const CellId> view) const;

  private:
    static std::uint64_t
    pack(const CellCoords &c);

    int                                                  dim_;
    int                                                  max_level_ = 0;
    std::vector<Cell>                                    cells_;
    std::vector<std::unordered_map<std::uint64_t, CellId>> by_level_;
  };

  /// Membership mask of `view` over all tree cells.
  std::vector<bool>
  view_mask(const TreeMesh &mesh, std::span<const CellId> view);

  /// Refine every cell whose interior meets the open first orthant (-1,0)^d,
  /// L times, with 2:1 closure after each step.
  TreeMesh
  refine_octant(int n_refinements, int dim = 3);

  /// L-3 uniform refinements followed by three center-distance based local
  /// steps; 3D only, L >= 5.
  TreeMesh
  refine_shell(int n_refinements);

  TreeMesh
  refine_uniform(int n_refinements, int dim);

  /// Balanced copy of `mesh`.
  TreeMesh
  balance_2to1(TreeMesh mesh);

  /// Per-level counts for reporting.
  struct MeshStatistics
  {
    int                      dimension = 3;
    int                      n_levels  = 0;
    std::size_t              n_active  = 0;
    std::size_t              n_active_hanging = 0;
    std::vector<std::size_t> ls_cells;        // per level
    std::vector<std::size_t> gc_cells;        // per level
    std::vector<std::size_t> gc_hanging_cells; // per level
  };

  MeshStatistics
  compute_statistics(const TreeMesh &mesh);

} // namespace adaptmg
