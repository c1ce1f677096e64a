#include <adaptmg/mesh.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaptmg
{
  namespace
  {
    // Offsets in {-1,0,1}^d without the zero offset.
    std::vector<std::array<int, 3>>
    neighbor_offsets(int dim, int max_nonzero)
    {
      std::vector<std::array<int, 3>> result;
      const int                        nz = dim == 3 ? 3 : 1;
      for (int k = -1; k <= 1; ++k)
        for (int j = -1; j <= 1; ++j)
          for (int i = -1; i <= 1; ++i)
            {
              if (nz == 1 && k != 0)
                continue;
              const int n_nonzero = (i != 0) + (j != 0) + (k != 0);
              if (n_nonzero == 0 || n_nonzero > max_nonzero)
                continue;
              result.push_back({i, j, k});
            }
      return result;
    }
  } // namespace

  TreeMesh::TreeMesh(int dim)
    : dim_(dim)
  {
    if (dim != 2 && dim != 3)
      throw std::invalid_argument("TreeMesh: dimension must be 2 or 3");
    cells_.push_back(Cell{});
    by_level_.resize(1);
    by_level_[0].emplace(pack({0, 0, 0}), 0);
  }

  std::uint64_t
  TreeMesh::pack(const CellCoords &c)
  {
    return (static_cast<std::uint64_t>(c[2]) << 42) |
           (static_cast<std::uint64_t>(c[1]) << 21) | static_cast<std::uint64_t>(c[0]);
  }

  void
  TreeMesh::refine(std::span<const CellId> ids)
  {
    const int n_children = children_per_cell();
    for (const CellId id : ids)
      {
        if (!cells_[id].is_active())
          continue;
        const Cell parent = cells_[id];
        if (parent.level >= 20)
          throw std::runtime_error("TreeMesh: refinement beyond level 20 is not supported");
        const int child_level = parent.level + 1;
        if (static_cast<int>(by_level_.size()) <= child_level)
          by_level_.resize(child_level + 1);
        max_level_ = std::max(max_level_, child_level);

        const CellId first = static_cast<CellId>(cells_.size());
        cells_[id].first_child = first;
        for (int c = 0; c < n_children; ++c)
          {
            Cell child;
            child.parent      = id;
            child.level       = static_cast<std::uint8_t>(child_level);
            child.child_index = static_cast<std::uint8_t>(c);
            for (int k = 0; k < dim_; ++k)
              child.coords[k] = 2 * parent.coords[k] + ((c >> k) & 1);
            by_level_[child_level].emplace(pack(child.coords), first + c);
            cells_.push_back(child);
          }
      }
  }

  std::optional<CellId>
  TreeMesh::find(int level, const CellCoords &coords) const
  {
    if (level < 0 || level >= static_cast<int>(by_level_.size()))
      return std::nullopt;
    const auto it = by_level_[level].find(pack(coords));
    if (it == by_level_[level].end())
      return std::nullopt;
    return it->second;
  }

  CellId
  TreeMesh::locate(int level, const CellCoords &coords) const
  {
    level = std::min(level, max_level_);
    for (int l = level; l >= 0; --l)
      {
        CellCoords c{};
        for (int k = 0; k < dim_; ++k)
          c[k] = coords[k] >> (level - l);
        if (const auto id = find(l, c))
          return *id;
      }
    return 0;
  }

  bool
  TreeMesh::inside(int level, const std::array<std::int64_t, 3> &coords) const
  {
    const std::int64_t n = std::int64_t(1) << level;
    for (int k = 0; k < dim_; ++k)
      if (coords[k] < 0 || coords[k] >= n)
        return false;
    return true;
  }

  std::size_t
  TreeMesh::balance()
  {
    const auto  offsets = neighbor_offsets(dim_, dim_);
    std::size_t total   = 0;
    while (true)
      {
        std::vector<CellId> flagged;
        std::vector<bool>   is_flagged(cells_.size(), false);
        for (CellId id = 0; id < static_cast<CellId>(cells_.size()); ++id)
          {
            const Cell &c = cells_[id];
            if (!c.is_active() || c.level < 2)
              continue;
            for (const auto &o : offsets)
              {
                std::array<std::int64_t, 3> q{};
                for (int k = 0; k < dim_; ++k)
                  q[k] = static_cast<std::int64_t>(c.coords[k]) + o[k];
                if (!inside(c.level, q))
                  continue;
                const CellId other =
                  locate(c.level,
                         {static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                          static_cast<std::uint32_t>(q[2])});
                if (cells_[other].level + 1 < c.level && !is_flagged[other])
                  {
                    is_flagged[other] = true;
                    flagged.push_back(other);
                  }
              }
          }
        if (flagged.empty())
          break;
        std::sort(flagged.begin(), flagged.end());
        refine(flagged);
        total += flagged.size();
      }
    return total;
  }

  bool
  TreeMesh::is_balanced() const
  {
    const auto offsets = neighbor_offsets(dim_, dim_);
    for (const Cell &c : cells_)
      {
        if (!c.is_active())
          continue;
        for (const auto &o : offsets)
          {
            std::array<std::int64_t, 3> q{};
            for (int k = 0; k < dim_; ++k)
              q[k] = static_cast<std::int64_t>(c.coords[k]) + o[k];
            if (!inside(c.level, q))
              continue;
            const CellId other =
              locate(c.level,
                     {static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                      static_cast<std::uint32_t>(q[2])});
            if (cells_[other].level + 1 < c.level)
              return false;
          }
      }
    return true;
  }

  std::uint64_t
  TreeMesh::morton(CellId id) const
  {
    return morton_on_level(id, cells_[id].level);
  }

  std::uint64_t
  TreeMesh::morton_on_level(CellId id, int level) const
  {
    const Cell   &c     = cells_[id];
    const int     shift = level - c.level;
    std::uint64_t key   = 0;
    for (int b = 0; b < level; ++b)
      for (int k = 0; k < dim_; ++k)
        {
          const std::uint64_t bit = ((static_cast<std::uint64_t>(c.coords[k]) << shift) >> b) & 1u;
          key |= bit << (b * dim_ + k);
        }
    return key;
  }

  Point
  TreeMesh::lower_corner(CellId id) const
  {
    Point        p{};
    const double h = cell_size(id);
    for (int k = 0; k < dim_; ++k)
      p[k] = -1.0 + h * cells_[id].coords[k];
    return p;
  }

  Point
  TreeMesh::center(CellId id) const
  {
    Point        p = lower_corner(id);
    const double h = cell_size(id);
    for (int k = 0; k < dim_; ++k)
      p[k] += 0.5 * h;
    return p;
  }

  std::vector<CellId>
  TreeMesh::traverse(const std::function<bool(CellId)> &descend,
                     const std::function<bool(CellId)> &collect) const
  {
    std::vector<CellId> result;
    std::vector<CellId> stack{0};
    const int           n_children = children_per_cell();
    while (!stack.empty())
      {
        const CellId id = stack.back();
        stack.pop_back();
        if (collect(id))
          result.push_back(id);
        const Cell &c = cells_[id];
        if (!c.is_active() && descend(id))
          for (int ch = n_children - 1; ch >= 0; --ch)
            stack.push_back(c.first_child + ch);
      }
    return result;
  }

  std::vector<CellId>
  TreeMesh::active_cells() const
  {
    return traverse([](CellId) { return true; },
                    [this](CellId id) { return cells_[id].is_active(); });
  }

  std::vector<CellId>
  TreeMesh::level_cells(LevelKind kind, int level) const
  {
    if (level < 0 || level > max_level_)
      throw std::out_of_range("TreeMesh::level_cells: level out of range");
    if (kind == LevelKind::local_smoothing)
      return traverse([this, level](CellId id) { return cells_[id].level < level; },
                      [this, level](CellId id) { return cells_[id].level == level; });
    return traverse([this, level](CellId id) { return cells_[id].level < level; },
                    [this, level](CellId id) {
                      const Cell &c = cells_[id];
                      return c.level == level || (c.level < level && c.is_active());
                    });
  }

  std::vector<std::size_t>
  TreeMesh::cells_per_level() const
  {
    std::vector<std::size_t> counts(max_level_ + 1, 0);
    for (const Cell &c : cells_)
      ++counts[c.level];
    return counts;
  }

  std::vector<bool>
  TreeMesh::hanging_flags(std::span<const CellId> view) const
  {
    const auto        mask    = view_mask(*this, view);
    const auto        offsets = neighbor_offsets(dim_, dim_ - 1);
    std::vector<bool> flags(view.size(), false);
    for (std::size_t i = 0; i < view.size(); ++i)
      {
        const Cell &c = cells_[view[i]];
        for (const auto &o : offsets)
          {
            std::array<std::int64_t, 3> q{};
            for (int k = 0; k < dim_; ++k)
              q[k] = static_cast<std::int64_t>(c.coords[k]) + o[k];
            if (!inside(c.level, q))
              continue;
            const CellCoords qc{static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                                static_cast<std::uint32_t>(q[2])};
            if (find(c.level, qc))
              continue;
            if (mask[locate(c.level, qc)])
              {
                flags[i] = true;
                break;
              }
          }
      }
    return flags;
  }

  std::vector<bool>
  view_mask(const TreeMesh &mesh, std::span<const CellId> view)
  {
    std::vector<bool> mask(mesh.n_cells(), false);
    for (const CellId id : view)
      mask[id] = true;
    return mask;
  }

  TreeMesh
  refine_uniform(int n_refinements, int dim)
  {
    if (n_refinements < 0)
      throw std::invalid_argument("refine_uniform: negative refinement count");
    TreeMesh mesh(dim);
    for (int step = 0; step < n_refinements; ++step)
      {
        const auto active = mesh.active_cells();
        mesh.refine(active);
      }
    return mesh;
  }

  TreeMesh
  refine_octant(int n_refinements, int dim)
  {
    if (n_refinements < 0)
      throw std::invalid_argument("refine_octant: negative refinement count");
    TreeMesh mesh(dim);
    for (int step = 0; step < n_refinements; ++step)
      {
        std::vector<CellId> flagged;
        for (const CellId id : mesh.active_cells())
          {
            // interior meets (-1,0)^d  <=>  lower corner strictly negative
            const Point lo = mesh.lower_corner(id);
            bool        in = true;
            for (int k = 0; k < dim; ++k)
              in = in && lo[k] < 0.0;
            if (in)
              flagged.push_back(id);
          }
        mesh.refine(flagged);
        mesh.balance();
      }
    return mesh;
  }

  TreeMesh
  refine_shell(int n_refinements)
  {
    if (n_refinements < 5)
      throw std::invalid_argument("refine_shell: requires at least 5 refinements");
    TreeMesh mesh = refine_uniform(n_refinements - 3, 3);

    const std::array<std::array<double, 2>, 3> shells{{{0.0, 0.55}, {0.3, 0.43}, {0.335, 0.39}}};
    for (const auto &[r_min, r_max] : shells)
      {
        std::vector<CellId> flagged;
        for (const CellId id : mesh.active_cells())
          {
            const Point  c = mesh.center(id);
            const double r = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
            if (r >= r_min && r <= r_max)
              flagged.push_back(id);
          }
        mesh.refine(flagged);
        mesh.balance();
      }
    return mesh;
  }

  TreeMesh
  balance_2to1(TreeMesh mesh)
  {
    mesh.balance();
    return mesh;
  }

  MeshStatistics
  compute_statistics(const TreeMesh &mesh)
  {
    MeshStatistics stats;
    stats.dimension = mesh.dimension();
    stats.n_levels  = mesh.max_level() + 1;
    const auto active = mesh.active_cells();
    stats.n_active    = active.size();
    const auto flags  = mesh.hanging_flags(active);
    stats.n_active_hanging =
      static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    stats.ls_cells = mesh.cells_per_level();
    for (int l = 0; l <= mesh.max_level(); ++l)
      {
        const auto cells = mesh.level_cells(LevelKind::global_coarsening, l);
        const auto hn    = mesh.hanging_flags(cells);
        stats.gc_cells.push_back(cells.size());
        stats.gc_hanging_cells.push_back(
          static_cast<std::size_t>(std::count(hn.begin(), hn.end(), true)));
      }
    return stats;
  }

} // namespace adaptmg
