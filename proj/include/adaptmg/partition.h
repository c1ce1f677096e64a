#pragma once

#include <adaptmg/mesh.h>
#include <adaptmg/multigrid.h>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace adaptmg
{
  enum class PartitionPolicy
  {
    first_child,
    sfc_per_level
  };

  const char *
  to_string(PartitionPolicy p);

  PartitionPolicy
  parse_policy(const std::string &name);

  /**
   * Cell lists of a multigrid hierarchy reduced to what the partition metrics
   * need. Level vectors are indexed by position in the level's cell list.
   */
  struct LevelLayout
  {
    struct Level
    {
      std::vector<CellId>        cells;        // tree cells (may be empty for synthetic layouts)
      std::vector<double>        weights;      // partition weights
      std::vector<std::int32_t>  coarse;       // corresponding cell on level l-1, -1 on level 0
      std::vector<std::int32_t>  active_index; // position in the active cell list or -1
      std::vector<std::uint32_t> adjacency_offsets; // CSR over vertex neighbours
      std::vector<std::uint32_t> adjacency;

      std::size_t
      size() const
      {
        return coarse.size();
      }
    };

    std::vector<Level> levels;
    std::size_t        n_active = 0;

    std::size_t
    n_levels() const
    {
      return levels.size();
    }
  };

  /// Levels of the LS, GC or PC hierarchy of `mesh`. Cells carrying hanging
  /// nodes within their level get `hanging_weight`, others 1. PC stacks one
  /// copy of the active mesh per extra degree on top of its geometric
  /// continuation.
  LevelLayout
  make_level_layout(const TreeMesh &mesh, Variant variant, int degree = 1,
                    double hanging_weight = 2.0,
                    Variant pc_continuation = Variant::global_coarsening);

  /// Owner rank per level and cell.
  struct PartitionModel
  {
    int                           n_ranks = 1;
    PartitionPolicy               policy  = PartitionPolicy::first_child;
    std::vector<std::vector<int>> owners;
  };

  /// Prefix partition along the given order: a cell whose preceding weight
  /// sum is s goes to rank floor(P s / total).
  std::vector<int>
  partition_sfc(std::span<const double> weights, int n_ranks);

  /// Weighted SFC partition of the active cells (hanging-node cells weigh
  /// `hanging_weight`).
  std::vector<int>
  partition_active_sfc(const TreeMesh &mesh, int n_ranks, double hanging_weight = 2.0);

  /// Active cells keep their owner; every other cell gets the owner of its
  /// first (lowest-positioned) fine cell, level by level from the top.
  PartitionModel
  first_child_policy(const LevelLayout &layout, std::span<const int> active_owners, int n_ranks);

  /// Independent weighted SFC partition of every level.
  PartitionModel
  repartition_levels_sfc(const LevelLayout &layout, int n_ranks);

  std::size_t
  serial_workload(const LevelLayout &layout);

  std::size_t
  parallel_workload(const LevelLayout &layout, const PartitionModel &model);

  double
  workload_efficiency(const LevelLayout &layout, const PartitionModel &model);

  /// Half the ghost cells of one level summed over ranks, over its cell count.
  double
  horizontal_efficiency(const LevelLayout &layout, const PartitionModel &model, std::size_t level);

  /// Same ratio accumulated over all levels.
  double
  horizontal_efficiency(const LevelLayout &layout, const PartitionModel &model);

  double
  vertical_efficiency(const LevelLayout &layout, const PartitionModel &model);

  struct LevelLoad
  {
    std::size_t cells = 0;
    std::size_t min   = 0;
    std::size_t max   = 0;
    double      avg   = 0;
  };

  struct MetricsReport
  {
    int                    n_ranks = 1;
    PartitionPolicy        policy  = PartitionPolicy::first_child;
    std::size_t            n_levels = 0;
    std::size_t            serial_workload   = 0;
    std::size_t            parallel_workload = 0;
    double                 workload_efficiency   = 1;
    double                 horizontal_efficiency = 0;
    double                 vertical_efficiency   = 1;
    std::vector<LevelLoad> levels;

    std::string
    to_json() const;

    static std::string
    csv_header();

    std::string
    to_csv_row() const;
  };

  MetricsReport
  compute_metrics(const LevelLayout &layout, const PartitionModel &model);

} // namespace adaptmg
