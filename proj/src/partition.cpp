#include <adaptmg/partition.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace adaptmg
{
  const char *
  to_string(PartitionPolicy p)
  {
    return p == PartitionPolicy::first_child ? "first-child" : "sfc";
  }

  PartitionPolicy
  parse_policy(const std::string &name)
  {
    if (name == "first-child" || name == "first_child")
      return PartitionPolicy::first_child;
    if (name == "sfc" || name == "sfc-per-level" || name == "repartition")
      return PartitionPolicy::sfc_per_level;
    throw std::invalid_argument("unknown partition policy '" + name + "'");
  }

  // --------------------------------------------------------------- layout

  namespace
  {
    std::vector<double>
    weights_of(const TreeMesh &mesh, std::span<const CellId> cells, double hanging_weight)
    {
      const auto          flags = mesh.hanging_flags(cells);
      std::vector<double> w(cells.size());
      for (std::size_t i = 0; i < cells.size(); ++i)
        w[i] = flags[i] ? hanging_weight : 1.0;
      return w;
    }

    // vertex neighbours of every cell of a view
    void
    build_adjacency(const TreeMesh &mesh, LevelLayout::Level &level)
    {
      const auto &cells = level.cells;
      const auto  mask  = view_mask(mesh, cells);
      std::vector<std::int32_t> index(mesh.n_cells(), -1);
      for (std::size_t i = 0; i < cells.size(); ++i)
        index[cells[i]] = static_cast<std::int32_t>(i);

      const int                           dim = mesh.dimension();
      std::vector<std::vector<std::uint32_t>> nb(cells.size());
      int n_offsets = 1;
      for (int k = 0; k < dim; ++k)
        n_offsets *= 3;

      for (std::size_t i = 0; i < cells.size(); ++i)
        {
          const Cell &c = mesh.cell(cells[i]);
          for (int o = 0; o < n_offsets; ++o)
            {
              std::array<std::int64_t, 3> q{0, 0, 0};
              bool                        self = true;
              for (int k = 0, r = o; k < dim; ++k, r /= 3)
                {
                  q[k] = static_cast<std::int64_t>(c.coords[k]) + r % 3 - 1;
                  self = self && r % 3 == 1;
                }
              if (self || !mesh.inside(c.level, q))
                continue;
              const CellCoords qc{static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                                  static_cast<std::uint32_t>(q[2])};
              CellId id = mesh.locate(c.level, qc);
              while (id >= 0 && !mask[id])
                id = mesh.cell(id).parent;
              if (id < 0)
                continue;
              const auto j = static_cast<std::uint32_t>(index[id]);
              nb[i].push_back(j);
              nb[j].push_back(static_cast<std::uint32_t>(i));
            }
        }

      level.adjacency_offsets.assign(1, 0);
      level.adjacency.clear();
      for (auto &list : nb)
        {
          std::sort(list.begin(), list.end());
          list.erase(std::unique(list.begin(), list.end()), list.end());
          level.adjacency.insert(level.adjacency.end(), list.begin(), list.end());
          level.adjacency_offsets.push_back(static_cast<std::uint32_t>(level.adjacency.size()));
        }
    }

    LevelLayout::Level
    make_level(const TreeMesh &mesh, std::vector<CellId> cells, double hanging_weight,
               const std::vector<std::int32_t> &active_position, const LevelLayout::Level *coarser)
    {
      LevelLayout::Level level;
      level.weights = weights_of(mesh, cells, hanging_weight);
      level.coarse.assign(cells.size(), -1);
      level.active_index.resize(cells.size());
      for (std::size_t i = 0; i < cells.size(); ++i)
        level.active_index[i] = active_position[cells[i]];
      if (coarser)
        {
          std::vector<std::int32_t> position(mesh.n_cells(), -1);
          for (std::size_t i = 0; i < coarser->cells.size(); ++i)
            position[coarser->cells[i]] = static_cast<std::int32_t>(i);
          for (std::size_t i = 0; i < cells.size(); ++i)
            {
              std::int32_t pos = position[cells[i]];
              if (pos < 0 && mesh.cell(cells[i]).parent >= 0)
                pos = position[mesh.cell(cells[i]).parent];
              if (pos < 0)
                throw std::logic_error("level cell without coarse counterpart");
              level.coarse[i] = pos;
            }
        }
      level.cells = std::move(cells);
      build_adjacency(mesh, level);
      return level;
    }
  } // namespace

  LevelLayout
  make_level_layout(const TreeMesh &mesh, Variant variant, int degree, double hanging_weight,
                    Variant pc_continuation)
  {
    if (variant == Variant::polynomial && pc_continuation == Variant::polynomial)
      throw std::invalid_argument("polynomial coarsening needs a geometric continuation");
    LevelLayout layout;
    const auto  active = mesh.active_cells();
    layout.n_active    = active.size();
    std::vector<std::int32_t> active_position(mesh.n_cells(), -1);
    for (std::size_t i = 0; i < active.size(); ++i)
      active_position[active[i]] = static_cast<std::int32_t>(i);

    const Variant geometric = variant == Variant::polynomial ? pc_continuation : variant;
    const auto    kind      = geometric == Variant::local_smoothing ? LevelKind::local_smoothing
                                                                     : LevelKind::global_coarsening;
    for (int l = 0; l <= mesh.max_level(); ++l)
      layout.levels.push_back(make_level(mesh, mesh.level_cells(kind, l), hanging_weight, active_position,
                                         l > 0 ? &layout.levels.back() : nullptr));

    if (variant == Variant::polynomial)
      for (int p = degree; p > 1; p /= 2)
        {
          // the degree levels above p = 1 repeat the active mesh; only the GC
          // top level is the active mesh itself, LS active cells sit on
          // several levels and get no vertical pairing for that step
          const bool identical = layout.levels.back().cells == active;
          auto       copy      = make_level(mesh, active, hanging_weight, active_position, nullptr);
          for (std::size_t i = 0; i < active.size(); ++i)
            copy.coarse[i] = identical ? static_cast<std::int32_t>(i) : -1;
          layout.levels.push_back(std::move(copy));
        }
    return layout;
  }

  // ------------------------------------------------------------ partition

  std::vector<int>
  partition_sfc(std::span<const double> weights, int n_ranks)
  {
    if (n_ranks < 1)
      throw std::invalid_argument("rank count must be at least 1");
    double total = 0;
    for (double w : weights)
      {
        if (!(w > 0))
          throw std::invalid_argument("cell weights must be positive");
        total += w;
      }
    std::vector<int> ranks(weights.size(), 0);
    double           prefix = 0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      {
        const auto r = static_cast<int>(std::floor(n_ranks * prefix / total + 1e-12));
        ranks[i]     = std::min(r, n_ranks - 1);
        prefix += weights[i];
      }
    return ranks;
  }

  std::vector<int>
  partition_active_sfc(const TreeMesh &mesh, int n_ranks, double hanging_weight)
  {
    const auto active = mesh.active_cells();
    const auto w      = weights_of(mesh, active, hanging_weight);
    return partition_sfc(w, n_ranks);
  }

  PartitionModel
  first_child_policy(const LevelLayout &layout, std::span<const int> active_owners, int n_ranks)
  {
    if (active_owners.size() != layout.n_active)
      throw std::invalid_argument("active partition does not match the layout");
    PartitionModel model;
    model.n_ranks = n_ranks;
    model.policy  = PartitionPolicy::first_child;
    model.owners.resize(layout.n_levels());
    for (std::size_t l = layout.n_levels(); l-- > 0;)
      {
        const auto &level = layout.levels[l];
        auto       &own   = model.owners[l];
        own.assign(level.size(), -1);
        for (std::size_t i = 0; i < level.size(); ++i)
          if (level.active_index[i] >= 0)
            own[i] = active_owners[level.active_index[i]];
        if (l + 1 < layout.n_levels())
          {
            const auto &fine = layout.levels[l + 1];
            for (std::size_t j = 0; j < fine.size(); ++j)
              {
                const auto c = fine.coarse[j];
                if (c >= 0 && own[c] < 0)
                  own[c] = model.owners[l + 1][j];
              }
          }
        for (int o : own)
          if (o < 0)
            throw std::logic_error("first-child policy left a cell without owner");
      }
    return model;
  }

  PartitionModel
  repartition_levels_sfc(const LevelLayout &layout, int n_ranks)
  {
    PartitionModel model;
    model.n_ranks = n_ranks;
    model.policy  = PartitionPolicy::sfc_per_level;
    for (const auto &level : layout.levels)
      model.owners.push_back(partition_sfc(level.weights, n_ranks));
    return model;
  }

  // -------------------------------------------------------------- metrics

  namespace
  {
    void
    check(const LevelLayout &layout, const PartitionModel &model)
    {
      if (model.owners.size() != layout.n_levels())
        throw std::invalid_argument("partition model does not match the layout");
      for (std::size_t l = 0; l < layout.n_levels(); ++l)
        if (model.owners[l].size() != layout.levels[l].size())
          throw std::invalid_argument("partition model does not match the layout");
    }

    std::vector<std::size_t>
    owned_counts(const PartitionModel &model, std::size_t l)
    {
      std::vector<std::size_t> count(model.n_ranks, 0);
      for (int o : model.owners[l])
        ++count.at(o);
      return count;
    }

    std::size_t
    ghost_count(const LevelLayout::Level &level, const std::vector<int> &owner)
    {
      // (rank, ghost cell) pairs, deduplicated per rank
      std::vector<std::pair<int, std::uint32_t>> ghosts;
      for (std::size_t i = 0; i < level.size(); ++i)
        for (auto k = level.adjacency_offsets[i]; k < level.adjacency_offsets[i + 1]; ++k)
          {
            const auto j = level.adjacency[k];
            if (owner[j] != owner[i])
              ghosts.emplace_back(owner[i], j);
          }
      std::sort(ghosts.begin(), ghosts.end());
      return static_cast<std::size_t>(std::unique(ghosts.begin(), ghosts.end()) - ghosts.begin());
    }
  } // namespace

  std::size_t
  serial_workload(const LevelLayout &layout)
  {
    std::size_t w = 0;
    for (const auto &level : layout.levels)
      w += level.size();
    return w;
  }

  std::size_t
  parallel_workload(const LevelLayout &layout, const PartitionModel &model)
  {
    check(layout, model);
    std::size_t w = 0;
    for (std::size_t l = 0; l < layout.n_levels(); ++l)
      {
        const auto c = owned_counts(model, l);
        w += *std::max_element(c.begin(), c.end());
      }
    return w;
  }

  double
  workload_efficiency(const LevelLayout &layout, const PartitionModel &model)
  {
    return static_cast<double>(serial_workload(layout)) /
           (static_cast<double>(parallel_workload(layout, model)) * model.n_ranks);
  }

  double
  horizontal_efficiency(const LevelLayout &layout, const PartitionModel &model, std::size_t level)
  {
    check(layout, model);
    const auto &lev = layout.levels.at(level);
    if (lev.size() == 0)
      return 0;
    return 0.5 * static_cast<double>(ghost_count(lev, model.owners[level])) / static_cast<double>(lev.size());
  }

  double
  horizontal_efficiency(const LevelLayout &layout, const PartitionModel &model)
  {
    check(layout, model);
    std::size_t ghosts = 0;
    for (std::size_t l = 0; l < layout.n_levels(); ++l)
      ghosts += ghost_count(layout.levels[l], model.owners[l]);
    const auto total = serial_workload(layout);
    return total == 0 ? 0.0 : 0.5 * static_cast<double>(ghosts) / static_cast<double>(total);
  }

  double
  vertical_efficiency(const LevelLayout &layout, const PartitionModel &model)
  {
    check(layout, model);
    std::size_t same = 0, total = 0;
    for (std::size_t l = 1; l < layout.n_levels(); ++l)
      {
        const auto &level = layout.levels[l];
        for (std::size_t i = 0; i < level.size(); ++i)
          {
            if (level.coarse[i] < 0)
              continue;
            ++total;
            same += model.owners[l][i] == model.owners[l - 1][level.coarse[i]];
          }
      }
    return total == 0 ? 1.0 : static_cast<double>(same) / static_cast<double>(total);
  }

  MetricsReport
  compute_metrics(const LevelLayout &layout, const PartitionModel &model)
  {
    MetricsReport r;
    r.n_ranks               = model.n_ranks;
    r.policy                = model.policy;
    r.n_levels              = layout.n_levels();
    r.serial_workload       = serial_workload(layout);
    r.parallel_workload     = parallel_workload(layout, model);
    r.workload_efficiency   = workload_efficiency(layout, model);
    r.horizontal_efficiency = horizontal_efficiency(layout, model);
    r.vertical_efficiency   = vertical_efficiency(layout, model);
    for (std::size_t l = 0; l < layout.n_levels(); ++l)
      {
        const auto c = owned_counts(model, l);
        LevelLoad  load;
        load.cells = layout.levels[l].size();
        load.min   = *std::min_element(c.begin(), c.end());
        load.max   = *std::max_element(c.begin(), c.end());
        load.avg   = static_cast<double>(load.cells) / model.n_ranks;
        r.levels.push_back(load);
      }
    return r;
  }

  std::string
  MetricsReport::to_json() const
  {
    nlohmann::ordered_json j;
    j["P"]        = n_ranks;
    j["policy"]   = to_string(policy);
    j["n_levels"] = n_levels;
    j["W_s"]      = serial_workload;
    j["W_p"]      = parallel_workload;
    j["wl_eff"]   = workload_efficiency;
    j["h_eff"]    = horizontal_efficiency;
    j["v_eff"]    = vertical_efficiency;
    auto &lv      = j["levels"] = nlohmann::ordered_json::array();
    for (const auto &l : levels)
      lv.push_back({{"cells", l.cells}, {"min", l.min}, {"max", l.max}, {"avg", l.avg}});
    return j.dump(2);
  }

  std::string
  MetricsReport::csv_header()
  {
    return "P,policy,n_levels,W_s,W_p,wl_eff,h_eff,v_eff";
  }

  std::string
  MetricsReport::to_csv_row() const
  {
    std::ostringstream s;
    s << n_ranks << ',' << to_string(policy) << ',' << n_levels << ',' << serial_workload << ','
      << parallel_workload << ',' << std::setprecision(6) << workload_efficiency << ','
      << horizontal_efficiency << ',' << vertical_efficiency;
    return s.str();
  }

} // namespace adaptmg
