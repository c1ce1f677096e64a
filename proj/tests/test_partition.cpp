#include <adaptmg/partition.h>

#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

using namespace adaptmg;

namespace
{
  // two coarse cells with four children each along a line
  LevelLayout
  line_layout()
  {
    LevelLayout layout;
    layout.n_active = 8;
    LevelLayout::Level coarse, fine;
    coarse.weights      = {1, 1};
    coarse.coarse       = {-1, -1};
    coarse.active_index = {-1, -1};
    coarse.adjacency_offsets = {0, 1, 2};
    coarse.adjacency         = {1, 0};
    fine.weights      = std::vector<double>(8, 1.0);
    fine.coarse       = {0, 0, 0, 0, 1, 1, 1, 1};
    fine.active_index = {0, 1, 2, 3, 4, 5, 6, 7};
    fine.adjacency_offsets = {0};
    for (int i = 0; i < 8; ++i)
      {
        if (i > 0)
          fine.adjacency.push_back(i - 1);
        if (i < 7)
          fine.adjacency.push_back(i + 1);
        fine.adjacency_offsets.push_back(static_cast<std::uint32_t>(fine.adjacency.size()));
      }
    layout.levels = {coarse, fine};
    return layout;
  }

  bool
  boxes_touch(const TreeMesh &mesh, CellId a, CellId b)
  {
    const auto   pa = mesh.lower_corner(a), pb = mesh.lower_corner(b);
    const double ha = mesh.cell_size(a), hb = mesh.cell_size(b);
    for (int k = 0; k < mesh.dimension(); ++k)
      if (pa[k] > pb[k] + hb + 1e-12 || pb[k] > pa[k] + ha + 1e-12)
        return false;
    return true;
  }
} // namespace

TEST_CASE("sfc partition: prefix splits")
{
  const std::vector<double> ones(16, 1.0);
  CHECK(partition_sfc(ones, 1) == std::vector<int>(16, 0));
  const auto four = partition_sfc(ones, 4);
  for (int r = 0; r < 4; ++r)
    CHECK(std::count(four.begin(), four.end(), r) == 4);
  CHECK(std::is_sorted(four.begin(), four.end()));

  const std::vector<double> w{2, 2, 1, 1, 1, 1, 1, 1};
  CHECK(partition_sfc(w, 2) == std::vector<int>{0, 0, 0, 1, 1, 1, 1, 1});

  // more ranks than cells: some ranks stay empty, every cell still owned
  const auto many = partition_sfc(std::vector<double>(3, 1.0), 8);
  CHECK(many.size() == 3);
  CHECK(std::set<int>(many.begin(), many.end()).size() == 3);

  CHECK_THROWS_AS(partition_sfc(ones, 0), std::invalid_argument);
  CHECK_THROWS_AS(partition_sfc(std::vector<double>{1, 0}, 2), std::invalid_argument);

  const auto mesh = refine_uniform(2, 2);
  const auto act  = partition_active_sfc(mesh, 4);
  for (int r = 0; r < 4; ++r)
    CHECK(std::count(act.begin(), act.end(), r) == 4);
}

TEST_CASE("metrics: hand-enumerated two-level line")
{
  const auto             layout = line_layout();
  const std::vector<int> fine{0, 0, 0, 0, 1, 1, 1, 1};
  const auto             model = first_child_policy(layout, fine, 2);
  CHECK(model.owners[0] == std::vector<int>{0, 1});
  CHECK(serial_workload(layout) == 10);
  CHECK(parallel_workload(layout, model) == 5);
  CHECK(workload_efficiency(layout, model) == doctest::Approx(1.0));
  CHECK(vertical_efficiency(layout, model) == doctest::Approx(1.0));
  // one ghost per rank on each level
  CHECK(horizontal_efficiency(layout, model, 0) == doctest::Approx(0.5 * 2 / 2));
  CHECK(horizontal_efficiency(layout, model, 1) == doctest::Approx(0.5 * 2 / 8));
  CHECK(horizontal_efficiency(layout, model) == doctest::Approx(0.5 * 4 / 10));

  const auto serial = first_child_policy(layout, std::vector<int>(8, 0), 1);
  CHECK(parallel_workload(layout, serial) == serial_workload(layout));
  CHECK(workload_efficiency(layout, serial) == doctest::Approx(1.0));
  CHECK(horizontal_efficiency(layout, serial) == 0.0);
  CHECK(vertical_efficiency(layout, serial) == 1.0);

  // a permuted fine partition breaks vertical locality
  const auto mixed = first_child_policy(layout, std::vector<int>{1, 0, 0, 0, 0, 1, 1, 1}, 2);
  CHECK(mixed.owners[0] == std::vector<int>{1, 0});
  CHECK(vertical_efficiency(layout, mixed) == doctest::Approx(2.0 / 8));

  CHECK_THROWS_AS(first_child_policy(layout, std::vector<int>(3, 0), 2), std::invalid_argument);
}

TEST_CASE("layout: levels match the mesh hierarchy")
{
  const auto mesh  = refine_octant(5);
  const auto stats = compute_statistics(mesh);
  const auto ls    = make_level_layout(mesh, Variant::local_smoothing);
  const auto gc    = make_level_layout(mesh, Variant::global_coarsening);
  REQUIRE(ls.n_levels() == 6);
  REQUIRE(gc.n_levels() == 6);
  for (std::size_t l = 0; l < 6; ++l)
    {
      CHECK(ls.levels[l].size() == stats.ls_cells[l]);
      CHECK(gc.levels[l].size() == stats.gc_cells[l]);
      // LS levels never carry hanging nodes inside the level
      CHECK(std::all_of(ls.levels[l].weights.begin(), ls.levels[l].weights.end(),
                        [](double w) { return w == 1.0; }));
    }
  const auto hanging =
    std::count(gc.levels[5].weights.begin(), gc.levels[5].weights.end(), 2.0);
  CHECK(static_cast<std::size_t>(hanging) == stats.n_active_hanging);
  CHECK(serial_workload(gc) >= serial_workload(ls));

  const auto pc = make_level_layout(mesh, Variant::polynomial, 4);
  CHECK(pc.n_levels() == 8);
  CHECK(pc.levels[7].size() == mesh.active_cells().size());
}

TEST_CASE("layout: vertex adjacency against box intersection")
{
  for (const auto &mesh : {refine_octant(3, 2), refine_octant(2, 3)})
    for (auto v : {Variant::local_smoothing, Variant::global_coarsening})
      {
        const auto layout = make_level_layout(mesh, v);
        for (const auto &level : layout.levels)
          for (std::size_t i = 0; i < level.size(); ++i)
            {
              std::set<std::uint32_t> expect;
              for (std::size_t j = 0; j < level.size(); ++j)
                if (j != i && boxes_touch(mesh, level.cells[i], level.cells[j]))
                  expect.insert(static_cast<std::uint32_t>(j));
              const std::set<std::uint32_t> got(level.adjacency.begin() + level.adjacency_offsets[i],
                                                level.adjacency.begin() + level.adjacency_offsets[i + 1]);
              CHECK(got == expect);
            }
      }
}

TEST_CASE("first-child policy: parents share an owner with a child")
{
  const auto mesh   = refine_octant(5);
  const auto layout = make_level_layout(mesh, Variant::local_smoothing);
  const auto model  = first_child_policy(layout, partition_active_sfc(mesh, 16), 16);
  for (std::size_t l = 1; l < layout.n_levels(); ++l)
    {
      std::vector<std::set<int>> child_owners(layout.levels[l - 1].size());
      for (std::size_t i = 0; i < layout.levels[l].size(); ++i)
        child_owners[layout.levels[l].coarse[i]].insert(model.owners[l][i]);
      for (std::size_t c = 0; c < child_owners.size(); ++c)
        if (layout.levels[l - 1].active_index[c] < 0)
          CHECK(child_owners[c].count(model.owners[l - 1][c]) == 1);
    }
}

TEST_CASE("repartition: per-level balance and uniform equivalence")
{
  const auto mesh   = refine_octant(5);
  const auto layout = make_level_layout(mesh, Variant::global_coarsening);
  for (int P : {3, 8, 16})
    {
      const auto model = repartition_levels_sfc(layout, P);
      for (std::size_t l = 0; l < layout.n_levels(); ++l)
        {
          const auto &w = layout.levels[l].weights;
          double      total = 0, wmax = 0;
          std::vector<double> owned(P, 0.0);
          for (std::size_t i = 0; i < w.size(); ++i)
            {
              total += w[i];
              wmax = std::max(wmax, w[i]);
              owned[model.owners[l][i]] += w[i];
            }
          CHECK(*std::max_element(owned.begin(), owned.end()) <= std::ceil(total / P) + wmax);
          CHECK(std::is_sorted(model.owners[l].begin(), model.owners[l].end()));
        }
    }

  const auto cube = refine_uniform(3, 3);
  const auto gc   = make_level_layout(cube, Variant::global_coarsening);
  for (int P : {1, 4, 7, 16})
    {
      const auto fc = first_child_policy(gc, partition_active_sfc(cube, P), P);
      const auto rp = repartition_levels_sfc(gc, P);
      CHECK(fc.owners == rp.owners);
    }

  const auto serial_fc = first_child_policy(layout, partition_active_sfc(mesh, 1), 1);
  CHECK(serial_fc.owners == repartition_levels_sfc(layout, 1).owners);
}

TEST_CASE("metrics: report, serialization and trends")
{
  const auto mesh = refine_octant(6);
  const auto ls   = make_level_layout(mesh, Variant::local_smoothing);
  const auto gc   = make_level_layout(mesh, Variant::global_coarsening);
  const int  P    = 16;
  const auto act  = partition_active_sfc(mesh, P);
  const auto a    = compute_metrics(ls, first_child_policy(ls, act, P));
  const auto b    = compute_metrics(gc, repartition_levels_sfc(gc, P));
  CHECK(b.workload_efficiency >= a.workload_efficiency);
  CHECK(a.workload_efficiency > 0);
  CHECK(a.workload_efficiency <= 1);
  CHECK(compute_metrics(gc, first_child_policy(gc, act, P)).vertical_efficiency >=
        b.vertical_efficiency);

  const auto one = compute_metrics(ls, first_child_policy(ls, partition_active_sfc(mesh, 1), 1));
  CHECK(one.workload_efficiency == 1.0);
  CHECK(one.vertical_efficiency == 1.0);
  CHECK(one.horizontal_efficiency == 0.0);

  // pure
  CHECK(compute_metrics(gc, repartition_levels_sfc(gc, P)).to_json() == b.to_json());

  const auto j = nlohmann::json::parse(b.to_json());
  CHECK(j["W_s"].get<std::size_t>() == b.serial_workload);
  CHECK(j["policy"] == "sfc");
  CHECK(j["levels"].size() == gc.n_levels());
  std::size_t sum = 0;
  for (const auto &l : b.levels)
    {
      CHECK(l.min <= l.max);
      CHECK(l.avg == doctest::Approx(static_cast<double>(l.cells) / P));
      sum += l.max;
    }
  CHECK(sum == b.parallel_workload);
  CHECK(MetricsReport::csv_header() == "P,policy,n_levels,W_s,W_p,wl_eff,h_eff,v_eff");
  const auto row = b.to_csv_row();
  CHECK(std::count(row.begin(), row.end(), ',') == 7);

  CHECK(parse_policy("first-child") == PartitionPolicy::first_child);
  CHECK(parse_policy("sfc") == PartitionPolicy::sfc_per_level);
  CHECK_THROWS_AS(parse_policy("round-robin"), std::invalid_argument);
}

TEST_CASE("metrics: shell local smoothing is less balanced than octant")
{
  for (int L : {5, 6})
    {
      const int  P      = 32;
      const auto octant = refine_octant(L);
      const auto shell  = refine_shell(L);
      const auto lo     = make_level_layout(octant, Variant::local_smoothing);
      const auto lsh    = make_level_layout(shell, Variant::local_smoothing);
      const auto eo = workload_efficiency(lo, first_child_policy(lo, partition_active_sfc(octant, P), P));
      const auto es = workload_efficiency(lsh, first_child_policy(lsh, partition_active_sfc(shell, P), P));
      CHECK(es < eo);
    }
}
