#include <doctest.h>

#include "common.h"

#include <adaptmg/fem.h>

#include <algorithm>
#include <cmath>
#include <map>

using namespace adaptmg;

namespace
{
  // first DoF at x; with `skip`, ignore indices constrained by it (nodes on
  // the fine side of an interface share their location with coarse nodes)
  std::size_t
  find_dof(const DofMap &dofs, const Point &x, const ConstraintSet *skip = nullptr)
  {
    for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
      {
        const auto &s = dofs.support_point(i);
        if (std::abs(s[0] - x[0]) + std::abs(s[1] - x[1]) + std::abs(s[2] - x[2]) < 1e-12 &&
            !(skip && skip->is_constrained(i)))
          return i;
      }
    return dofs.n_dofs();
  }

  // 2D: root refined, lower-left child refined again
  TreeMesh
  l_shaped_refinement()
  {
    TreeMesh m(2);
    m.refine(std::vector<CellId>{0});
    m.refine(std::vector<CellId>{m.cell(0).first_child});
    return m;
  }
} // namespace

TEST_CASE("gauss-legendre exactness")
{
  for (int n = 1; n <= 6; ++n)
    {
      const auto q = gauss_legendre(n);
      double     sum = 0;
      for (auto w : q.weights)
        sum += w;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
      for (int k = 0; k <= 2 * n - 1; ++k)
        {
          double integral = 0;
          for (std::size_t i = 0; i < q.size(); ++i)
            integral += q.weights[i] * std::pow(q.points[i], k);
          CHECK(integral == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("lagrange element")
{
  for (int p = 1; p <= 4; ++p)
    {
      LagrangeElement fe(2, p);
      const auto      nodes = fe.basis().nodes();
      CHECK(nodes.front() == 0.0);
      CHECK(nodes.back() == 1.0);
      for (std::size_t i = 0; i < nodes.size(); ++i)
        for (std::size_t j = 0; j < nodes.size(); ++j)
          CHECK(fe.basis().value(i, nodes[j]) == doctest::Approx(i == j ? 1.0 : 0.0));
      for (double x : {0.1, 0.37, 0.9})
        {
          double s = 0;
          for (int i = 0; i < fe.dofs_per_cell(); ++i)
            s += fe.shape_value(i, Point{x, 1 - x, 0});
          CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
  // degree 2 uses the midpoint
  CHECK(LagrangeElement(3, 2).basis().nodes()[1] == doctest::Approx(0.5));
}

TEST_CASE("single cell dofs")
{
  TreeMesh m(3);
  const auto dofs = distribute_dofs(m, m.active_cells(), 1);
  CHECK(dofs.n_dofs() == 8);
  CHECK(build_hanging_node_constraints(m, dofs).n_constraints() == 0);
}

TEST_CASE("dof counts of the octant and shell meshes")
{
  struct Row
  {
    int    L;
    double p1, p4;
  };
  for (const Row r : {Row{3, 2.2e2, 9.3e3}, Row{4, 1.0e3, 5.1e4}, Row{5, 5.7e3, 3.2e5}})
    {
      CAPTURE(r.L);
      const auto m = refine_octant(r.L, 3);
      CHECK(testing::same_two_digits(distribute_dofs(m, m.active_cells(), 1).n_dofs(), r.p1));
      CHECK(testing::same_two_digits(distribute_dofs(m, m.active_cells(), 4).n_dofs(), r.p4));
    }
  const auto shell = refine_shell(5);
  CHECK(testing::same_two_digits(distribute_dofs(shell, shell.active_cells(), 1).n_dofs(), 2.0e3));
  CHECK(testing::same_two_digits(distribute_dofs(shell, shell.active_cells(), 4).n_dofs(), 9.3e4));
}

TEST_CASE("dof count does not depend on traversal order")
{
  const auto m    = refine_octant(3, 3);
  auto       view = m.active_cells();
  const auto a    = distribute_dofs(m, view, 2).n_dofs();
  std::reverse(view.begin(), view.end());
  CHECK(distribute_dofs(m, view, 2).n_dofs() == a);
}

TEST_CASE("hanging midpoint in 2D, p = 1")
{
  const auto m    = l_shaped_refinement();
  const auto dofs = distribute_dofs(m, m.active_cells(), 1);
  const auto hn   = build_hanging_node_constraints(m, dofs);
  const auto mid  = find_dof(dofs, {0.0, -0.5, 0.0});
  REQUIRE(mid < dofs.n_dofs());
  REQUIRE(hn.is_constrained(mid));
  const auto a = find_dof(dofs, {0.0, -1.0, 0.0});
  const auto b = find_dof(dofs, {0.0, 0.0, 0.0});
  std::map<std::uint32_t, double> line;
  for (const auto &e : hn.entries(mid))
    line[e.index] = e.coefficient;
  CHECK(line.size() == 2);
  CHECK(line[a] == doctest::Approx(0.5));
  CHECK(line[b] == doctest::Approx(0.5));
  CHECK(hn.n_constraints() == 2);
}

TEST_CASE("hanging edge in 2D, p = 2")
{
  const auto m    = l_shaped_refinement();
  const auto dofs = distribute_dofs(m, m.active_cells(), 2);
  const auto hn   = build_hanging_node_constraints(m, dofs);
  CHECK(hn.is_closed());
  // quadratic basis on {0, 1/2, 1} evaluated at 1/4
  const double expected[3] = {0.375, 0.75, -0.125};
  // fine node at y = -0.75 on the edge x = 0 (edge spans y in [-1, 0])
  const auto i = find_dof(dofs, {0.0, -0.75, 0.0});
  REQUIRE(hn.is_constrained(i));
  std::map<std::uint32_t, double> line;
  double                          sum = 0;
  for (const auto &e : hn.entries(i))
    {
      line[e.index] = e.coefficient;
      sum += e.coefficient;
    }
  CHECK(sum == doctest::Approx(1.0));
  CHECK(line[find_dof(dofs, {0.0, -1.0, 0.0})] == doctest::Approx(expected[0]));
  CHECK(line[find_dof(dofs, {0.0, -0.5, 0.0}, &hn)] == doctest::Approx(expected[1]));
  CHECK(line[find_dof(dofs, {0.0, 0.0, 0.0})] == doctest::Approx(expected[2]));
}

TEST_CASE("hanging constraints on the octant mesh")
{
  const auto m = refine_octant(3, 3);
  for (int p = 1; p <= 3; ++p)
    {
      const auto dofs = distribute_dofs(m, m.active_cells(), p);
      const auto hn   = build_hanging_node_constraints(m, dofs);
      CHECK(hn.is_closed());
      CHECK(hn.n_constraints() > 0);
      for (auto i : hn.constrained_indices())
        {
          double sum = 0;
          for (const auto &e : hn.entries(i))
            sum += e.coefficient;
          CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
          CHECK(hn.inhomogeneity(i) == 0.0);
        }
      std::vector<double> x(dofs.n_dofs(), 3.5);
      for (auto i : hn.constrained_indices())
        x[i] = 0;
      hn.distribute(x);
      for (auto v : x)
        CHECK(v == doctest::Approx(3.5));
    }
  const auto uniform = refine_uniform(2, 3);
  const auto udofs   = distribute_dofs(uniform, uniform.active_cells(), 2);
  CHECK(build_hanging_node_constraints(uniform, udofs).n_constraints() == 0);
}

TEST_CASE("non one-irregular meshes are rejected")
{
  TreeMesh m(2);
  m.refine(std::vector<CellId>{0});
  const CellId c = m.cell(0).first_child;
  m.refine(std::vector<CellId>{c});
  m.refine(std::vector<CellId>{m.cell(c).first_child + 3});
  const auto dofs = distribute_dofs(m, m.active_cells(), 1);
  CHECK_THROWS(build_hanging_node_constraints(m, dofs));
}

TEST_CASE("dirichlet constraints")
{
  TreeMesh   m(2);
  const auto dofs = distribute_dofs(m, m.active_cells(), 1);
  const auto bc   = build_dirichlet_constraints(dofs, [](const Point &x) { return x[0]; });
  CHECK(bc.n_constraints() == 4);
  const double expected[4] = {-1, 1, -1, 1};
  for (int i = 0; i < 4; ++i)
    {
      CHECK(bc.entries(dofs.cell_dofs(0)[i]).empty());
      CHECK(bc.inhomogeneity(dofs.cell_dofs(0)[i]) == expected[i]);
    }
}

TEST_CASE("dirichlet lines win over hanging lines")
{
  const auto m    = l_shaped_refinement();
  const auto dofs = distribute_dofs(m, m.active_cells(), 1);
  const auto hn   = build_hanging_node_constraints(m, dofs);
  const auto bc   = build_dirichlet_constraints(dofs, [](const Point &x) { return 2.0 + x[1]; });
  const auto all  = ConstraintSet::merge(hn, bc);
  CHECK(all.is_closed());
  // the hanging midpoint now depends only on the inner vertex, with the
  // boundary value folded into the inhomogeneity
  const auto mid = find_dof(dofs, {0.0, -0.5, 0.0});
  CHECK(all.entries(mid).size() == 1);
  CHECK(all.inhomogeneity(mid) == doctest::Approx(0.5));
  for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
    if (dofs.at_boundary(i))
      {
        CHECK(all.entries(i).empty());
        CHECK(all.inhomogeneity(i) == doctest::Approx(2.0 + dofs.support_point(i)[1]));
      }
}
