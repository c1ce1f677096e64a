#include <doctest.h>

#include "oracle.h"

#include <adaptmg/operator.h>

#include <random>

using namespace adaptmg;

namespace
{
  struct Case
  {
    std::string name;
    TreeMesh    mesh;
    int         degree;
  };

  TreeMesh
  corner_refined_2d()
  {
    TreeMesh m(2);
    m.refine(std::vector<CellId>{0});
    m.refine(std::vector<CellId>{m.cell(0).first_child});
    return m;
  }

  std::vector<Case>
  oracle_cases()
  {
    std::vector<Case> cases;
    for (int p = 1; p <= 3; ++p)
      {
        cases.push_back({"uniform2d", refine_uniform(2, 2), p});
        cases.push_back({"corner2d", corner_refined_2d(), p});
        cases.push_back({"octant2d", refine_octant(2, 2), p});
      }
    cases.push_back({"octant2d-L3", refine_octant(3, 2), 1});
    cases.push_back({"uniform3d", refine_uniform(1, 3), 1});
    cases.push_back({"uniform3d", refine_uniform(1, 3), 2});
    cases.push_back({"octant3d", refine_octant(1, 3), 2});
    cases.push_back({"octant3d", refine_octant(2, 3), 1});
    return cases;
  }

  Eigen::VectorXd
  random_vector(std::size_t n, std::mt19937 &rng)
  {
    std::uniform_real_distribution<double> dist(-1, 1);
    Eigen::VectorXd                        v(n);
    for (auto &x : v)
      x = dist(rng);
    return v;
  }

  Eigen::VectorXd
  apply(const LaplaceOperator<double> &op, const Eigen::VectorXd &x)
  {
    Eigen::VectorXd y(x.size());
    op.vmult(std::span<double>(y.data(), y.size()), std::span<const double>(x.data(), x.size()));
    return y;
  }
} // namespace

TEST_CASE("bilinear element matrix of the root cell")
{
  TreeMesh   m(2);
  const auto dofs = distribute_dofs(m, m.active_cells(), 1);
  LaplaceOperator<double> op(m, dofs, ConstraintSet(dofs.n_dofs()));
  Eigen::MatrixXd expected(4, 4);
  expected << 4, -1, -1, -2, -1, 4, -2, -1, -1, -2, 4, -1, -2, -1, -1, 4;
  expected /= 6.0;
  const auto A = op.assemble_matrix();
  CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((op.reference_element_matrix() - expected).cwiseAbs().maxCoeff() < 1e-14);
  for (int j = 0; j < 4; ++j)
    CHECK(oracle::rel_error(apply(op, Eigen::VectorXd::Unit(4, j)), expected.col(j)) < 1e-14);
}

TEST_CASE("reference element matrix matches the Kronecker oracle")
{
  for (int dim = 2; dim <= 3; ++dim)
    for (int p = 1; p <= 4; ++p)
      {
        TreeMesh                m(dim);
        const auto              dofs = distribute_dofs(m, m.active_cells(), p);
        LaplaceOperator<double> op(m, dofs, ConstraintSet(dofs.n_dofs()));
        const auto              K = oracle::element_stiffness(dim, p);
        CHECK((op.reference_element_matrix() - K).cwiseAbs().maxCoeff() <
              1e-12 * K.cwiseAbs().maxCoeff());
      }
}

TEST_CASE("matrix-free apply matches the dense condensed matrix")
{
  std::mt19937 rng(42);
  int          n_meshes = 0;
  for (auto &c : oracle_cases())
    {
      CAPTURE(c.name);
      CAPTURE(c.degree);
      const auto dofs = distribute_dofs(c.mesh, c.mesh.active_cells(), c.degree);
      REQUIRE(dofs.n_dofs() <= 500);
      const auto cons = build_level_constraints(c.mesh, dofs);
      LaplaceOperator<double> op(c.mesh, dofs, cons);
      const auto              A = oracle::condensed_matrix(c.mesh, dofs, cons);

      const auto assembled = op.assemble_matrix();
      CHECK((assembled - A).cwiseAbs().maxCoeff() <= 1e-12 * A.cwiseAbs().maxCoeff());
      CHECK((assembled - assembled.transpose()).cwiseAbs().maxCoeff() < 1e-13);

      for (int t = 0; t < 20; ++t)
        {
          const auto x = random_vector(dofs.n_dofs(), rng);
          CHECK(oracle::rel_error(apply(op, x), A * x) <= 1e-12);
        }

      const auto diag = op.compute_diagonal();
      double     err = 0;
      for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
        err = std::max(err, std::abs(diag[i] - A(i, i)) / std::abs(A(i, i)));
      CHECK(err <= 1e-12);
      ++n_meshes;
    }
  CHECK(n_meshes >= 10);
}

TEST_CASE("symmetry and semi-definiteness")
{
  std::mt19937 rng(3);
  const auto   m    = refine_octant(2, 3);
  const auto   dofs = distribute_dofs(m, m.active_cells(), 2);
  const auto   cons = build_level_constraints(m, dofs);
  LaplaceOperator<double> op(m, dofs, cons);
  for (int t = 0; t < 10; ++t)
    {
      auto x = random_vector(dofs.n_dofs(), rng);
      auto y = random_vector(dofs.n_dofs(), rng);
      for (auto i : cons.constrained_indices())
        x[i] = y[i] = 0;
      CHECK(std::abs(apply(op, x).dot(y) - x.dot(apply(op, y))) <= 1e-12 * x.norm() * y.norm());
      CHECK(apply(op, x).dot(x) >= -1e-12 * x.squaredNorm());
    }
}

TEST_CASE("constants are in the kernel without dirichlet data")
{
  const auto m    = refine_octant(2, 3);
  const auto dofs = distribute_dofs(m, m.active_cells(), 3);
  const auto hn   = build_hanging_node_constraints(m, dofs);
  LaplaceOperator<double> op(m, dofs, hn);
  const auto y = apply(op, Eigen::VectorXd::Ones(dofs.n_dofs()));
  for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
    if (!hn.is_constrained(i))
      CHECK(std::abs(y[i]) < 1e-12);
  CHECK(apply(op, Eigen::VectorXd::Zero(dofs.n_dofs())).norm() == 0.0);
}

TEST_CASE("single precision operator")
{
  std::mt19937 rng(5);
  const auto   m    = refine_octant(2, 3);
  const auto   dofs = distribute_dofs(m, m.active_cells(), 2);
  const auto   cons = build_level_constraints(m, dofs);
  LaplaceOperator<float> op(m, dofs, cons);
  const auto             A = oracle::condensed_matrix(m, dofs, cons);
  const auto             x = random_vector(dofs.n_dofs(), rng);
  std::vector<float>     xf(x.data(), x.data() + x.size());
  const auto             yf = op.apply(xf);
  Eigen::VectorXd        y(yf.size());
  for (std::size_t i = 0; i < yf.size(); ++i)
    y[i] = yf[i];
  CHECK(oracle::rel_error(y, A * x) <= 1e-5);
}

TEST_CASE("lifting of inhomogeneous constraints")
{
  const auto m    = corner_refined_2d();
  const auto dofs = distribute_dofs(m, m.active_cells(), 2);
  const auto g    = [](const Point &x) { return 1.0 + x[0] * x[0] - 0.5 * x[1]; };
  const auto cons =
    ConstraintSet::merge(build_hanging_node_constraints(m, dofs), build_dirichlet_constraints(dofs, g));
  LaplaceOperator<double> op(m, dofs, cons);

  // u_g: constrained entries hold their inhomogeneity, the rest zero
  Eigen::VectorXd ug = Eigen::VectorXd::Zero(dofs.n_dofs());
  for (auto i : cons.constrained_indices())
    ug[i] = cons.inhomogeneity(i);
  const Eigen::VectorXd expected =
    -oracle::constraint_matrix(cons).transpose() * oracle::raw_matrix(m, dofs) * ug;

  std::vector<double> dst(dofs.n_dofs(), 0.0);
  op.subtract_inhomogeneities(dst);
  for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
    if (!cons.is_constrained(i))
      CHECK(dst[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    else
      CHECK(dst[i] == 0.0);
}

TEST_CASE("size mismatch is rejected")
{
  TreeMesh                m(2);
  const auto              dofs = distribute_dofs(m, m.active_cells(), 1);
  LaplaceOperator<double> op(m, dofs, ConstraintSet(dofs.n_dofs()));
  std::vector<double>     x(3), y(4);
  CHECK_THROWS_AS(op.vmult(y, x), std::invalid_argument);
}

TEST_CASE("refinement edge classification")
{
  const auto m = refine_octant(2, 2);
  // level 2 of the octant analog covers only the lower-left quadrant
  const auto cells = m.level_cells(LevelKind::local_smoothing, 2);
  const auto dofs  = distribute_dofs(m, cells, 1);
  const auto edge  = classify_edge_dofs(m, dofs);
  // interface x = 0 or y = 0 inside the quadrant, excluding the boundary
  std::size_t expected = 0;
  for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
    {
      const auto &s  = dofs.support_point(i);
      const bool  on = (std::abs(s[0]) < 1e-12 || std::abs(s[1]) < 1e-12) && !dofs.at_boundary(i);
      CHECK(edge.is_edge[i] == on);
      expected += on;
    }
  CHECK(edge.edge_dofs.size() == expected);
  CHECK(expected == 3);

  const auto u  = refine_uniform(2, 3);
  const auto ud = distribute_dofs(u, u.level_cells(LevelKind::local_smoothing, 1), 2);
  CHECK(classify_edge_dofs(u, ud).empty());
}

TEST_CASE("edge coupling blocks match the assembled level matrix")
{
  std::mt19937 rng(11);
  for (const auto &[mesh, p] : {std::pair{refine_octant(2, 2), 2}, std::pair{refine_octant(3, 2), 1},
                                std::pair{refine_octant(2, 3), 1}, std::pair{refine_octant(2, 3), 2}})
    for (int level = 1; level <= mesh.max_level(); ++level)
      {
        const auto cells = mesh.level_cells(LevelKind::local_smoothing, level);
        const auto dofs  = distribute_dofs(mesh, cells, p);
        const auto edge  = classify_edge_dofs(mesh, dofs);
        const auto bc    = build_dirichlet_constraints(dofs, [](const Point &) { return 0.0; });
        const auto A     = oracle::condensed_matrix(mesh, dofs, bc);
        EdgeCoupling<double> coupling(mesh, dofs, bc, edge);

        const auto x  = random_vector(dofs.n_dofs(), rng);
        const auto es = coupling.apply(EdgeCoupling<double>::Block::ES, {x.data(), std::size_t(x.size())});
        const auto se = coupling.apply(EdgeCoupling<double>::Block::SE, {x.data(), std::size_t(x.size())});

        Eigen::VectorXd xs = x, xe = x;
        for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
          {
            if (edge.is_edge[i] || bc.is_constrained(i))
              xs[i] = 0;
            if (!edge.is_edge[i])
              xe[i] = 0;
          }
        const Eigen::VectorXd Axs = A * xs, Axe = A * xe;
        Eigen::VectorXd       es_ref = Eigen::VectorXd::Zero(x.size()), se_ref = es_ref;
        for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
          {
            if (edge.is_edge[i])
              es_ref[i] = -Axs[i];
            else if (!bc.is_constrained(i))
              se_ref[i] = Axe[i];
          }
        CHECK(oracle::rel_error(Eigen::Map<const Eigen::VectorXd>(es.data(), es.size()), es_ref) <= 1e-12);
        CHECK(oracle::rel_error(Eigen::Map<const Eigen::VectorXd>(se.data(), se.size()), se_ref) <= 1e-12);

        // A_SS: the level matrix with edge rows and columns replaced by identity
        const auto           ss_cons = build_edge_constraints(dofs, edge);
        LaplaceOperator<double> ss(mesh, dofs, ss_cons);
        Eigen::MatrixXd      Ass = A;
        for (auto i : edge.edge_dofs)
          {
            Ass.row(i).setZero();
            Ass.col(i).setZero();
            Ass(i, i) = 1;
          }
        CHECK((ss.assemble_matrix() - Ass).cwiseAbs().maxCoeff() <= 1e-12 * A.cwiseAbs().maxCoeff());
      }
}
