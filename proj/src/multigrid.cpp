#include <adaptmg/multigrid.h>

#include <cmath>
#include <random>

namespace adaptmg
{
  const char *
  to_string(Variant v)
  {
    switch (v)
      {
        case Variant::local_smoothing:
          return "LS";
        case Variant::global_coarsening:
          return "GC";
        case Variant::polynomial:
          return "PC";
      }
    return "?";
  }

  Variant
  parse_variant(const std::string &name)
  {
    if (name == "LS" || name == "ls")
      return Variant::local_smoothing;
    if (name == "GC" || name == "gc")
      return Variant::global_coarsening;
    if (name == "PC" || name == "pc")
      return Variant::polynomial;
    throw std::invalid_argument("unknown multigrid variant '" + name + "'");
  }

  // ----------------------------------------------------------- eigenvalues

  template <typename Number>
  double
  estimate_eigenvalues(const LaplaceOperator<Number> &op, std::span<const Number> inv_diag,
                       int iterations, std::uint32_t seed)
  {
    const std::size_t                      n = op.n_dofs();
    std::mt19937                           rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Number>                    v(n), Av(n);
    for (std::size_t i = 0; i < n; ++i)
      {
        const double r = dist(rng);
        v[i]           = inv_diag[i] != Number(0) ? static_cast<Number>(r) : Number(0);
      }

    double lambda = 0;
    for (int it = 0; it <= iterations; ++it)
      {
        op.vmult(Av, v);
        double vAv = 0, vDv = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (inv_diag[i] != Number(0))
            {
              vAv += double(v[i]) * double(Av[i]);
              vDv += double(v[i]) * double(v[i]) / double(inv_diag[i]);
            }
        if (vDv == 0)
          return 1.0;
        lambda = vAv / vDv;
        if (it == iterations)
          break;
        double norm = 0;
        for (std::size_t i = 0; i < n; ++i)
          {
            v[i] = inv_diag[i] * Av[i];
            norm += double(v[i]) * double(v[i]);
          }
        norm = std::sqrt(norm);
        if (norm == 0)
          return lambda;
        for (auto &x : v)
          x = static_cast<Number>(x / norm);
      }
    return lambda;
  }

  // ---------------------------------------------------------- coarse solve

  template <typename Number>
  CoarseSolver::CoarseSolver(const LaplaceOperator<Number> &op)
    : n_(op.n_dofs())
    , lu_(op.assemble_matrix())
  {}

  template <typename Number>
  void
  CoarseSolver::solve(std::span<Number> x, std::span<const Number> b) const
  {
    Eigen::VectorXd rhs(n_);
    for (std::size_t i = 0; i < n_; ++i)
      rhs[i] = b[i];
    const Eigen::VectorXd sol = lu_.solve(rhs);
    for (std::size_t i = 0; i < n_; ++i)
      x[i] = static_cast<Number>(sol[i]);
  }

  // ------------------------------------------------------------- building

  namespace
  {
    template <typename Number>
    void
    setup_smoother(MGLevel<Number> &level, const MultigridConfig &config)
    {
      level.inv_diag = level.op.compute_diagonal();
      for (std::size_t i = 0; i < level.inv_diag.size(); ++i)
        level.inv_diag[i] = level.constraints.is_constrained(i) ? Number(0) : Number(1) / level.inv_diag[i];
      level.lambda_max =
        estimate_eigenvalues(level.op, std::span<const Number>(level.inv_diag),
                             config.eigenvalue_iterations, config.seed);
      const auto n = level.dofs.n_dofs();
      level.b.assign(n, Number(0));
      level.x.assign(n, Number(0));
      level.r.assign(n, Number(0));
    }

    ConstraintSet
    zero_dirichlet(const DofMap &dofs)
    {
      return build_dirichlet_constraints(dofs, [](const Point &) { return 0.0; });
    }

    std::vector<int>
    degree_chain(int p)
    {
      std::vector<int> chain{p};
      while (chain.back() > 1)
        chain.push_back(chain.back() / 2);
      return {chain.rbegin(), chain.rend()};
    }
  } // namespace

  template <typename Number>
  Hierarchy<Number>
  build_hierarchy(const TreeMesh &mesh, int degree, Variant variant, const MultigridConfig &config)
  {
    if (degree < 1)
      throw std::invalid_argument("polynomial degree must be at least 1");
    if (variant == Variant::polynomial && degree < 2)
      throw std::invalid_argument("polynomial coarsening needs p >= 2");
    if (variant == Variant::polynomial && config.pc_continuation == Variant::polynomial)
      throw std::invalid_argument("polynomial coarsening needs a geometric continuation");
    if (config.smoother_degree < 0)
      throw std::invalid_argument("smoother degree must be non-negative");

    Hierarchy<Number> h;
    h.variant_            = variant;
    h.config_             = config;
    const auto active     = mesh.active_cells();
    h.active_dofs_        = distribute_dofs(mesh, active, degree);
    h.active_constraints_ = build_level_constraints(mesh, h.active_dofs_);
    const int L           = mesh.max_level();

    if (variant == Variant::global_coarsening)
      for (int l = 0; l <= L; ++l)
        {
          auto lev         = std::make_unique<MGLevel<Number>>();
          lev->dofs        = l == L ? h.active_dofs_
                                    : distribute_dofs(mesh, mesh.level_cells(LevelKind::global_coarsening, l), degree);
          lev->constraints = l == L ? h.active_constraints_ : build_level_constraints(mesh, lev->dofs);
          lev->transfer_constraints = lev->constraints;
          lev->op                   = LaplaceOperator<Number>(mesh, lev->dofs, lev->constraints);
          if (l > 0)
            {
              const auto &coarse = *h.levels_.back();
              lev->transfer      = build_geometric_transfer<Number>(mesh, coarse.dofs, coarse.transfer_constraints,
                                                               lev->dofs, lev->transfer_constraints, false);
              lev->has_transfer  = true;
            }
          setup_smoother(*lev, config);
          h.levels_.push_back(std::move(lev));
        }
    else if (variant == Variant::local_smoothing)
      {
        h.active_indices_.resize(L + 1);
        h.copy_indices_.resize(L + 1);
        std::vector<int> copies(h.active_dofs_.n_dofs(), 0);
        for (int l = 0; l <= L; ++l)
          {
            auto lev  = std::make_unique<MGLevel<Number>>();
            lev->dofs = distribute_dofs(mesh, mesh.level_cells(LevelKind::local_smoothing, l), degree);
            lev->edge = classify_edge_dofs(mesh, lev->dofs);
            if (l == 0 && !lev->edge.empty())
              throw std::logic_error("coarsest local smoothing level does not cover the domain");
            lev->transfer_constraints = zero_dirichlet(lev->dofs);
            lev->constraints          = build_edge_constraints(lev->dofs, lev->edge);
            lev->op                   = LaplaceOperator<Number>(mesh, lev->dofs, lev->constraints);
            lev->coupling = EdgeCoupling<Number>(mesh, lev->dofs, lev->transfer_constraints, lev->edge);
            if (l > 0)
              {
                const auto &coarse = *h.levels_.back();
                lev->transfer = build_geometric_transfer<Number>(mesh, coarse.dofs, coarse.transfer_constraints,
                                                                 lev->dofs, lev->transfer_constraints, true);
                lev->has_transfer = true;
              }
            setup_smoother(*lev, config);

            // level DoFs of active cells on this level
            std::vector<bool> seen(lev->dofs.n_dofs(), false);
            for (std::size_t pos = 0; pos < lev->dofs.n_cells(); ++pos)
              {
                const CellId id = lev->dofs.cells()[pos];
                if (!mesh.cell(id).is_active())
                  continue;
                const auto level_local  = lev->dofs.cell_dofs(pos);
                const auto active_local = h.active_dofs_.cell_dofs(h.active_dofs_.position(id));
                for (std::size_t a = 0; a < level_local.size(); ++a)
                  {
                    const auto i = level_local[a], j = active_local[a];
                    if (seen[i])
                      continue;
                    seen[i] = true;
                    h.active_indices_[l].push_back({i, j});
                    if (!lev->edge.is_edge[i] && !h.active_constraints_.is_constrained(j))
                      {
                        h.copy_indices_[l].push_back({i, j});
                        ++copies[j];
                      }
                  }
              }
            h.levels_.push_back(std::move(lev));
          }
        for (std::size_t j = 0; j < copies.size(); ++j)
          if (copies[j] != (h.active_constraints_.is_constrained(j) ? 0 : 1))
            throw std::logic_error("active DoF not owned by exactly one local smoothing level");
      }
    else
      {
        const auto chain = degree_chain(degree);
        for (std::size_t l = 0; l < chain.size(); ++l)
          {
            auto lev  = std::make_unique<MGLevel<Number>>();
            const bool top = l + 1 == chain.size();
            lev->dofs        = top ? h.active_dofs_ : distribute_dofs(mesh, active, chain[l]);
            lev->constraints = top ? h.active_constraints_ : build_level_constraints(mesh, lev->dofs);
            lev->transfer_constraints = lev->constraints;
            lev->op                   = LaplaceOperator<Number>(mesh, lev->dofs, lev->constraints);
            if (l > 0)
              {
                const auto &coarse = *h.levels_.back();
                lev->transfer = build_polynomial_transfer<Number>(coarse.dofs, coarse.transfer_constraints,
                                                                  lev->dofs, lev->transfer_constraints);
                lev->has_transfer = true;
              }
            setup_smoother(*lev, config);
            h.levels_.push_back(std::move(lev));
          }
        h.nested_ = std::make_shared<Hierarchy<Number>>(
          build_hierarchy<Number>(mesh, 1, config.pc_continuation, config));
      }

    if (!h.nested_)
      h.coarse_ = CoarseSolver(h.levels_.front()->op);
    return h;
  }

  // ------------------------------------------------------------- V-cycle

  template <typename Number>
  std::vector<int>
  Hierarchy<Number>::degrees() const
  {
    std::vector<int> d;
    for (const auto &l : levels_)
      d.push_back(l->dofs.degree());
    return d;
  }

  template <typename Number>
  void
  Hierarchy<Number>::copy_to_mg(std::span<const Number> b) const
  {
    if (b.size() != active_dofs_.n_dofs())
      throw std::invalid_argument("vector size does not match the active DoFs");
    for (const auto &l : levels_)
      std::fill(l->b.begin(), l->b.end(), Number(0));
    if (variant_ == Variant::local_smoothing)
      {
        for (std::size_t l = 0; l < levels_.size(); ++l)
          for (const auto &[i, j] : copy_indices_[l])
            levels_[l]->b[i] = b[j];
        return;
      }
    auto &top = levels_.back()->b;
    for (std::size_t i = 0; i < top.size(); ++i)
      top[i] = active_constraints_.is_constrained(i) ? Number(0) : b[i];
  }

  template <typename Number>
  void
  Hierarchy<Number>::copy_from_mg(std::span<Number> x) const
  {
    if (x.size() != active_dofs_.n_dofs())
      throw std::invalid_argument("vector size does not match the active DoFs");
    if (variant_ == Variant::local_smoothing)
      {
        std::fill(x.begin(), x.end(), Number(0));
        for (std::size_t l = 0; l < levels_.size(); ++l)
          for (const auto &[i, j] : copy_indices_[l])
            x[j] = levels_[l]->x[i];
        return;
      }
    const auto &top = levels_.back()->x;
    for (std::size_t i = 0; i < top.size(); ++i)
      x[i] = active_constraints_.is_constrained(i) ? Number(0) : top[i];
  }

  template <typename Number>
  std::vector<std::vector<Number>>
  Hierarchy<Number>::interpolate_to_mg(std::span<const Number> field) const
  {
    if (field.size() != active_dofs_.n_dofs())
      throw std::invalid_argument("vector size does not match the active DoFs");
    std::vector<std::vector<Number>> result(levels_.size());
    for (std::size_t l = 0; l < levels_.size(); ++l)
      result[l].assign(levels_[l]->dofs.n_dofs(), Number(0));
    if (variant_ != Variant::local_smoothing)
      result.back().assign(field.begin(), field.end());
    for (std::size_t l = levels_.size(); l-- > 0;)
      {
        if (variant_ == Variant::local_smoothing)
          for (const auto &[i, j] : active_indices_[l])
            result[l][i] = field[j];
        if (l > 0)
          levels_[l]->transfer.interpolate(result[l - 1], result[l]);
      }
    return result;
  }

  template <typename Number>
  void
  Hierarchy<Number>::level_cycle(std::size_t l) const
  {
    auto &lev = *levels_[l];
    if (l == 0)
      {
        for (std::size_t i = 0; i < lev.b.size(); ++i)
          if (lev.constraints.is_constrained(i))
            lev.b[i] = Number(0);
        if (nested_)
          nested_->vcycle(lev.x, lev.b);
        else
          coarse_.solve(std::span<Number>(lev.x), std::span<const Number>(lev.b));
        return;
      }

    const int    k  = config_.smoother_degree;
    const double lo = config_.smoothing_range_low * lev.lambda_max;
    const double hi = config_.smoothing_range_high * lev.lambda_max;
    const bool   ls = variant_ == Variant::local_smoothing && !lev.edge.empty();

    // presmoothing from zero
    std::fill(lev.x.begin(), lev.x.end(), Number(0));
    chebyshev_smooth<Number>(lev.op, lev.inv_diag, lev.x, lev.b, k, lo, hi, true);

    // residual, with -A_ES x_S on the refinement edge
    lev.op.vmult(lev.r, lev.x);
    for (std::size_t i = 0; i < lev.r.size(); ++i)
      lev.r[i] = lev.b[i] - lev.r[i];
    if (ls)
      {
        const auto es = lev.coupling.apply(EdgeCoupling<Number>::Block::ES, lev.x);
        for (auto i : lev.edge.edge_dofs)
          lev.r[i] = es[i];
      }
    lev.transfer.restrict_and_add(levels_[l - 1]->b, lev.r);

    level_cycle(l - 1);

    lev.transfer.prolongate_and_add(lev.x, levels_[l - 1]->x);
    if (ls)
      {
        const auto se = lev.coupling.apply(EdgeCoupling<Number>::Block::SE, lev.x);
        for (std::size_t i = 0; i < se.size(); ++i)
          lev.b[i] -= se[i];
      }
    chebyshev_smooth<Number>(lev.op, lev.inv_diag, lev.x, lev.b, k, lo, hi, false);
  }

  template <typename Number>
  void
  Hierarchy<Number>::vcycle(std::span<Number> x, std::span<const Number> b) const
  {
    copy_to_mg(b);
    level_cycle(levels_.size() - 1);
    copy_from_mg(x);
  }

  // ------------------------------------------------------------------ CG

  SolverResult
  pcg_solve(const LaplaceOperator<double> &A, std::span<const double> b,
            const Preconditioner &preconditioner, double rtol, int max_iterations)
  {
    const std::size_t n = A.n_dofs();
    if (b.size() != n)
      throw std::invalid_argument("right-hand side size does not match the operator");

    auto dot = [](const std::vector<double> &u, const std::vector<double> &v) {
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i)
        s += u[i] * v[i];
      return s;
    };

    SolverResult        res;
    std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
    res.x.assign(n, 0.0);
    res.initial_residual = std::sqrt(dot(r, r));
    res.final_residual   = res.initial_residual;
    if (res.initial_residual == 0)
      return res;

    double rho_old = 0;
    for (int it = 1; it <= max_iterations; ++it)
      {
        preconditioner(z, r);
        const double rho = dot(r, z);
        if (it == 1)
          p = z;
        else
          {
            const double beta = rho / rho_old;
            for (std::size_t i = 0; i < n; ++i)
              p[i] = z[i] + beta * p[i];
          }
        A.vmult(q, p);
        const double alpha = rho / dot(p, q);
        for (std::size_t i = 0; i < n; ++i)
          {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
          }
        rho_old            = rho;
        res.iterations     = it;
        res.final_residual = std::sqrt(dot(r, r));
        if (res.final_residual <= rtol * res.initial_residual)
          return res;
        if (!std::isfinite(res.final_residual))
          break;
      }
    throw DivergenceError("conjugate gradient did not converge within " +
                          std::to_string(max_iterations) + " iterations");
  }

  template <typename Number>
  Preconditioner
  make_preconditioner(const Hierarchy<Number> &h)
  {
    return [&h](std::span<double> x, std::span<const double> b) {
      std::vector<Number> bn(b.begin(), b.end()), xn(b.size());
      h.vcycle(xn, bn);
      std::copy(xn.begin(), xn.end(), x.begin());
    };
  }

  template double
  estimate_eigenvalues<float>(const LaplaceOperator<float> &, std::span<const float>, int, std::uint32_t);
  template double
  estimate_eigenvalues<double>(const LaplaceOperator<double> &, std::span<const double>, int, std::uint32_t);
  template CoarseSolver::CoarseSolver(const LaplaceOperator<float> &);
  template CoarseSolver::CoarseSolver(const LaplaceOperator<double> &);
  template void
  CoarseSolver::solve<float>(std::span<float>, std::span<const float>) const;
  template void
  CoarseSolver::solve<double>(std::span<double>, std::span<const double>) const;
  template class Hierarchy<float>;
  template class Hierarchy<double>;
  template Hierarchy<float>
  build_hierarchy<float>(const TreeMesh &, int, Variant, const MultigridConfig &);
  template Hierarchy<double>
  build_hierarchy<double>(const TreeMesh &, int, Variant, const MultigridConfig &);
  template Preconditioner
  make_preconditioner<float>(const Hierarchy<float> &);
  template Preconditioner
  make_preconditioner<double>(const Hierarchy<double> &);

} // namespace adaptmg
