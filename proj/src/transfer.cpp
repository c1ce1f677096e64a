#include <adaptmg/tensor.h>
#include <adaptmg/transfer.h>

#include <algorithm>
#include <stdexcept>

namespace adaptmg
{
  namespace
  {
    void
    check_degrees(int p_c, int p_f)
    {
      if (p_c < 1 || p_f < 1)
        throw std::invalid_argument("polynomial degrees must be at least 1");
      if (p_c > p_f)
        throw std::invalid_argument("coarse degree exceeds fine degree: spaces are not nested");
    }

    template <typename Number>
    std::vector<Number>
    to_row_major(const Eigen::MatrixXd &m)
    {
      std::vector<Number> v(m.size());
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
          v[i * m.cols() + j] = static_cast<Number>(m(i, j));
      return v;
    }

    int
    power(int base, int e)
    {
      int r = 1;
      for (int i = 0; i < e; ++i)
        r *= base;
      return r;
    }

    template <typename Number>
    TransferScheme<Number>
    make_scheme(TransferCategory category, int p_c, int p_f)
    {
      TransferScheme<Number> s;
      s.category        = category;
      const auto refine = category == TransferCategory::refined ? Refinement::with : Refinement::without;
      s.n_coarse        = p_c + 1;
      s.n_fine          = refine == Refinement::with ? 2 * p_f + 1 : p_f + 1;
      s.prolongation    = to_row_major<Number>(prolongation_matrix_1d(p_c, p_f, refine));
      s.interpolation   = to_row_major<Number>(interpolation_matrix_1d(p_c, p_f, refine));
      return s;
    }
  } // namespace

  Eigen::MatrixXd
  prolongation_matrix_1d(int p_c, int p_f, Refinement refinement)
  {
    check_degrees(p_c, p_f);
    const LagrangeElement coarse(1, p_c), fine(1, p_f);
    const auto           &bc = coarse.basis();
    const auto           &bf = fine.basis();
    const int             nf = p_f + 1, nc = p_c + 1;
    const int             n_children = refinement == Refinement::with ? 2 : 1;
    const auto            q          = gauss_legendre(p_f + 2);

    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n_children * p_f + 1, nc);
    for (int b = 0; b < n_children; ++b)
      {
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nf, nf), B = Eigen::MatrixXd::Zero(nf, nc);
        for (std::size_t k = 0; k < q.size(); ++k)
          {
            const double t = q.points[k], w = q.weights[k];
            const double x = n_children == 2 ? 0.5 * (b + t) : t;
            for (int i = 0; i < nf; ++i)
              {
                const double fi = bf.value(i, t);
                for (int j = 0; j < nf; ++j)
                  M(i, j) += w * fi * bf.value(j, t);
                for (int j = 0; j < nc; ++j)
                  B(i, j) += w * fi * bc.value(j, x);
              }
          }
        P.middleRows(b * p_f, nf) = M.lu().solve(B);
      }
    return P;
  }

  Eigen::MatrixXd
  interpolation_matrix_1d(int p_c, int p_f, Refinement refinement)
  {
    check_degrees(p_c, p_f);
    const LagrangeElement coarse(1, p_c), fine(1, p_f);
    const auto            nodes = coarse.basis().nodes();
    const int             nf    = p_f + 1;
    const bool            with  = refinement == Refinement::with;
    Eigen::MatrixXd       I     = Eigen::MatrixXd::Zero(p_c + 1, with ? 2 * p_f + 1 : nf);
    for (int j = 0; j <= p_c; ++j)
      {
        const double x = nodes[j];
        const int    b = with && x > 0.5 ? 1 : 0;
        const double t = with ? 2 * x - b : x;
        for (int i = 0; i < nf; ++i)
          I(j, b * p_f + i) = fine.basis().value(i, t);
      }
    return I;
  }

  Eigen::MatrixXd
  element_prolongation_matrix(int dim, int p_c, int p_f, Refinement refinement)
  {
    const auto      P1 = prolongation_matrix_1d(p_c, p_f, refinement);
    const int       nf = P1.rows(), nc = P1.cols();
    const int       Nf = power(nf, dim), Nc = power(nc, dim);
    Eigen::MatrixXd P(Nf, Nc);
    for (int a = 0; a < Nf; ++a)
      for (int b = 0; b < Nc; ++b)
        {
          double v = 1;
          for (int k = 0, ra = a, rb = b; k < dim; ++k, ra /= nf, rb /= nc)
            v *= P1(ra % nf, rb % nc);
          P(a, b) = v;
        }
    return P;
  }

  // ------------------------------------------------------------- builders

  template <typename Number>
  TwoLevelTransfer<Number>
  build_geometric_transfer(const TreeMesh &mesh, const DofMap &coarse,
                           const ConstraintSet &coarse_constraints, const DofMap &fine,
                           const ConstraintSet &fine_weight_constraints, bool allow_uncovered)
  {
    if (coarse.degree() != fine.degree() || coarse.dimension() != fine.dimension())
      throw std::invalid_argument("geometric transfer needs equal degree and dimension");
    const int dim = fine.dimension();
    const int p   = fine.degree();

    TwoLevelTransfer<Number> t;
    t.dim_           = dim;
    t.coarse_gather_ = CellGather<Number>(coarse, coarse_constraints);

    auto identity = make_scheme<Number>(TransferCategory::identity, p, p);
    auto refined  = make_scheme<Number>(TransferCategory::refined, p, p);

    const int   n_children = 1 << dim;
    const int   np         = 2 * p + 1;
    const int   n          = p + 1;
    std::size_t covered    = 0;
    std::vector<std::uint32_t> patch(power(np, dim));

    for (std::size_t c = 0; c < coarse.n_cells(); ++c)
      {
        const CellId id   = coarse.cells()[c];
        const auto   fpos = fine.position(id);
        if (fpos >= 0)
          {
            identity.coarse_cells.push_back(static_cast<std::uint32_t>(c));
            for (auto g : fine.cell_dofs(fpos))
              identity.fine_indices.push_back(g);
            ++covered;
            continue;
          }
        const Cell &cell     = mesh.cell(id);
        int         n_found  = 0;
        if (!cell.is_active())
          for (int ch = 0; ch < n_children; ++ch)
            n_found += fine.position(cell.first_child + ch) >= 0;
        if (n_found == 0 && allow_uncovered)
          continue;
        if (n_found != n_children)
          throw std::invalid_argument("inconsistent level pair: coarse cell not matched on the fine level");

        for (int ch = 0; ch < n_children; ++ch)
          {
            const auto local = fine.cell_dofs(fine.position(cell.first_child + ch));
            for (int a = 0; a < fine.dofs_per_cell(); ++a)
              {
                int idx = 0, stride = 1;
                for (int k = 0, r = a; k < dim; ++k, r /= n, stride *= np)
                  idx += (((ch >> k) & 1) * p + r % n) * stride;
                patch[idx] = local[a];
              }
          }
        refined.coarse_cells.push_back(static_cast<std::uint32_t>(c));
        refined.fine_indices.insert(refined.fine_indices.end(), patch.begin(), patch.end());
        covered += n_children;
      }
    if (covered != fine.n_cells())
      throw std::invalid_argument("inconsistent level pair: fine cells not covered exactly once");

    for (auto *s : {&refined, &identity})
      if (s->n_members() > 0)
        t.schemes_.push_back(std::move(*s));
    t.finalize(fine_weight_constraints);
    return t;
  }

  template <typename Number>
  TwoLevelTransfer<Number>
  build_polynomial_transfer(const DofMap &coarse, const ConstraintSet &coarse_constraints,
                            const DofMap &fine, const ConstraintSet &fine_weight_constraints)
  {
    if (!(coarse.cells().size() == fine.cells().size() &&
          std::equal(coarse.cells().begin(), coarse.cells().end(), fine.cells().begin())))
      throw std::invalid_argument("polynomial transfer needs identical cell lists");
    if (coarse.degree() >= fine.degree() || coarse.degree() < 1)
      throw std::invalid_argument("polynomial transfer needs 1 <= p_c < p_f");

    TwoLevelTransfer<Number> t;
    t.dim_           = fine.dimension();
    t.coarse_gather_ = CellGather<Number>(coarse, coarse_constraints);
    auto s = make_scheme<Number>(TransferCategory::polynomial, coarse.degree(), fine.degree());
    for (std::size_t c = 0; c < fine.n_cells(); ++c)
      {
        s.coarse_cells.push_back(static_cast<std::uint32_t>(c));
        for (auto g : fine.cell_dofs(c))
          s.fine_indices.push_back(g);
      }
    t.schemes_.push_back(std::move(s));
    t.finalize(fine_weight_constraints);
    return t;
  }

  // ---------------------------------------------------------------- apply

  template <typename Number>
  void
  TwoLevelTransfer<Number>::finalize(const ConstraintSet &fine_weight_constraints)
  {
    const auto n = fine_weight_constraints.n_dofs();
    valence_.assign(n, 0);
    for (const auto &s : schemes_)
      for (auto g : s.fine_indices)
        {
          if (g >= n)
            throw std::invalid_argument("fine constraint set does not match the fine DoF map");
          ++valence_[g];
        }
    weights_.assign(n, Number(0));
    for (std::size_t i = 0; i < n; ++i)
      if (!fine_weight_constraints.is_constrained(i) && valence_[i] > 0)
        weights_[i] = Number(1) / static_cast<Number>(valence_[i]);

    std::size_t size = 0;
    for (const auto &s : schemes_)
      size = std::max(size, static_cast<std::size_t>(power(s.n_fine, dim_)));
    scratch_.resize(2 * size);
  }

  template <typename Number>
  void
  TwoLevelTransfer<Number>::prolongate_and_add(std::span<Number> fine,
                                               std::span<const Number> coarse) const
  {
    if (fine.size() != n_fine_dofs() || coarse.size() != n_coarse_dofs())
      throw std::invalid_argument("vector size does not match the transfer");
    Number *a = scratch_.data(), *b = scratch_.data() + scratch_.size() / 2;
    for (const auto &s : schemes_)
      {
        const int Nf = power(s.n_fine, dim_);
        for (std::size_t m = 0; m < s.n_members(); ++m)
          {
            coarse_gather_.gather(coarse, s.coarse_cells[m], a);
            Number *cur = a, *other = b;
            if (s.category != TransferCategory::identity)
              {
                std::array<int, 3> ext{s.n_coarse, s.n_coarse, s.n_coarse};
                for (int k = 0; k < dim_; ++k)
                  {
                    tensor::apply_1d(s.prolongation.data(), s.n_fine, s.n_coarse, k, dim_, ext, cur,
                                     other, false, false);
                    ext[k] = s.n_fine;
                    std::swap(cur, other);
                  }
              }
            const std::uint32_t *idx = s.fine_indices.data() + m * Nf;
            for (int j = 0; j < Nf; ++j)
              fine[idx[j]] += weights_[idx[j]] * cur[j];
          }
      }
  }

  template <typename Number>
  void
  TwoLevelTransfer<Number>::restrict_and_add(std::span<Number> coarse,
                                             std::span<const Number> fine) const
  {
    if (fine.size() != n_fine_dofs() || coarse.size() != n_coarse_dofs())
      throw std::invalid_argument("vector size does not match the transfer");
    Number *a = scratch_.data(), *b = scratch_.data() + scratch_.size() / 2;
    for (const auto &s : schemes_)
      {
        const int Nf = power(s.n_fine, dim_);
        for (std::size_t m = 0; m < s.n_members(); ++m)
          {
            const std::uint32_t *idx = s.fine_indices.data() + m * Nf;
            for (int j = 0; j < Nf; ++j)
              a[j] = weights_[idx[j]] * fine[idx[j]];
            Number *cur = a, *other = b;
            if (s.category != TransferCategory::identity)
              {
                std::array<int, 3> ext{s.n_fine, s.n_fine, s.n_fine};
                for (int k = 0; k < dim_; ++k)
                  {
                    tensor::apply_1d(s.prolongation.data(), s.n_fine, s.n_coarse, k, dim_, ext, cur,
                                     other, true, false);
                    ext[k] = s.n_coarse;
                    std::swap(cur, other);
                  }
              }
            coarse_gather_.scatter_add(cur, s.coarse_cells[m], coarse);
          }
      }
  }

  template <typename Number>
  void
  TwoLevelTransfer<Number>::interpolate(std::span<Number> coarse, std::span<const Number> fine) const
  {
    if (fine.size() != n_fine_dofs() || coarse.size() != n_coarse_dofs())
      throw std::invalid_argument("vector size does not match the transfer");
    Number *a = scratch_.data(), *b = scratch_.data() + scratch_.size() / 2;
    for (const auto &s : schemes_)
      {
        const int Nf = power(s.n_fine, dim_);
        for (std::size_t m = 0; m < s.n_members(); ++m)
          {
            const std::uint32_t *idx = s.fine_indices.data() + m * Nf;
            for (int j = 0; j < Nf; ++j)
              a[j] = fine[idx[j]];
            Number *cur = a, *other = b;
            if (s.category != TransferCategory::identity)
              {
                std::array<int, 3> ext{s.n_fine, s.n_fine, s.n_fine};
                for (int k = 0; k < dim_; ++k)
                  {
                    tensor::apply_1d(s.interpolation.data(), s.n_coarse, s.n_fine, k, dim_, ext,
                                     cur, other, false, false);
                    ext[k] = s.n_coarse;
                    std::swap(cur, other);
                  }
              }
            const auto dofs = coarse_gather_.cell_dofs(s.coarse_cells[m]);
            for (std::size_t j = 0; j < dofs.size(); ++j)
              coarse[dofs[j]] = cur[j];
          }
      }
  }

  template class TwoLevelTransfer<float>;
  template class TwoLevelTransfer<double>;

  template TwoLevelTransfer<float>
  build_geometric_transfer<float>(const TreeMesh &, const DofMap &, const ConstraintSet &,
                                  const DofMap &, const ConstraintSet &, bool);
  template TwoLevelTransfer<double>
  build_geometric_transfer<double>(const TreeMesh &, const DofMap &, const ConstraintSet &,
                                   const DofMap &, const ConstraintSet &, bool);
  template TwoLevelTransfer<float>
  build_polynomial_transfer<float>(const DofMap &, const ConstraintSet &, const DofMap &,
                                   const ConstraintSet &);
  template TwoLevelTransfer<double>
  build_polynomial_transfer<double>(const DofMap &, const ConstraintSet &, const DofMap &,
                                    const ConstraintSet &);

} // namespace adaptmg
