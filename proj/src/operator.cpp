#include <adaptmg/operator.h>
#include <adaptmg/tensor.h>

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace adaptmg
{
  namespace
  {
    // Laplace kernel on one cell: V, D are n x n row-major (values of the
    // node basis at the Gauss points, collocation derivative at the Gauss
    // points). scratch must hold (dim + 2) * n^dim entries.
    template <typename T>
    void
    laplace_kernel(int dim, int n, const T *V, const T *D, const T *w, const T *in, T *out,
                   T scale, T *scratch)
    {
      int N = 1;
      for (int k = 0; k < dim; ++k)
        N *= n;
      const std::array<int, 3> ext{n, n, n};
      T *a  = scratch;
      T *b  = scratch + N;
      T *gr = scratch + 2 * N;

      // values at quadrature points
      const T *cur = in;
      T       *tmp[2] = {a, b};
      for (int k = 0; k < dim; ++k)
        {
          tensor::apply_1d(V, n, n, k, dim, ext, cur, tmp[k % 2], false, false);
          cur = tmp[k % 2];
        }
      T *uq = const_cast<T *>(cur);

      for (int k = 0; k < dim; ++k)
        {
          T *g = gr + k * N;
          tensor::apply_1d(D, n, n, k, dim, ext, uq, g, false, false);
          for (int q = 0; q < N; ++q)
            g[q] *= w[q] * scale;
        }
      // uq is no longer needed; accumulate the divergence into it
      T *acc = uq;
      for (int q = 0; q < N; ++q)
        acc[q] = T(0);
      for (int k = 0; k < dim; ++k)
        tensor::apply_1d(D, n, n, k, dim, ext, gr + k * N, acc, true, true);

      T *other = acc == a ? b : a;
      cur      = acc;
      for (int k = dim - 1; k >= 0; --k)
        {
          T *dst = k == 0 ? out : other;
          tensor::apply_1d(V, n, n, k, dim, ext, cur, dst, true, false);
          other = const_cast<T *>(cur);
          cur   = dst;
        }
    }

    template <typename T>
    struct KernelData
    {
      int            dim = 0, n = 0;
      std::vector<T> V, D, w;
    };

    template <typename T>
    KernelData<T>
    make_kernel_data(int dim, int degree)
    {
      LagrangeElement fe(dim, degree);
      KernelData<T>   k;
      k.dim = dim;
      k.n   = degree + 1;
      k.V.assign(fe.shape_values().begin(), fe.shape_values().end());
      k.D.assign(fe.collocation_gradients().begin(), fe.collocation_gradients().end());
      const auto &qw = fe.quadrature().weights;
      int         N  = 1;
      for (int d = 0; d < dim; ++d)
        N *= k.n;
      k.w.resize(N);
      for (int q = 0; q < N; ++q)
        {
          double wq = 1.0;
          int    r  = q;
          for (int d = 0; d < dim; ++d)
            {
              wq *= qw[r % k.n];
              r /= k.n;
            }
          k.w[q] = static_cast<T>(wq);
        }
      return k;
    }

    // Column list of a cell: for each local index the (global, coefficient)
    // pairs that make up C_e G_e.
    template <typename Number>
    std::vector<std::vector<std::pair<std::uint32_t, double>>>
    local_expansion(const CellGather<Number> &gather, std::size_t cell)
    {
      auto dofs = gather.cell_dofs(cell);
      std::vector<std::vector<std::pair<std::uint32_t, double>>> result(dofs.size());
      for (std::size_t a = 0; a < dofs.size(); ++a)
        {
          const auto g = dofs[a];
          if (!gather.is_constrained(g))
            result[a].push_back({g, 1.0});
          else
            {
              auto cols = gather.line_columns(g);
              auto vals = gather.line_values(g);
              for (std::size_t t = 0; t < cols.size(); ++t)
                result[a].push_back({cols[t], static_cast<double>(vals[t])});
            }
        }
      return result;
    }
  } // namespace

  // ---------------------------------------------------------------- gather

  template <typename Number>
  CellGather<Number>::CellGather(const DofMap &dofs, const ConstraintSet &constraints)
  {
    if (constraints.n_dofs() != dofs.n_dofs())
      throw std::invalid_argument("constraint set size does not match the DoF map");
    if (!constraints.is_closed())
      throw std::invalid_argument("constraint set must be closed");

    dofs_per_cell_ = dofs.dofs_per_cell();
    indices_.reserve(dofs.n_cells() * dofs_per_cell_);
    for (std::size_t c = 0; c < dofs.n_cells(); ++c)
      for (auto g : dofs.cell_dofs(c))
        indices_.push_back(g);

    line_of_.assign(dofs.n_dofs(), -1);
    line_ptr_.push_back(0);
    for (auto i : constraints.constrained_indices())
      {
        line_of_[i] = static_cast<std::int32_t>(inhomogeneities_.size());
        for (const auto &e : constraints.entries(i))
          {
            line_cols_.push_back(e.index);
            line_vals_.push_back(static_cast<Number>(e.coefficient));
          }
        line_ptr_.push_back(static_cast<std::uint32_t>(line_cols_.size()));
        inhomogeneities_.push_back(constraints.inhomogeneity(i));
      }

    cell_constrained_.assign(dofs.n_cells(), false);
    for (std::size_t c = 0; c < dofs.n_cells(); ++c)
      for (auto g : cell_dofs(c))
        if (line_of_[g] >= 0)
          {
            cell_constrained_[c] = true;
            break;
          }
  }

  template <typename Number>
  std::span<const std::uint32_t>
  CellGather<Number>::line_columns(std::size_t i) const
  {
    const auto l = line_of_[i];
    if (l < 0)
      return {};
    return {line_cols_.data() + line_ptr_[l], line_ptr_[l + 1] - line_ptr_[l]};
  }

  template <typename Number>
  std::span<const Number>
  CellGather<Number>::line_values(std::size_t i) const
  {
    const auto l = line_of_[i];
    if (l < 0)
      return {};
    return {line_vals_.data() + line_ptr_[l], line_ptr_[l + 1] - line_ptr_[l]};
  }

  template <typename Number>
  template <typename VectorNumber>
  void
  CellGather<Number>::gather(std::span<const VectorNumber> src, std::size_t cell, Number *local,
                             bool with_inhomogeneities) const
  {
    const std::uint32_t *idx = indices_.data() + cell * dofs_per_cell_;
    if (!cell_constrained_[cell])
      {
        for (int a = 0; a < dofs_per_cell_; ++a)
          local[a] = static_cast<Number>(src[idx[a]]);
        return;
      }
    for (int a = 0; a < dofs_per_cell_; ++a)
      {
        const auto l = line_of_[idx[a]];
        if (l < 0)
          {
            local[a] = static_cast<Number>(src[idx[a]]);
            continue;
          }
        Number v = with_inhomogeneities ? static_cast<Number>(inhomogeneities_[l]) : Number(0);
        for (auto t = line_ptr_[l]; t < line_ptr_[l + 1]; ++t)
          v += line_vals_[t] * static_cast<Number>(src[line_cols_[t]]);
        local[a] = v;
      }
  }

  template <typename Number>
  template <typename VectorNumber>
  void
  CellGather<Number>::scatter_add(const Number *local, std::size_t cell,
                                  std::span<VectorNumber> dst) const
  {
    const std::uint32_t *idx = indices_.data() + cell * dofs_per_cell_;
    if (!cell_constrained_[cell])
      {
        for (int a = 0; a < dofs_per_cell_; ++a)
          dst[idx[a]] += static_cast<VectorNumber>(local[a]);
        return;
      }
    for (int a = 0; a < dofs_per_cell_; ++a)
      {
        const auto l = line_of_[idx[a]];
        if (l < 0)
          {
            dst[idx[a]] += static_cast<VectorNumber>(local[a]);
            continue;
          }
        for (auto t = line_ptr_[l]; t < line_ptr_[l + 1]; ++t)
          dst[line_cols_[t]] += static_cast<VectorNumber>(line_vals_[t] * local[a]);
      }
  }

  // --------------------------------------------------------- edge DoFs

  EdgeDofClassification
  classify_edge_dofs(const TreeMesh &mesh, const DofMap &dofs)
  {
    const int dim = dofs.dimension();
    const int n   = dofs.degree() + 1;

    EdgeDofClassification result;
    result.is_edge.assign(dofs.n_dofs(), false);

    int n_offsets = 1;
    for (int d = 0; d < dim; ++d)
      n_offsets *= 3;

    for (std::size_t pos = 0; pos < dofs.n_cells(); ++pos)
      {
        const Cell &cell = mesh.cell(dofs.cells()[pos]);
        for (int o = 0; o < n_offsets; ++o)
          {
            std::array<int, 3>          off{0, 0, 0};
            std::array<std::int64_t, 3> nb{0, 0, 0};
            bool                        zero = true;
            int                         r    = o;
            for (int d = 0; d < dim; ++d)
              {
                off[d] = r % 3 - 1;
                r /= 3;
                zero  = zero && off[d] == 0;
                nb[d] = static_cast<std::int64_t>(cell.coords[d]) + off[d];
              }
            if (zero || !mesh.inside(cell.level, nb))
              continue;
            CellCoords nc{0, 0, 0};
            for (int d = 0; d < dim; ++d)
              nc[d] = static_cast<std::uint32_t>(nb[d]);
            if (mesh.find(cell.level, nc))
              continue;

            // neighbor region is covered by a coarser active cell: mark the
            // shared entity
            auto local = dofs.cell_dofs(pos);
            for (int a = 0; a < dofs.dofs_per_cell(); ++a)
              {
                bool on = true;
                int  s  = a;
                for (int d = 0; d < dim; ++d)
                  {
                    const int i = s % n;
                    s /= n;
                    if ((off[d] == -1 && i != 0) || (off[d] == 1 && i != n - 1))
                      on = false;
                  }
                if (on && !dofs.at_boundary(local[a]))
                  result.is_edge[local[a]] = true;
              }
          }
      }
    for (std::size_t i = 0; i < result.is_edge.size(); ++i)
      if (result.is_edge[i])
        result.edge_dofs.push_back(static_cast<std::uint32_t>(i));
    return result;
  }

  ConstraintSet
  build_edge_constraints(const DofMap &dofs, const EdgeDofClassification &edge)
  {
    ConstraintSet c = build_dirichlet_constraints(dofs, [](const Point &) { return 0.0; });
    for (auto i : edge.edge_dofs)
      c.set_line(i, {});
    c.close();
    return c;
  }

  // ---------------------------------------------------------- operator

  template <typename Number>
  LaplaceOperator<Number>::LaplaceOperator(const TreeMesh &mesh, const DofMap &dofs,
                                           const ConstraintSet &constraints,
                                           std::vector<std::uint32_t> cell_subset)
    : dim_(dofs.dimension())
    , n_(dofs.degree() + 1)
    , gather_(dofs, constraints)
  {
    if (cell_subset.empty())
      {
        cells_.resize(dofs.n_cells());
        for (std::size_t c = 0; c < cells_.size(); ++c)
          cells_[c] = static_cast<std::uint32_t>(c);
      }
    else
      cells_ = std::move(cell_subset);

    cell_scale_.resize(dofs.n_cells());
    for (std::size_t c = 0; c < dofs.n_cells(); ++c)
      cell_scale_[c] = static_cast<Number>(std::pow(mesh.cell_size(dofs.cells()[c]), dim_ - 2));

    const auto kd = make_kernel_data<Number>(dim_, dofs.degree());
    values_       = kd.V;
    gradients_    = kd.D;
    quad_weights_ = kd.w;
    scratch_.resize((dim_ + 2) * quad_weights_.size());

    // reference element matrix in double, one unit vector at a time
    const auto          kdd = make_kernel_data<double>(dim_, dofs.degree());
    const int           nl  = dofs.dofs_per_cell();
    std::vector<double> e(nl), col(nl), scratch((dim_ + 2) * kdd.w.size());
    reference_matrix_.resize(nl, nl);
    for (int j = 0; j < nl; ++j)
      {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        laplace_kernel<double>(dim_, n_, kdd.V.data(), kdd.D.data(), kdd.w.data(), e.data(),
                               col.data(), 1.0, scratch.data());
        for (int i = 0; i < nl; ++i)
          reference_matrix_(i, j) = col[i];
      }
  }

  template <typename Number>
  void
  LaplaceOperator<Number>::apply_cell(const Number *local_in, Number *local_out,
                                      Number scale) const
  {
    laplace_kernel<Number>(dim_, n_, values_.data(), gradients_.data(), quad_weights_.data(),
                           local_in, local_out, scale, scratch_.data());
  }

  template <typename Number>
  void
  LaplaceOperator<Number>::vmult_add_cells(std::span<Number> dst,
                                           std::span<const Number> src) const
  {
    if (src.size() != n_dofs() || dst.size() != n_dofs())
      throw std::invalid_argument("vector size does not match the operator");
    const int           nl = gather_.dofs_per_cell();
    std::vector<Number> in(nl), out(nl);
    for (auto c : cells_)
      {
        gather_.gather(src, c, in.data());
        apply_cell(in.data(), out.data(), cell_scale_[c]);
        gather_.scatter_add(out.data(), c, dst);
      }
  }

  template <typename Number>
  void
  LaplaceOperator<Number>::vmult(std::span<Number> dst, std::span<const Number> src) const
  {
    if (src.size() != n_dofs() || dst.size() != n_dofs())
      throw std::invalid_argument("vector size does not match the operator");
    std::fill(dst.begin(), dst.end(), Number(0));
    vmult_add_cells(dst, src);
    for (std::size_t i = 0; i < n_dofs(); ++i)
      if (gather_.is_constrained(i))
        dst[i] = src[i];
  }

  template <typename Number>
  std::vector<Number>
  LaplaceOperator<Number>::apply(std::span<const Number> src) const
  {
    std::vector<Number> dst(src.size());
    vmult(dst, src);
    return dst;
  }

  template <typename Number>
  void
  LaplaceOperator<Number>::subtract_inhomogeneities(std::span<double> dst) const
  {
    if (dst.size() != n_dofs())
      throw std::invalid_argument("vector size does not match the operator");
    const int           nl = gather_.dofs_per_cell();
    std::vector<Number> zero(n_dofs(), Number(0)), in(nl), out(nl);
    std::vector<double> lift(n_dofs(), 0.0);
    for (auto c : cells_)
      {
        if (!gather_.cell_has_constraints(c))
          continue;
        gather_.gather(std::span<const Number>(zero), c, in.data(), true);
        apply_cell(in.data(), out.data(), cell_scale_[c]);
        gather_.scatter_add(out.data(), c, std::span<double>(lift));
      }
    for (std::size_t i = 0; i < n_dofs(); ++i)
      if (!gather_.is_constrained(i))
        dst[i] -= lift[i];
  }

  template <typename Number>
  std::vector<Number>
  LaplaceOperator<Number>::compute_diagonal() const
  {
    std::vector<double> diag(n_dofs(), 0.0);
    const auto         &K = reference_matrix_;
    for (auto c : cells_)
      {
        const double scale = cell_scale_[c];
        if (!gather_.cell_has_constraints(c))
          {
            auto idx = gather_.cell_dofs(c);
            for (std::size_t a = 0; a < idx.size(); ++a)
              diag[idx[a]] += scale * K(a, a);
            continue;
          }
        // d(j) = sum_ab c_a c_b K_ab over the column j of C_e
        const auto expansion = local_expansion(gather_, c);
        std::unordered_map<std::uint32_t, std::vector<std::pair<int, double>>> columns;
        for (std::size_t a = 0; a < expansion.size(); ++a)
          for (const auto &[g, coeff] : expansion[a])
            columns[g].push_back({static_cast<int>(a), coeff});
        for (const auto &[g, list] : columns)
          {
            double s = 0.0;
            for (const auto &[a, ca] : list)
              for (const auto &[b, cb] : list)
                s += ca * cb * K(a, b);
            diag[g] += scale * s;
          }
      }
    std::vector<Number> result(n_dofs());
    for (std::size_t i = 0; i < n_dofs(); ++i)
      result[i] = gather_.is_constrained(i) ? Number(1) : static_cast<Number>(diag[i]);
    return result;
  }

  template <typename Number>
  Eigen::MatrixXd
  LaplaceOperator<Number>::assemble_matrix() const
  {
    Eigen::MatrixXd A  = Eigen::MatrixXd::Zero(n_dofs(), n_dofs());
    const auto     &K  = reference_matrix_;
    for (auto c : cells_)
      {
        const double scale     = cell_scale_[c];
        const auto   expansion = local_expansion(gather_, c);
        for (std::size_t a = 0; a < expansion.size(); ++a)
          for (std::size_t b = 0; b < expansion.size(); ++b)
            {
              const double kab = scale * K(a, b);
              for (const auto &[ga, ca] : expansion[a])
                for (const auto &[gb, cb] : expansion[b])
                  A(ga, gb) += ca * cb * kab;
            }
      }
    for (std::size_t i = 0; i < n_dofs(); ++i)
      if (gather_.is_constrained(i))
        A(i, i) = 1.0;
    return A;
  }

  // ------------------------------------------------------ edge coupling

  template <typename Number>
  EdgeCoupling<Number>::EdgeCoupling(const TreeMesh &mesh, const DofMap &dofs,
                                     const ConstraintSet &dirichlet, EdgeDofClassification edge)
    : edge_(std::move(edge))
  {
    std::vector<std::uint32_t> touching;
    for (std::size_t c = 0; c < dofs.n_cells(); ++c)
      for (auto g : dofs.cell_dofs(c))
        if (edge_.is_edge[g])
          {
            touching.push_back(static_cast<std::uint32_t>(c));
            break;
          }
    if (touching.empty())
      return;
    op_ = LaplaceOperator<Number>(mesh, dofs, dirichlet, std::move(touching));
  }

  template <typename Number>
  std::vector<Number>
  EdgeCoupling<Number>::apply(Block which, std::span<const Number> x) const
  {
    std::vector<Number> result(x.size(), Number(0));
    if (edge_.empty())
      return result;
    if (x.size() != op_.n_dofs())
      throw std::invalid_argument("vector size does not match the edge coupling");

    const auto         &gather = op_.gather();
    std::vector<Number> src(x.size(), Number(0)), y(x.size(), Number(0));
    const bool          from_edge = which == Block::SE;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!gather.is_constrained(i) && edge_.is_edge[i] == from_edge)
        src[i] = x[i];
    op_.vmult_add_cells(y, src);
    for (std::size_t i = 0; i < x.size(); ++i)
      {
        if (gather.is_constrained(i) || edge_.is_edge[i] == from_edge)
          continue;
        result[i] = from_edge ? y[i] : -y[i];
      }
    return result;
  }

#define ADAPTMG_INSTANTIATE(T, V)                                                           \
  template void CellGather<T>::gather<V>(std::span<const V>, std::size_t, T *, bool) const; \
  template void CellGather<T>::scatter_add<V>(const T *, std::size_t, std::span<V>) const;

  template class CellGather<float>;
  template class CellGather<double>;
  ADAPTMG_INSTANTIATE(float, float)
  ADAPTMG_INSTANTIATE(float, double)
  ADAPTMG_INSTANTIATE(double, float)
  ADAPTMG_INSTANTIATE(double, double)
#undef ADAPTMG_INSTANTIATE

  template class LaplaceOperator<float>;
  template class LaplaceOperator<double>;
  template class EdgeCoupling<float>;
  template class EdgeCoupling<double>;

} // namespace adaptmg
