#include <adaptmg/fem.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace adaptmg
{
  namespace
  {
    // Legendre polynomial P_n and its derivative on [-1,1].
    std::pair<double, double>
    legendre(int n, double x)
    {
      double p0 = 1.0, p1 = x;
      if (n == 0)
        return {1.0, 0.0};
      for (int k = 2; k <= n; ++k)
        {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0              = p1;
          p1              = p2;
        }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      return {p1, dp};
    }

    struct NodeKey
    {
      std::array<std::uint32_t, 3> axis;

      bool
      operator==(const NodeKey &) const = default;
    };

    struct NodeKeyHash
    {
      std::size_t
      operator()(const NodeKey &k) const noexcept
      {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto a : k.axis)
          {
            h ^= a;
            h *= 1099511628211ull;
          }
        return static_cast<std::size_t>(h ^ (h >> 29));
      }
    };
  } // namespace

  QuadratureRule1D
  gauss_legendre(int n)
  {
    if (n < 1)
      throw std::invalid_argument("gauss_legendre: need at least one point");
    QuadratureRule1D rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i)
      {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it)
          {
            const auto [p, dp] = legendre(n, x);
            const double dx    = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
              break;
          }
        const auto [p, dp]         = legendre(n, x);
        rule.points[n - 1 - i]     = 0.5 * (x + 1.0);
        rule.weights[n - 1 - i]    = 1.0 / ((1.0 - x * x) * dp * dp);
      }
    return rule;
  }

  std::vector<double>
  gauss_lobatto_points(int n)
  {
    if (n < 2)
      throw std::invalid_argument("gauss_lobatto_points: need at least two points");
    const int           p = n - 1;
    std::vector<double> points(n);
    points[0] = 0.0;
    points[p] = 1.0;
    for (int j = 1; j < p; ++j)
      {
        // roots of P'_p, Newton with P'' from the Legendre equation
        double x = -std::cos(std::numbers::pi * j / p);
        for (int it = 0; it < 100; ++it)
          {
            const auto [pp, dp] = legendre(p, x);
            const double ddp    = (2.0 * x * dp - p * (p + 1) * pp) / (1.0 - x * x);
            const double dx     = dp / ddp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
              break;
          }
        points[j] = 0.5 * (x + 1.0);
      }
    return points;
  }

  LagrangeBasis1D::LagrangeBasis1D(std::vector<double> nodes)
    : nodes_(std::move(nodes))
    , denominators_(nodes_.size(), 1.0)
  {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (std::size_t j = 0; j < nodes_.size(); ++j)
        if (i != j)
          denominators_[i] *= nodes_[i] - nodes_[j];
  }

  double
  LagrangeBasis1D::value(std::size_t i, double x) const
  {
    double v = 1.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j)
      if (j != i)
        v *= x - nodes_[j];
    return v / denominators_[i];
  }

  double
  LagrangeBasis1D::derivative(std::size_t i, double x) const
  {
    double sum = 0.0;
    for (std::size_t m = 0; m < nodes_.size(); ++m)
      {
        if (m == i)
          continue;
        double prod = 1.0;
        for (std::size_t j = 0; j < nodes_.size(); ++j)
          if (j != i && j != m)
            prod *= x - nodes_[j];
        sum += prod;
      }
    return sum / denominators_[i];
  }

  namespace
  {
    std::vector<double>
    element_nodes(int degree)
    {
      if (degree < 1)
        throw std::invalid_argument("LagrangeElement: degree must be >= 1");
      if (degree == 1)
        return {0.0, 1.0};
      return gauss_lobatto_points(degree + 1);
    }
  } // namespace

  LagrangeElement::LagrangeElement(int dim, int degree)
    : dim_(dim)
    , degree_(degree)
    , dofs_per_cell_(1)
    , basis_(element_nodes(degree))
    , quadrature_(gauss_legendre(degree + 1))
  {
    if (dim < 1 || dim > 3)
      throw std::invalid_argument("LagrangeElement: dimension must be 1, 2 or 3");
    const int n = degree + 1;
    for (int k = 0; k < dim; ++k)
      dofs_per_cell_ *= n;

    shape_values_.resize(n * n);
    for (int q = 0; q < n; ++q)
      for (int i = 0; i < n; ++i)
        shape_values_[q * n + i] = basis_.value(i, quadrature_.points[q]);

    const LagrangeBasis1D collocation(quadrature_.points);
    collocation_gradients_.resize(n * n);
    for (int q = 0; q < n; ++q)
      for (int i = 0; i < n; ++i)
        collocation_gradients_[q * n + i] = collocation.derivative(i, quadrature_.points[q]);
  }

  double
  LagrangeElement::shape_value(int i, const Point &x) const
  {
    const int n = n_1d();
    double    v = 1.0;
    for (int k = 0; k < dim_; ++k)
      {
        v *= basis_.value(i % n, x[k]);
        i /= n;
      }
    return v;
  }

  DofMap
  distribute_dofs(const TreeMesh &mesh, std::span<const CellId> view, int degree)
  {
    const LagrangeElement fe(mesh.dimension(), degree);
    const int             dim   = mesh.dimension();
    const int             n     = degree + 1;
    const int             l_max = mesh.max_level();
    const auto            nodes = fe.basis().nodes();

    DofMap dofs;
    dofs.dim_           = dim;
    dofs.degree_        = degree;
    dofs.dofs_per_cell_ = fe.dofs_per_cell();
    dofs.cells_.assign(view.begin(), view.end());
    dofs.position_.assign(mesh.n_cells(), -1);
    dofs.cell_dofs_.resize(view.size() * fe.dofs_per_cell());

    std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash> index_of;
    index_of.reserve(view.size() * fe.dofs_per_cell() / 2);

    for (std::size_t pos = 0; pos < view.size(); ++pos)
      {
        const CellId id = view[pos];
        const Cell  &c  = mesh.cell(id);
        dofs.position_[id] = static_cast<std::int32_t>(pos);
        const std::uint32_t level_end = 1u << c.level;
        const Point         lo        = mesh.lower_corner(id);
        const double        h         = mesh.cell_size(id);

        for (int k = 0; k < fe.dofs_per_cell(); ++k)
          {
            NodeKey key{{0, 0, 0}};
            bool    boundary = false;
            Point   x{};
            int     rest = k;
            for (int a = 0; a < dim; ++a)
              {
                const int i = rest % n;
                rest /= n;
                x[a] = lo[a] + h * nodes[i];
                if (i == 0 || i == degree)
                  {
                    const std::uint32_t e = c.coords[a] + (i == degree ? 1u : 0u);
                    boundary              = boundary || e == 0 || e == level_end;
                    key.axis[a]           = e << (l_max - c.level);
                  }
                else
                  key.axis[a] = (1u << 31) | (std::uint32_t(c.level) << 25) | (c.coords[a] << 4) |
                                static_cast<std::uint32_t>(i);
              }
            const auto [it, inserted] =
              index_of.try_emplace(key, static_cast<std::uint32_t>(dofs.support_points_.size()));
            if (inserted)
              {
                dofs.support_points_.push_back(x);
                dofs.at_boundary_.push_back(boundary);
              }
            dofs.cell_dofs_[pos * fe.dofs_per_cell() + k] = it->second;
          }
      }
    dofs.n_dofs_ = dofs.support_points_.size();
    return dofs;
  }

  ConstraintSet::ConstraintSet(std::size_t n_dofs)
    : line_of_(n_dofs, -1)
  {}

  void
  ConstraintSet::set_line(std::uint32_t index, std::vector<Entry> entries, double inhomogeneity)
  {
    if (index >= line_of_.size())
      throw std::out_of_range("ConstraintSet::set_line: index out of range");
    if (line_of_[index] >= 0)
      {
        Line &line         = lines_[line_of_[index]];
        line.entries       = std::move(entries);
        line.inhomogeneity = inhomogeneity;
        return;
      }
    line_of_[index] = static_cast<std::int32_t>(lines_.size());
    lines_.push_back({index, std::move(entries), inhomogeneity});
  }

  std::span<const ConstraintSet::Entry>
  ConstraintSet::entries(std::size_t i) const
  {
    if (line_of_[i] < 0)
      return {};
    return lines_[line_of_[i]].entries;
  }

  double
  ConstraintSet::inhomogeneity(std::size_t i) const
  {
    return line_of_[i] < 0 ? 0.0 : lines_[line_of_[i]].inhomogeneity;
  }

  std::vector<std::uint32_t>
  ConstraintSet::constrained_indices() const
  {
    std::vector<std::uint32_t> result;
    result.reserve(lines_.size());
    for (const Line &line : lines_)
      result.push_back(line.index);
    std::sort(result.begin(), result.end());
    return result;
  }

  bool
  ConstraintSet::is_closed() const
  {
    for (const Line &line : lines_)
      for (const Entry &e : line.entries)
        if (line_of_[e.index] >= 0)
          return false;
    return true;
  }

  void
  ConstraintSet::close()
  {
    const std::size_t max_depth = lines_.size() + 1;
    for (Line &line : lines_)
      {
        std::size_t depth = 0;
        while (true)
          {
            bool               changed = false;
            std::vector<Entry> expanded;
            double             b = line.inhomogeneity;
            for (const Entry &e : line.entries)
              {
                const std::int32_t other = line_of_[e.index];
                if (other < 0)
                  {
                    expanded.push_back(e);
                    continue;
                  }
                if (e.index == line.index)
                  throw std::runtime_error("ConstraintSet::close: self-referencing constraint");
                changed = true;
                for (const Entry &f : lines_[other].entries)
                  expanded.push_back({f.index, e.coefficient * f.coefficient});
                b += e.coefficient * lines_[other].inhomogeneity;
              }
            if (!changed)
              break;
            if (++depth > max_depth)
              throw std::runtime_error("ConstraintSet::close: cyclic constraints");
            std::sort(expanded.begin(), expanded.end(),
                      [](const Entry &a, const Entry &c) { return a.index < c.index; });
            line.entries.clear();
            for (const Entry &e : expanded)
              {
                if (!line.entries.empty() && line.entries.back().index == e.index)
                  line.entries.back().coefficient += e.coefficient;
                else
                  line.entries.push_back(e);
              }
            std::erase_if(line.entries, [](const Entry &e) { return e.coefficient == 0.0; });
            line.inhomogeneity = b;
          }
      }
  }

  void
  ConstraintSet::distribute(std::span<double> x) const
  {
    if (x.size() != line_of_.size())
      throw std::invalid_argument("ConstraintSet::distribute: size mismatch");
    for (const Line &line : lines_)
      {
        double v = line.inhomogeneity;
        for (const Entry &e : line.entries)
          v += e.coefficient * x[e.index];
        x[line.index] = v;
      }
  }

  ConstraintSet
  ConstraintSet::merge(const ConstraintSet &base, const ConstraintSet &priority)
  {
    if (base.n_dofs() != priority.n_dofs())
      throw std::invalid_argument("ConstraintSet::merge: size mismatch");
    ConstraintSet result = base;
    for (const Line &line : priority.lines_)
      result.set_line(line.index, line.entries, line.inhomogeneity);
    result.close();
    return result;
  }

  ConstraintSet
  build_hanging_node_constraints(const TreeMesh &mesh, const DofMap &dofs)
  {
    const int             dim = mesh.dimension();
    const int             p   = dofs.degree();
    const int             n   = p + 1;
    const LagrangeElement fe(dim, p);
    const auto            nodes = fe.basis().nodes();

    ConstraintSet constraints(dofs.n_dofs());

    // face and (3D) edge neighbor offsets
    std::vector<std::array<int, 3>> offsets;
    for (int k = -1; k <= 1; ++k)
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i)
          {
            if (dim == 2 && k != 0)
              continue;
            const int nz = (i != 0) + (j != 0) + (k != 0);
            if (nz > 0 && nz < dim)
              offsets.push_back({i, j, k});
          }

    std::vector<double> axis_values(3 * n);
    for (std::size_t pos = 0; pos < dofs.n_cells(); ++pos)
      {
        const CellId id = dofs.cells()[pos];
        const Cell  &c  = mesh.cell(id);
        const auto   local_dofs = dofs.cell_dofs(pos);
        for (const auto &o : offsets)
          {
            std::array<std::int64_t, 3> q{};
            for (int a = 0; a < dim; ++a)
              q[a] = static_cast<std::int64_t>(c.coords[a]) + o[a];
            if (!mesh.inside(c.level, q))
              continue;
            const CellCoords qc{static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                                static_cast<std::uint32_t>(q[2])};
            if (mesh.find(c.level, qc))
              continue;
            const CellId coarse = mesh.locate(c.level, qc);
            const auto   coarse_pos = dofs.position(coarse);
            if (coarse_pos < 0)
              continue;
            const Cell &cc = mesh.cell(coarse);
            if (cc.level + 1 != c.level)
              throw std::runtime_error(
                "build_hanging_node_constraints: mesh is not one-irregular");
            const auto coarse_dofs = dofs.cell_dofs(coarse_pos);

            for (int k = 0; k < fe.dofs_per_cell(); ++k)
              {
                const std::uint32_t g = local_dofs[k];
                if (constraints.is_constrained(g))
                  continue;
                if (std::find(coarse_dofs.begin(), coarse_dofs.end(), g) != coarse_dofs.end())
                  continue;
                // node inside the closure of the coarse cell?
                bool inside_coarse = true;
                int  rest          = k;
                for (int a = 0; a < dim && inside_coarse; ++a)
                  {
                    const int          i  = rest % n;
                    const std::int64_t lo = 2 * static_cast<std::int64_t>(cc.coords[a]);
                    rest /= n;
                    double s;
                    if (i == 0 || i == p)
                      {
                        const std::int64_t e = c.coords[a] + (i == p ? 1 : 0);
                        inside_coarse        = e >= lo && e <= lo + 2;
                        s                    = 0.5 * static_cast<double>(e - lo);
                      }
                    else
                      {
                        inside_coarse = c.coords[a] >= lo && c.coords[a] + 1 <= lo + 2;
                        s = 0.5 * (static_cast<double>(c.coords[a] - lo) + nodes[i]);
                      }
                    for (int j = 0; j < n; ++j)
                      axis_values[a * n + j] = fe.basis().value(j, s);
                  }
                if (!inside_coarse)
                  continue;

                std::vector<ConstraintSet::Entry> entries;
                for (int j = 0; j < fe.dofs_per_cell(); ++j)
                  {
                    double v    = 1.0;
                    int    jr   = j;
                    for (int a = 0; a < dim; ++a)
                      {
                        v *= axis_values[a * n + jr % n];
                        jr /= n;
                      }
                    if (std::abs(v) > 1e-13)
                      entries.push_back({coarse_dofs[j], v});
                  }
                constraints.set_line(g, std::move(entries), 0.0);
              }
          }
      }
    constraints.close();
    return constraints;
  }

  ConstraintSet
  build_dirichlet_constraints(const DofMap &dofs, const std::function<double(const Point &)> &g)
  {
    ConstraintSet constraints(dofs.n_dofs());
    for (std::size_t i = 0; i < dofs.n_dofs(); ++i)
      if (dofs.at_boundary(i))
        constraints.set_line(static_cast<std::uint32_t>(i), {}, g(dofs.support_point(i)));
    return constraints;
  }

  ConstraintSet
  build_level_constraints(const TreeMesh &mesh, const DofMap &dofs)
  {
    return ConstraintSet::merge(build_hanging_node_constraints(mesh, dofs),
                                build_dirichlet_constraints(dofs, [](const Point &) { return 0.0; }));
  }

} // namespace adaptmg
