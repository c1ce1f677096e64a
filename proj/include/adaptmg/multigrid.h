#pragma once

#include <adaptmg/transfer.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptmg
{
  enum class Variant
  {
    local_smoothing,
    global_coarsening,
    polynomial
  };

  const char *
  to_string(Variant v);

  Variant
  parse_variant(const std::string &name);

  struct MultigridConfig
  {
    int           smoother_degree       = 3;
    double        smoothing_range_low   = 0.08; // lambda_lo = low * lambda_hat
    double        smoothing_range_high  = 1.2;  // lambda_hi = high * lambda_hat
    int           eigenvalue_iterations = 20;
    std::uint32_t seed                  = 5489u;
    /// Geometric V-cycle used as coarse solver below p = 1 for polynomial
    /// coarsening (local_smoothing or global_coarsening).
    Variant pc_continuation = Variant::global_coarsening;
  };

  /**
   * Degree-k Chebyshev iteration around point Jacobi (inv_diag zero on
   * constrained rows) targeting the interval [lambda_lo, lambda_hi] of
   * D^{-1} A. Performs k operator applications; when `x_is_zero` the first
   * residual is b and only k - 1 are needed. k = 0 leaves x unchanged.
   */
  template <typename Number, typename Op>
  void
  chebyshev_smooth(const Op &op, std::span<const Number> inv_diag, std::span<Number> x,
                   std::span<const Number> b, int k, double lambda_lo, double lambda_hi,
                   bool x_is_zero = false);

  /// Largest eigenvalue of D^{-1} A by power iteration from a seeded random
  /// start vector (Rayleigh quotient in the D inner product).
  template <typename Number>
  double
  estimate_eigenvalues(const LaplaceOperator<Number> &op, std::span<const Number> inv_diag,
                       int iterations = 20, std::uint32_t seed = 5489u);

  /// Dense LU of the assembled condensed level matrix.
  class CoarseSolver
  {
  public:
    CoarseSolver() = default;

    template <typename Number>
    explicit CoarseSolver(const LaplaceOperator<Number> &op);

    std::size_t
    size() const
    {
      return n_;
    }

    /// x = A^{-1} b in double; constrained rows of b are read as given.
    template <typename Number>
    void
    solve(std::span<Number> x, std::span<const Number> b) const;

  private:
    std::size_t                        n_ = 0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  };

  /// One multigrid level.
  template <typename Number>
  struct MGLevel
  {
    DofMap                  dofs;
    ConstraintSet           constraints;          // of the smoothing operator
    ConstraintSet           transfer_constraints; // zero weights / coarse gather
    LaplaceOperator<Number> op;
    std::vector<Number>     inv_diag;
    double                  lambda_max = 0;
    // local smoothing only
    EdgeDofClassification edge;
    EdgeCoupling<Number>  coupling;
    // transfer from the next coarser level (absent on level 0)
    TwoLevelTransfer<Number> transfer;
    bool                     has_transfer = false;

    mutable std::vector<Number> b, x, r;
  };

  /**
   * Level hierarchy for local smoothing, global coarsening, or polynomial
   * coarsening (degrees p, p/2, ..., 1 on the active mesh, followed by one
   * geometric V-cycle as coarse solver).
   */
  template <typename Number>
  class Hierarchy
  {
  public:
    Variant
    variant() const
    {
      return variant_;
    }

    std::size_t
    n_levels() const
    {
      return levels_.size();
    }

    const MGLevel<Number> &
    level(std::size_t l) const
    {
      return *levels_[l];
    }

    /// Polynomial degree of each level, coarsest first.
    std::vector<int>
    degrees() const;

    /// Geometric hierarchy serving as coarse solver of a polynomial one.
    const Hierarchy *
    nested() const
    {
      return nested_.get();
    }

    const DofMap &
    active_dofs() const
    {
      return active_dofs_;
    }

    const ConstraintSet &
    active_constraints() const
    {
      return active_constraints_;
    }

    const MultigridConfig &
    config() const
    {
      return config_;
    }

    /// Distribute an active-mesh vector to the level right-hand sides. For
    /// local smoothing every level with active cells receives its part.
    void
    copy_to_mg(std::span<const Number> b) const;

    /// Gather the level solutions into an active-mesh vector (zero on
    /// constrained active DoFs).
    void
    copy_from_mg(std::span<Number> x) const;

    /// Nodal interpolation of an active-mesh field to every level.
    std::vector<std::vector<Number>>
    interpolate_to_mg(std::span<const Number> field) const;

    /// Preconditioner action x = V(b): copy to levels, one V-cycle, copy back.
    void
    vcycle(std::span<Number> x, std::span<const Number> b) const;

  private:
    template <typename N>
    friend Hierarchy<N>
    build_hierarchy(const TreeMesh &, int, Variant, const MultigridConfig &);

    void
    level_cycle(std::size_t l) const;

    Variant                                       variant_ = Variant::global_coarsening;
    MultigridConfig                               config_;
    std::vector<std::unique_ptr<MGLevel<Number>>> levels_;
    std::shared_ptr<Hierarchy>                    nested_;
    CoarseSolver                                  coarse_;
    DofMap                                        active_dofs_;
    ConstraintSet                                 active_constraints_;
    // local smoothing: (level dof, active dof) pairs of the level DoFs that
    // belong to active cells of that level
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> active_indices_;
    // the subset carrying right-hand side and solution values
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> copy_indices_;
  };

  template <typename Number>
  Hierarchy<Number>
  build_hierarchy(const TreeMesh &mesh, int degree, Variant variant,
                  const MultigridConfig &config = {});

  class DivergenceError : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };

  struct SolverResult
  {
    std::vector<double> x;
    int                 iterations = 0;
    double              initial_residual = 0;
    double              final_residual   = 0;
  };

  using Preconditioner = std::function<void(std::span<double>, std::span<const double>)>;

  /// Preconditioned CG from x = 0 until ||r|| <= rtol ||r_0||; throws
  /// DivergenceError after `max_iterations`.
  SolverResult
  pcg_solve(const LaplaceOperator<double> &A, std::span<const double> b,
            const Preconditioner &preconditioner, double rtol = 1e-4, int max_iterations = 100);

  /// Wrap a hierarchy as preconditioner of a double-precision CG.
  template <typename Number>
  Preconditioner
  make_preconditioner(const Hierarchy<Number> &h);

  // ------------------------------------------------------------ inline

  template <typename Number, typename Op>
  void
  chebyshev_smooth(const Op &op, std::span<const Number> inv_diag, std::span<Number> x,
                   std::span<const Number> b, int k, double lambda_lo, double lambda_hi,
                   bool x_is_zero)
  {
    if (k <= 0)
      return;
    const std::size_t   n = x.size();
    std::vector<Number> r(n), d(n);
    auto residual = [&] {
      op.vmult(std::span<Number>(r), std::span<const Number>(x.data(), n));
      for (std::size_t i = 0; i < n; ++i)
        r[i] = b[i] - r[i];
    };
    if (x_is_zero)
      std::copy(b.begin(), b.end(), r.begin());
    else
      residual();

    const double theta = 0.5 * (lambda_hi + lambda_lo);
    const double delta = 0.5 * (lambda_hi - lambda_lo);
    for (std::size_t i = 0; i < n; ++i)
      {
        d[i] = static_cast<Number>(inv_diag[i] * r[i] / theta);
        x[i] += d[i];
      }
    if (delta <= 1e-12 * theta)
      {
        // degenerate interval: damped Jacobi with the optimal factor
        for (int it = 1; it < k; ++it)
          {
            residual();
            for (std::size_t i = 0; i < n; ++i)
              x[i] += static_cast<Number>(inv_diag[i] * r[i] / theta);
          }
        return;
      }
    const double sigma   = theta / delta;
    double       rho_old = 1.0 / sigma;
    for (int it = 1; it < k; ++it)
      {
        residual();
        const double rho = 1.0 / (2.0 * sigma - rho_old);
        const auto   c1  = static_cast<Number>(rho * rho_old);
        const auto   c2  = static_cast<Number>(2.0 * rho / delta);
        for (std::size_t i = 0; i < n; ++i)
          {
            d[i] = c1 * d[i] + c2 * inv_diag[i] * r[i];
            x[i] += d[i];
          }
        rho_old = rho;
      }
  }

} // namespace adaptmg
