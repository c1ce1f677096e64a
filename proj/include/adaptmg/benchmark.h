#pragma once

#include <adaptmg/multigrid.h>
#include <adaptmg/partition.h>

#include <optional>
#include <string>
#include <vector>

namespace adaptmg
{
  enum class Precision
  {
    double_precision,
    single_precision
  };

  const char *
  to_string(Precision p);

  Precision
  parse_precision(const std::string &name);

  struct BenchmarkConfig
  {
    std::string     case_name = "octant"; // octant | shell | cube | gaussian
    int             L         = 4;
    int             p         = 1;
    Variant         variant   = Variant::local_smoothing;
    Variant         pc_continuation = Variant::global_coarsening;
    int             ranks           = 1;
    PartitionPolicy policy          = PartitionPolicy::first_child;
    int             smoother_degree = 3;
    double          rtol            = 1e-4;
    int             max_iterations  = 100;
    Precision       precision       = Precision::double_precision;
    double          hanging_weight  = 2.0;

    /// Throws std::invalid_argument for unsupported combinations.
    void
    validate() const;
  };

  /// Mesh of a benchmark case (gaussian uses the octant mesh).
  TreeMesh
  make_case_mesh(const std::string &case_name, int L);

  /// Bumped whenever the columns of ResultRow change.
  inline constexpr int result_schema_version = 1;

  struct ResultRow
  {
    BenchmarkConfig       config;
    bool                  diverged   = false;
    int                   iterations = 0;
    std::size_t           n_dofs     = 0;
    std::vector<std::size_t> level_cells;
    MetricsReport         metrics;
    std::optional<double> l2_error;
    std::optional<double> linf_error;

    static std::string
    csv_header();

    std::string
    to_csv_row() const;

    /// CSV fields plus schema version, per-level cell counts and the
    /// maximum error.
    std::string
    to_json() const;
  };

  /// Mesh, hierarchy, PCG solve and metrics for one configuration. A solver
  /// divergence is reported in the row, not thrown.
  ResultRow
  run_benchmark(const BenchmarkConfig &config);

  /// One V-cycle of the configured hierarchy applied to `b` (for
  /// side-by-side comparisons of variants).
  std::vector<double>
  apply_vcycle(const BenchmarkConfig &config, const std::vector<double> &b);

  struct ConvergenceRow
  {
    int                   L = 0;
    std::size_t           n_dofs     = 0;
    int                   iterations = 0;
    double                l2_error   = 0;
    std::optional<double> order; // log2(e_{L-1} / e_L)
  };

  /// Gaussian manufactured solution over a range of refinement levels.
  std::vector<ConvergenceRow>
  run_convergence_study(int p, int L_min, int L_max, Variant variant = Variant::global_coarsening);

  std::string
  convergence_csv(int p, const std::vector<ConvergenceRow> &rows);

  std::string
  convergence_json(int p, const std::vector<ConvergenceRow> &rows);

  struct MetricsRow
  {
    std::string   case_name;
    int           L = 0;
    Variant       variant = Variant::local_smoothing;
    MetricsReport report;
  };

  /// Partition metrics for every (variant, P, policy) combination.
  std::vector<MetricsRow>
  run_metrics_sweep(const std::string &case_name, int L, const std::vector<int> &ranks,
                    const std::vector<PartitionPolicy> &policies,
                    const std::vector<Variant> &variants = {Variant::local_smoothing,
                                                            Variant::global_coarsening},
                    double hanging_weight = 2.0);

  std::string
  metrics_csv(const std::vector<MetricsRow> &rows);

  std::string
  metrics_json(const std::vector<MetricsRow> &rows);

  /// Per-level cell counts, hanging-node shares and DoF counts as JSON.
  std::string
  mesh_statistics_json(const std::string &case_name, int L, const std::vector<int> &degrees);

  std::vector<std::string>
  preset_names();

  /// Named benchmark configuration lists; throws for unknown names.
  std::vector<BenchmarkConfig>
  preset(const std::string &name);

} // namespace adaptmg
