#include <adaptmg/benchmark.h>
#include <adaptmg/problem.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace adaptmg
{
  const char *
  to_string(Precision p)
  {
    return p == Precision::double_precision ? "double" : "single";
  }

  Precision
  parse_precision(const std::string &name)
  {
    if (name == "double")
      return Precision::double_precision;
    if (name == "single" || name == "float")
      return Precision::single_precision;
    throw std::invalid_argument("unknown precision '" + name + "'");
  }

  void
  BenchmarkConfig::validate() const
  {
    if (case_name != "octant" && case_name != "shell" && case_name != "cube" && case_name != "gaussian")
      throw std::invalid_argument("unknown case '" + case_name + "'");
    if (L < 0)
      throw std::invalid_argument("L must be non-negative");
    if (case_name == "shell" && L < 5)
      throw std::invalid_argument("shell requires L >= 5");
    if (p < 1)
      throw std::invalid_argument("p must be at least 1");
    if (variant == Variant::polynomial && p < 2)
      throw std::invalid_argument("polynomial coarsening requires p >= 2");
    if (pc_continuation == Variant::polynomial)
      throw std::invalid_argument("pc continuation must be LS or GC");
    if (ranks < 1)
      throw std::invalid_argument("rank count must be at least 1");
    if (smoother_degree < 0)
      throw std::invalid_argument("smoother degree must be non-negative");
    if (!(rtol > 0 && rtol < 1))
      throw std::invalid_argument("rtol must lie in (0, 1)");
    if (max_iterations < 1)
      throw std::invalid_argument("max iterations must be positive");
    if (!(hanging_weight > 0))
      throw std::invalid_argument("hanging-node weight must be positive");
  }

  TreeMesh
  make_case_mesh(const std::string &case_name, int L)
  {
    if (case_name == "octant" || case_name == "gaussian")
      return refine_octant(L);
    if (case_name == "shell")
      return refine_shell(L);
    if (case_name == "cube")
      return refine_uniform(L, 3);
    throw std::invalid_argument("unknown case '" + case_name + "'");
  }

  // ------------------------------------------------------------- solving

  namespace
  {
    // rhs and error integrals of the Gaussian need far more points than the
    // element degree suggests: the solution decays on a length of 0.01
    constexpr int gaussian_extra_points = 8;

    struct Problem
    {
      DofMap                        dofs;
      ConstraintSet                 constraints;
      std::vector<double>           rhs;
      std::optional<GaussianSolution> exact;
    };

    Problem
    setup_problem(const TreeMesh &mesh, const std::string &case_name, int p)
    {
      Problem pb;
      pb.dofs = distribute_dofs(mesh, mesh.active_cells(), p);
      if (case_name == "gaussian")
        {
          pb.exact = GaussianSolution{};
          const auto &g = *pb.exact;
          pb.constraints =
            ConstraintSet::merge(build_hanging_node_constraints(mesh, pb.dofs),
                                 build_dirichlet_constraints(pb.dofs, [&](const Point &x) { return g.value(x); }));
          pb.rhs = assemble_rhs(mesh, pb.dofs, pb.constraints,
                                [&](const Point &x) { return g.laplacian_rhs(x); },
                                p + gaussian_extra_points);
        }
      else
        {
          pb.constraints = build_level_constraints(mesh, pb.dofs);
          pb.rhs         = assemble_rhs(mesh, pb.dofs, pb.constraints, [](const Point &) { return 1.0; });
        }
      return pb;
    }

    MultigridConfig
    mg_config(const BenchmarkConfig &c)
    {
      MultigridConfig m;
      m.smoother_degree = c.smoother_degree;
      m.pc_continuation = c.pc_continuation;
      return m;
    }

    template <typename Number>
    SolverResult
    solve(const TreeMesh &mesh, const BenchmarkConfig &c, const LaplaceOperator<double> &A,
          std::span<const double> b)
    {
      const auto h = build_hierarchy<Number>(mesh, c.p, c.variant, mg_config(c));
      return pcg_solve(A, b, make_preconditioner(h), c.rtol, c.max_iterations);
    }

    std::string
    format_double(double v, const char *fmt = "%.6g")
    {
      char buf[64];
      std::snprintf(buf, sizeof(buf), fmt, v);
      return buf;
    }
  } // namespace

  ResultRow
  run_benchmark(const BenchmarkConfig &config)
  {
    config.validate();
    ResultRow row;
    row.config     = config;
    const auto mesh = make_case_mesh(config.case_name, config.L);
    auto       pb   = setup_problem(mesh, config.case_name, config.p);
    row.n_dofs      = pb.dofs.n_dofs();

    const LaplaceOperator<double> A(mesh, pb.dofs, pb.constraints);
    A.subtract_inhomogeneities(pb.rhs);
    try
      {
        auto res = config.precision == Precision::single_precision
                     ? solve<float>(mesh, config, A, pb.rhs)
                     : solve<double>(mesh, config, A, pb.rhs);
        row.iterations = res.iterations;
        if (pb.exact)
          {
            pb.constraints.distribute(res.x);
            const auto &g = *pb.exact;
            const auto  e = compute_errors(mesh, pb.dofs, res.x, [&](const Point &x) { return g.value(x); },
                                          config.p + gaussian_extra_points);
            row.l2_error   = e.l2;
            row.linf_error = e.linf;
          }
      }
    catch (const DivergenceError &)
      {
        row.diverged   = true;
        row.iterations = config.max_iterations;
      }

    const auto layout =
      make_level_layout(mesh, config.variant, config.p, config.hanging_weight, config.pc_continuation);
    for (const auto &l : layout.levels)
      row.level_cells.push_back(l.size());
    const auto model = config.policy == PartitionPolicy::first_child
                         ? first_child_policy(layout,
                                              partition_active_sfc(mesh, config.ranks, config.hanging_weight),
                                              config.ranks)
                         : repartition_levels_sfc(layout, config.ranks);
    row.metrics = compute_metrics(layout, model);
    return row;
  }

  std::vector<double>
  apply_vcycle(const BenchmarkConfig &config, const std::vector<double> &b)
  {
    config.validate();
    const auto          mesh = make_case_mesh(config.case_name, config.L);
    std::vector<double> x(b.size());
    if (config.precision == Precision::single_precision)
      {
        const auto         h = build_hierarchy<float>(mesh, config.p, config.variant, mg_config(config));
        std::vector<float> bf(b.begin(), b.end()), xf(b.size());
        h.vcycle(xf, bf);
        std::copy(xf.begin(), xf.end(), x.begin());
      }
    else
      {
        const auto h = build_hierarchy<double>(mesh, config.p, config.variant, mg_config(config));
        h.vcycle(x, b);
      }
    return x;
  }

  std::string
  ResultRow::csv_header()
  {
    return "case,L,p,variant,P,policy,k,precision,iterations,n_dofs,W_s,W_p,wl_eff,h_eff,v_eff,l2_error";
  }

  std::string
  ResultRow::to_csv_row() const
  {
    std::ostringstream s;
    const auto        &c = config;
    s << c.case_name << ',' << c.L << ',' << c.p << ',' << to_string(c.variant) << ',' << c.ranks << ','
      << to_string(c.policy) << ',' << c.smoother_degree << ',' << to_string(c.precision) << ','
      << (diverged ? std::string("diverged") : std::to_string(iterations)) << ',' << n_dofs << ','
      << metrics.serial_workload << ',' << metrics.parallel_workload << ','
      << format_double(metrics.workload_efficiency) << ',' << format_double(metrics.horizontal_efficiency)
      << ',' << format_double(metrics.vertical_efficiency) << ','
      << (l2_error ? format_double(*l2_error, "%.6e") : std::string());
    return s.str();
  }

  std::string
  ResultRow::to_json() const
  {
    const auto          &c = config;
    nlohmann::ordered_json j;
    j["schema_version"] = result_schema_version;
    j["case"]       = c.case_name;
    j["L"]          = c.L;
    j["p"]          = c.p;
    j["variant"]    = to_string(c.variant);
    j["P"]          = c.ranks;
    j["policy"]     = to_string(c.policy);
    j["k"]          = c.smoother_degree;
    j["precision"]  = to_string(c.precision);
    j["iterations"] = diverged ? nlohmann::ordered_json("diverged") : nlohmann::ordered_json(iterations);
    j["n_dofs"]     = n_dofs;
    j["W_s"]        = metrics.serial_workload;
    j["W_p"]        = metrics.parallel_workload;
    j["wl_eff"]     = metrics.workload_efficiency;
    j["h_eff"]      = metrics.horizontal_efficiency;
    j["v_eff"]      = metrics.vertical_efficiency;
    j["l2_error"]   = l2_error ? nlohmann::ordered_json(*l2_error) : nlohmann::ordered_json(nullptr);
    j["linf_error"] = linf_error ? nlohmann::ordered_json(*linf_error) : nlohmann::ordered_json(nullptr);
    j["level_cells"] = level_cells;
    return j.dump();
  }

  // ---------------------------------------------------------- convergence

  std::vector<ConvergenceRow>
  run_convergence_study(int p, int L_min, int L_max, Variant variant)
  {
    if (L_min < 0 || L_max < L_min)
      throw std::invalid_argument("invalid refinement range");
    std::vector<ConvergenceRow> rows;
    for (int L = L_min; L <= L_max; ++L)
      {
        BenchmarkConfig c;
        c.case_name      = "gaussian";
        c.L              = L;
        c.p              = p;
        c.variant        = variant;
        c.rtol           = 1e-10;
        c.max_iterations = 200;
        const auto r     = run_benchmark(c);
        if (r.diverged)
          throw DivergenceError("convergence study: solver diverged at L = " + std::to_string(L));
        ConvergenceRow row;
        row.L          = L;
        row.n_dofs     = r.n_dofs;
        row.iterations = r.iterations;
        row.l2_error   = *r.l2_error;
        if (!rows.empty())
          row.order = std::log2(rows.back().l2_error / row.l2_error);
        rows.push_back(row);
      }
    return rows;
  }

  std::string
  convergence_csv(int p, const std::vector<ConvergenceRow> &rows)
  {
    std::ostringstream s;
    s << "case,p,L,n_dofs,iterations,l2_error,order\n";
    for (const auto &r : rows)
      s << "gaussian," << p << ',' << r.L << ',' << r.n_dofs << ',' << r.iterations << ','
        << format_double(r.l2_error, "%.6e") << ',' << (r.order ? format_double(*r.order, "%.4f") : "")
        << '\n';
    return s.str();
  }

  std::string
  convergence_json(int p, const std::vector<ConvergenceRow> &rows)
  {
    auto j = nlohmann::ordered_json::array();
    for (const auto &r : rows)
      j.push_back({{"case", "gaussian"},
                   {"p", p},
                   {"L", r.L},
                   {"n_dofs", r.n_dofs},
                   {"iterations", r.iterations},
                   {"l2_error", r.l2_error},
                   {"order", r.order ? nlohmann::ordered_json(*r.order) : nlohmann::ordered_json(nullptr)}});
    return j.dump(2);
  }

  // -------------------------------------------------------------- metrics

  std::vector<MetricsRow>
  run_metrics_sweep(const std::string &case_name, int L, const std::vector<int> &ranks,
                    const std::vector<PartitionPolicy> &policies, const std::vector<Variant> &variants,
                    double hanging_weight)
  {
    const auto              mesh = make_case_mesh(case_name, L);
    std::vector<MetricsRow> rows;
    for (const auto v : variants)
      {
        const auto layout = make_level_layout(mesh, v, v == Variant::polynomial ? 4 : 1, hanging_weight);
        for (const int P : ranks)
          for (const auto policy : policies)
            {
              const auto model = policy == PartitionPolicy::first_child
                                   ? first_child_policy(layout, partition_active_sfc(mesh, P, hanging_weight), P)
                                   : repartition_levels_sfc(layout, P);
              rows.push_back({case_name, L, v, compute_metrics(layout, model)});
            }
      }
    return rows;
  }

  std::string
  metrics_csv(const std::vector<MetricsRow> &rows)
  {
    std::ostringstream s;
    s << "case,L,variant,P,policy,n_levels,W_s,W_p,wl_eff,h_eff,v_eff,level_min,level_max,level_avg\n";
    for (const auto &r : rows)
      {
        const auto &m = r.report;
        s << r.case_name << ',' << r.L << ',' << to_string(r.variant) << ',' << m.n_ranks << ','
          << to_string(m.policy) << ',' << m.n_levels << ',' << m.serial_workload << ','
          << m.parallel_workload << ',' << format_double(m.workload_efficiency) << ','
          << format_double(m.horizontal_efficiency) << ',' << format_double(m.vertical_efficiency) << ',';
        // per-level profile, levels separated by ';'
        for (std::size_t l = 0; l < m.levels.size(); ++l)
          s << (l ? ";" : "") << m.levels[l].min;
        s << ',';
        for (std::size_t l = 0; l < m.levels.size(); ++l)
          s << (l ? ";" : "") << m.levels[l].max;
        s << ',';
        for (std::size_t l = 0; l < m.levels.size(); ++l)
          s << (l ? ";" : "") << format_double(m.levels[l].avg, "%.2f");
        s << '\n';
      }
    return s.str();
  }

  std::string
  metrics_json(const std::vector<MetricsRow> &rows)
  {
    auto j = nlohmann::ordered_json::array();
    for (const auto &r : rows)
      {
        auto entry = nlohmann::ordered_json::parse(r.report.to_json());
        nlohmann::ordered_json head;
        head["case"]    = r.case_name;
        head["L"]       = r.L;
        head["variant"] = to_string(r.variant);
        head.update(entry);
        j.push_back(head);
      }
    return j.dump(2);
  }

  std::string
  mesh_statistics_json(const std::string &case_name, int L, const std::vector<int> &degrees)
  {
    const auto             mesh  = make_case_mesh(case_name, L);
    const auto             stats = compute_statistics(mesh);
    nlohmann::ordered_json j;
    j["case"]            = case_name;
    j["L"]               = L;
    j["n_levels"]        = stats.n_levels;
    j["active_cells"]    = stats.n_active;
    j["hanging_cells"]   = stats.n_active_hanging;
    j["hanging_percent"] = 100.0 * static_cast<double>(stats.n_active_hanging) / stats.n_active;
    j["ls_cells"]        = stats.ls_cells;
    j["gc_cells"]        = stats.gc_cells;
    j["gc_hanging_cells"] = stats.gc_hanging_cells;
    auto &d              = j["dofs"] = nlohmann::ordered_json::object();
    const auto active    = mesh.active_cells();
    for (int p : degrees)
      d[std::to_string(p)] = distribute_dofs(mesh, active, p).n_dofs();
    return j.dump(2);
  }

  // -------------------------------------------------------------- presets

  namespace
  {
    BenchmarkConfig
    make(const std::string &c, int L, int p, Variant v, Precision prec = Precision::double_precision)
    {
      BenchmarkConfig b;
      b.case_name = c;
      b.L         = L;
      b.p         = p;
      b.variant   = v;
      b.precision = prec;
      return b;
    }

    const std::map<std::string, std::vector<BenchmarkConfig>> &
    presets()
    {
      static const auto table = [] {
        std::map<std::string, std::vector<BenchmarkConfig>> t;
        const auto LS = Variant::local_smoothing, GC = Variant::global_coarsening, PC = Variant::polynomial;
        // LS and GC iteration counts on the octant and shell meshes
        for (auto v : {LS, GC})
          {
            for (int p : {1, 4})
              for (int L : {3, 4, 5, 6})
                t["octant"].push_back(make("octant", L, p, v));
            for (int p : {1, 4})
              for (int L : {5, 6})
                t["shell"].push_back(make("shell", L, p, v));
            t["shell"].push_back(make("shell", 7, 1, v));
            for (int p : {1, 2})
              t["cube"].push_back(make("cube", 3, p, v));
          }
        // octant L = 6, p = 4 (2.3M DoFs) is left out of the precision sweep
        for (const auto &name : {"octant", "shell", "cube"})
          for (auto c : t[name])
            if (!(c.case_name == "octant" && c.L == 6 && c.p == 4))
              {
                c.precision = Precision::single_precision;
                t["single"].push_back(c);
              }
        for (int L : {3, 4, 5})
          t["pc"].push_back(make("octant", L, 4, PC));
        t["gaussian"] = {make("gaussian", 5, 1, GC), make("gaussian", 5, 2, GC)};
        t["smoke"]    = {make("octant", 3, 1, LS), make("octant", 3, 1, GC), make("octant", 3, 2, PC)};
        return t;
      }();
      return table;
    }
  } // namespace

  std::vector<std::string>
  preset_names()
  {
    std::vector<std::string> names;
    for (const auto &[name, _] : presets())
      names.push_back(name);
    return names;
  }

  std::vector<BenchmarkConfig>
  preset(const std::string &name)
  {
    const auto it = presets().find(name);
    if (it == presets().end())
      throw std::invalid_argument("unknown preset '" + name + "'");
    return it->second;
  }

} // namespace adaptmg
