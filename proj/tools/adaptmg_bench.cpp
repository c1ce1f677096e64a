#include <adaptmg/benchmark.h>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

using namespace adaptmg;

namespace
{
  const std::map<std::string, Variant> variant_map{{"LS", Variant::local_smoothing},
                                                   {"GC", Variant::global_coarsening},
                                                   {"PC", Variant::polynomial}};
  const std::map<std::string, PartitionPolicy> policy_map{{"first-child", PartitionPolicy::first_child},
                                                          {"sfc", PartitionPolicy::sfc_per_level}};
  const std::map<std::string, Precision> precision_map{{"double", Precision::double_precision},
                                                       {"single", Precision::single_precision}};

  struct Output
  {
    std::string format = "csv";
    std::string path;

    void
    add_to(CLI::App *app)
    {
      app->add_option("--output", format, "Result format")->check(CLI::IsMember({"csv", "json"}));
      app->add_option("--output-path", path, "Write results to this file instead of stdout");
    }

    void
    write(const std::string &text) const
    {
      if (path.empty())
        {
          std::cout << text;
          return;
        }
      std::ofstream out(path);
      if (!out)
        throw std::runtime_error("cannot open '" + path + "'");
      out << text;
    }
  };

  std::string
  join_json(const std::vector<std::string> &items)
  {
    std::string s = "[\n";
    for (std::size_t i = 0; i < items.size(); ++i)
      s += "  " + items[i] + (i + 1 < items.size() ? ",\n" : "\n");
    return s + "]\n";
  }
} // namespace

int
main(int argc, char **argv)
{
  CLI::App app{"Adaptive geometric multigrid benchmark harness"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file");

  // bench
  BenchmarkConfig cfg;
  std::string     preset_name;
  Output          bench_out;
  auto           *bench = app.add_subcommand("bench", "Solve one configuration or a named preset");
  bench->add_option("--case", cfg.case_name, "Benchmark case")
    ->check(CLI::IsMember({"octant", "shell", "cube", "gaussian"}))
    ->capture_default_str();
  bench->add_option("-L,--level", cfg.L, "Number of refinements")->capture_default_str();
  bench->add_option("-p,--degree", cfg.p, "Polynomial degree")->capture_default_str();
  bench->add_option("--variant", cfg.variant, "Multigrid variant (LS, GC, PC)")
    ->transform(CLI::CheckedTransformer(variant_map));
  bench->add_option("--pc-continuation", cfg.pc_continuation, "Geometric levels below PC (LS, GC)")
    ->transform(CLI::CheckedTransformer(variant_map));
  bench->add_option("--ranks", cfg.ranks, "Simulated rank count")->capture_default_str();
  bench->add_option("--policy", cfg.policy, "Partition policy (first-child, sfc)")
    ->transform(CLI::CheckedTransformer(policy_map));
  bench->add_option("-k,--smoother-degree", cfg.smoother_degree, "Chebyshev degree")->capture_default_str();
  bench->add_option("--rtol", cfg.rtol, "Relative residual reduction")->capture_default_str();
  bench->add_option("--max-iterations", cfg.max_iterations, "CG iteration cap")->capture_default_str();
  bench->add_option("--precision", cfg.precision, "Multigrid precision (double, single)")
    ->transform(CLI::CheckedTransformer(precision_map));
  bench->add_option("--hanging-weight", cfg.hanging_weight, "Partition weight of hanging-node cells")
    ->capture_default_str();
  bench->add_option("--preset", preset_name, "Run a named list of configurations")
    ->check(CLI::IsMember(preset_names()));
  bench_out.add_to(bench);

  // convergence
  int     conv_p = 1, conv_min = 2, conv_max = 5;
  Variant conv_variant = Variant::global_coarsening;
  Output  conv_out;
  auto   *conv = app.add_subcommand("convergence", "Error study with the Gaussian solution");
  conv->add_option("-p,--degree", conv_p, "Polynomial degree")->capture_default_str();
  conv->add_option("--min-level", conv_min, "Coarsest refinement level")->capture_default_str();
  conv->add_option("--max-level", conv_max, "Finest refinement level")->capture_default_str();
  conv->add_option("--variant", conv_variant, "Multigrid variant (LS, GC, PC)")
    ->transform(CLI::CheckedTransformer(variant_map));
  conv_out.add_to(conv);

  // metrics
  std::string                  met_case = "octant";
  int                          met_L    = 5;
  std::vector<int>             met_ranks{1, 8, 16, 32};
  std::vector<PartitionPolicy> met_policies{PartitionPolicy::first_child, PartitionPolicy::sfc_per_level};
  std::vector<Variant>         met_variants{Variant::local_smoothing, Variant::global_coarsening};
  double                       met_weight = 2.0;
  Output                       met_out;
  auto *met = app.add_subcommand("metrics", "Partition metrics sweep over rank counts and policies");
  met->add_option("--case", met_case)->check(CLI::IsMember({"octant", "shell", "cube"}))->capture_default_str();
  met->add_option("-L,--level", met_L)->capture_default_str();
  met->add_option("--ranks", met_ranks, "Rank counts")->delimiter(',');
  met->add_option("--policy", met_policies, "Policies")
    ->delimiter(',')
    ->transform(CLI::CheckedTransformer(policy_map));
  met->add_option("--variant", met_variants, "Variants")
    ->delimiter(',')
    ->transform(CLI::CheckedTransformer(variant_map));
  met->add_option("--hanging-weight", met_weight)->capture_default_str();
  met_out.add_to(met);

  // mesh-stats
  std::string      ms_case = "octant";
  int              ms_L    = 5;
  std::vector<int> ms_degrees{1, 4};
  Output           ms_out;
  auto *ms = app.add_subcommand("mesh-stats", "Cell, hanging-node and DoF counts of a case (JSON)");
  ms->add_option("--case", ms_case)->check(CLI::IsMember({"octant", "shell", "cube"}))->capture_default_str();
  ms->add_option("-L,--level", ms_L)->capture_default_str();
  ms->add_option("--degrees", ms_degrees)->delimiter(',');
  ms->add_option("--output-path", ms_out.path);

  try
    {
      app.parse(argc, argv);
    }
  catch (const CLI::ParseError &e)
    {
      const int code = app.exit(e);
      return code == 0 ? 0 : 1;
    }

  try
    {
      if (*bench)
        {
          const auto configs = preset_name.empty() ? std::vector<BenchmarkConfig>{cfg} : preset(preset_name);
          for (const auto &c : configs)
            c.validate();
          bool                     diverged = false;
          std::string              csv      = ResultRow::csv_header() + "\n";
          std::vector<std::string> json;
          for (const auto &c : configs)
            {
              const auto row = run_benchmark(c);
              diverged |= row.diverged;
              csv += row.to_csv_row() + "\n";
              json.push_back(row.to_json());
            }
          bench_out.write(bench_out.format == "csv" ? csv : join_json(json));
          if (diverged)
            {
              std::cerr << "error: the solver did not converge\n";
              return 2;
            }
        }
      else if (*conv)
        {
          const auto rows = run_convergence_study(conv_p, conv_min, conv_max, conv_variant);
          if (conv_out.format == "csv")
            conv_out.write(convergence_csv(conv_p, rows));
          else
            conv_out.write(convergence_json(conv_p, rows) + "\n");
        }
      else if (*met)
        {
          const auto rows = run_metrics_sweep(met_case, met_L, met_ranks, met_policies, met_variants, met_weight);
          met_out.write(met_out.format == "csv" ? metrics_csv(rows) : metrics_json(rows) + "\n");
        }
      else if (*ms)
        ms_out.write(mesh_statistics_json(ms_case, ms_L, ms_degrees) + "\n");
    }
  catch (const DivergenceError &e)
    {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  catch (const std::invalid_argument &e)
    {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  catch (const std::exception &e)
    {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  return 0;
}
