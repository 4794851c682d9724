// Command line front end: simulate copula samples, fit a density to a data
// set, run Monte Carlo benchmarks and compare density grids.

#include "probitcop/benchmark.hpp"
#include "probitcop/copula.hpp"
#include "probitcop/estimators.hpp"
#include "probitcop/grid.hpp"
#include "probitcop/transforms.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace probitcop;

namespace {

fs::path
prepare_dir(const std::string& dir)
{
  fs::path p = dir.empty() ? fs::path(default_output_dir()) : fs::path(dir);
  fs::create_directories(p);
  return p;
}

std::ofstream
open_output(const fs::path& path)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "Probit-transformation kernel copula density estimation" };
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "draw a sample from a copula and write it as CSV");
  std::string sim_copula;
  std::size_t sim_n = 500;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  sim->add_option("-c,--copula", sim_copula, "model, e.g. gaussian:rho=0.59 or clayton:tau=0.4")
    ->required();
  sim->add_option("-n,--n", sim_n, "sample size")->check(CLI::PositiveNumber);
  sim->add_option("-s,--seed", sim_seed, "random seed");
  sim->add_option("-o,--output", sim_out, "output CSV file (default: standard output)");

  // fit
  auto* fit = app.add_subcommand("fit", "estimate the copula density of a two-column CSV");
  std::string fit_input, fit_estimator_spec = "loclik:p=2,bw=knn", fit_dir, fit_prefix;
  std::string fit_lattice = "rank";
  FitOptions fit_opt;
  fit->add_option("input", fit_input, "two-column CSV data set")->required();
  fit->add_option("-e,--estimator", fit_estimator_spec, "estimator specification")
    ->capture_default_str();
  fit->add_option("-N,--grid", fit_opt.grid, "lattice size")->capture_default_str();
  fit->add_option("--lattice", fit_lattice, "rank or midpoint")
    ->check(CLI::IsMember({ "rank", "midpoint" }))
    ->capture_default_str();
  fit->add_flag("--renormalize", fit_opt.renormalize, "scale the grid to integrate to one");
  fit->add_option("-s,--seed", fit_opt.seed, "seed recorded in the manifest");
  fit->add_option("-t,--threads", fit_opt.threads, "worker threads (0 = all)")
    ->capture_default_str();
  fit->add_option("-d,--output-dir", fit_dir,
                  std::string("output directory (default: $") + output_dir_env + " or .)");
  fit->add_option("-p,--prefix", fit_prefix, "output file prefix (default: input stem)");

  // bench
  auto* bench = app.add_subcommand("bench", "Monte Carlo comparison of estimators");
  std::string bench_config;
  std::string o_copulas, o_estimators, o_n, o_m, o_grid, o_seed, o_threads, o_dir;
  bench->add_option("-c,--config", bench_config, "key = value configuration file");
  bench->add_option("--copulas", o_copulas, "';'-separated copula models");
  bench->add_option("--estimators", o_estimators, "';'-separated estimator specifications");
  bench->add_option("--n", o_n, "sample sizes, ';'-separated");
  bench->add_option("-M,--replications", o_m, "replications per cell");
  bench->add_option("-N,--grid", o_grid, "lattice size");
  bench->add_option("-s,--seed", o_seed, "master seed");
  bench->add_option("-t,--threads", o_threads, "worker threads (0 = all)");
  bench->add_option("-d,--output-dir", o_dir,
                    std::string("output directory (default: $") + output_dir_env + " or .)");
  bool bench_quiet = false;
  bench->add_flag("-q,--quiet", bench_quiet, "no progress output");

  // ise
  auto* ise = app.add_subcommand("ise", "integrated squared error between two grid CSVs");
  std::string ise_est, ise_truth;
  ise->add_option("estimate", ise_est, "grid CSV")->required();
  ise->add_option("truth", ise_truth, "grid CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const CopulaModel model = CopulaModel::parse(sim_copula);
      const auto pts = model.sample(sim_n, sim_seed);
      if (sim_out.empty()) {
        write_csv(std::cout, pts);
      } else {
        auto out = open_output(sim_out);
        write_csv(out, pts);
      }
    } else if (*fit) {
      fit_opt.lattice = fit_lattice == "rank" ? Lattice::rank : Lattice::midpoint;
      const EstimatorSpec spec = EstimatorSpec::parse(fit_estimator_spec);
      FitResult res = fit_dataset_file(fit_input, spec, fit_opt);
      const fs::path dir = prepare_dir(fit_dir);
      const std::string stem =
        fit_prefix.empty() ? fs::path(fit_input).stem().string() : fit_prefix;
      const fs::path grid_path = dir / (stem + "_grid.csv");
      const fs::path manifest_path = dir / (stem + "_manifest.json");
      res.manifest["outputs"] = { { "grid", grid_path.string() },
                                  { "manifest", manifest_path.string() } };
      res.grid.write_csv_file(grid_path.string());
      auto out = open_output(manifest_path);
      out << res.manifest.dump(2) << '\n';
      std::cout << res.manifest.dump(2) << '\n';
    } else if (*bench) {
      BenchmarkConfig cfg;
      if (!bench_config.empty())
        cfg.read_file(bench_config);
      const std::pair<const char*, const std::string*> flags[] = {
        { "copulas", &o_copulas }, { "estimators", &o_estimators }, { "n", &o_n },
        { "replications", &o_m },  { "grid", &o_grid },             { "seed", &o_seed },
        { "threads", &o_threads }, { "output_dir", &o_dir }
      };
      for (const auto& [key, value] : flags)
        if (!value->empty())
          cfg.set(key, *value);
      cfg.validate();
      const fs::path dir = prepare_dir(cfg.output_dir);
      auto progress = [&](std::size_t done, std::size_t total) {
        if (!bench_quiet)
          std::cerr << "\r" << done << "/" << total << " replications" << std::flush;
      };
      const BenchmarkReport report = run_benchmark(cfg, progress);
      if (!bench_quiet)
        std::cerr << '\n';
      {
        auto out = open_output(dir / "report.csv");
        report.write_csv(out);
      }
      {
        auto out = open_output(dir / "replications.csv");
        report.write_replications_csv(out);
      }
      report.write_csv(std::cout);
      for (const auto& c : report.cells)
        for (const auto& e : c.errors)
          std::cerr << "failure in " << c.copula << " / " << c.estimator << ": " << e << '\n';
    } else if (*ise) {
      const DensityGrid a = DensityGrid::read_csv_file(ise_est);
      const DensityGrid b = DensityGrid::read_csv_file(ise_truth);
      std::cout << std::setprecision(12) << ise_grid(a, b) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
