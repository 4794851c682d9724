#pragma once

#include "probitcop/copula.hpp"
#include "probitcop/estimators.hpp"
#include "probitcop/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace probitcop {

//! integrated squared error between two grids on the same lattice:
//! the mean squared difference times N^2 / (N + 1)^2 on the rank lattice,
//! the plain mean on the midpoint lattice.
//! @throws std::invalid_argument if the grids differ in size or lattice.
double
ise_grid(const DensityGrid& est, const DensityGrid& truth);

//! environment variable providing the default output directory.
inline constexpr const char* output_dir_env = "PROBITCOP_OUTPUT_DIR";

//! Monte Carlo study description. Config files hold one `key = value` per
//! line ('#' starts a comment); list values are separated by ';':
//!   copulas     = gaussian:rho=0.59; clayton:theta=2.5
//!   estimators  = loclik:p=1; loclik:p=2; mirror
//!   n           = 200; 500
//!   replications = 100
//!   grid        = 64
//!   seed        = 20240101
//!   threads     = 0
//!   output_dir  = results
struct BenchmarkConfig
{
  std::vector<CopulaModel> copulas;
  std::vector<EstimatorSpec> estimators;
  std::vector<std::size_t> sizes{ 500 };
  std::size_t replications{ 100 };
  std::size_t grid{ 64 };
  std::uint64_t seed{ 1 };
  unsigned threads{ 0 };
  std::string output_dir;

  //! sets one key; the keys are those of the file format.
  //! @throws std::invalid_argument for unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);
  //! @throws std::invalid_argument naming the offending line.
  void read(std::istream& in);
  void read_file(const std::string& path);
  //! @throws std::invalid_argument unless M >= 1, N >= 2 and the copula,
  //!   estimator and size lists are non-empty (sizes >= 20).
  void validate() const;
};

//! default output directory: the environment variable if set, else ".".
std::string
default_output_dir();

//! seed of the sample for one (copula, size, replication) cell, derived
//! from the master seed by a counter-based mix.
std::uint64_t
replication_seed(std::uint64_t master, std::size_t copula, std::size_t size,
                 std::size_t replication);

struct BenchmarkCell
{
  std::string copula;
  std::string estimator;
  std::size_t n{ 0 };
  std::size_t replications{ 0 };
  std::vector<double> ise; // per replication, NaN where the fit failed
  std::size_t failures{ 0 };
  double mise{ 0.0 };
  double stderr_mise{ 0.0 };
  double relative_to_mirror{ 0.0 };
  std::vector<std::string> errors; // first few failure messages
};

struct BenchmarkReport
{
  std::vector<BenchmarkCell> cells;

  //! the cell for a copula / estimator label / size.
  //! @throws std::out_of_range if absent.
  const BenchmarkCell& cell(const std::string& copula, const std::string& estimator,
                            std::size_t n) const;

  //! columns copula,estimator,n,M,mise,stderr,relative_to_mirror,failures.
  void write_csv(std::ostream& out) const;
  //! columns copula,estimator,n,replication,ise.
  void write_replications_csv(std::ostream& out) const;
};

//! runs every estimator on M samples of every copula and size. The mirror
//! estimator is added when missing, as relative errors refer to it.
//! `progress` is called after each completed replication.
BenchmarkReport
run_benchmark(const BenchmarkConfig& cfg,
              const std::function<void(std::size_t done, std::size_t total)>& progress = {});

struct FitOptions
{
  std::size_t grid{ 64 };
  Lattice lattice{ Lattice::rank };
  bool renormalize{ false };
  std::uint64_t seed{ 0 };
  unsigned threads{ 1 };
};

struct FitResult
{
  DensityGrid grid;
  nlohmann::json manifest;
};

//! pseudo-observations, smoothing selection and grid evaluation for a raw
//! two-column data set.
//! @throws std::invalid_argument for fewer than 20 observations.
FitResult
fit_dataset(const RawSample& raw, const EstimatorSpec& spec, const FitOptions& opt = {});

//! reads the CSV first; read errors propagate as std::runtime_error.
FitResult
fit_dataset_file(const std::string& csv_path, const EstimatorSpec& spec,
                 const FitOptions& opt = {});

} // namespace probitcop
