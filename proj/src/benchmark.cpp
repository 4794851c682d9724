#include "probitcop/benchmark.hpp"
#include "probitcop/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace probitcop {

double
ise_grid(const DensityGrid& est, const DensityGrid& truth)
{
  if (est.size() != truth.size())
    throw std::invalid_argument("ise_grid: grids have different sizes (" +
                                std::to_string(est.size()) + " vs " +
                                std::to_string(truth.size()) + ")");
  if (est.lattice() != truth.lattice())
    throw std::invalid_argument("ise_grid: grids use different lattices");
  const auto& a = est.values();
  const auto& b = truth.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  const double n = static_cast<double>(est.size());
  const double denom = est.lattice() == Lattice::rank ? (n + 1.0) : n;
  return sum / (denom * denom);
}

// configuration

namespace {

std::string
trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string>
split_list(const std::string& value)
{
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ';')) {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

std::uint64_t
parse_unsigned(const std::string& key, const std::string& text)
{
  const std::string t = trim(text);
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    if (!t.empty() && t[0] != '-')
      x = std::stoull(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size())
    throw std::invalid_argument("config: '" + key + "' expects a non-negative integer, got '" +
                                text + "'");
  return x;
}

std::uint64_t
splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

} // namespace

void
BenchmarkConfig::set(const std::string& raw_key, const std::string& value)
{
  const std::string key = trim(raw_key);
  if (key == "copulas") {
    copulas.clear();
    for (const auto& s : split_list(value))
      copulas.push_back(CopulaModel::parse(s));
  } else if (key == "estimators") {
    estimators.clear();
    for (const auto& s : split_list(value))
      estimators.push_back(EstimatorSpec::parse(s));
  } else if (key == "n" || key == "sizes") {
    sizes.clear();
    std::string v = value;
    std::replace(v.begin(), v.end(), ',', ';');
    for (const auto& s : split_list(v))
      sizes.push_back(parse_unsigned(key, s));
  } else if (key == "replications" || key == "M") {
    replications = parse_unsigned(key, value);
  } else if (key == "grid" || key == "N") {
    grid = parse_unsigned(key, value);
  } else if (key == "seed") {
    seed = parse_unsigned(key, value);
  } else if (key == "threads") {
    threads = static_cast<unsigned>(parse_unsigned(key, value));
  } else if (key == "output_dir") {
    output_dir = trim(value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

void
BenchmarkConfig::read(std::istream& in)
{
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void
BenchmarkConfig::read_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file '" + path + "'");
  read(in);
}

void
BenchmarkConfig::validate() const
{
  if (replications < 1)
    throw std::invalid_argument("config: replications must be at least 1");
  if (grid < 2)
    throw std::invalid_argument("config: grid must be at least 2");
  if (copulas.empty())
    throw std::invalid_argument("config: no copulas given");
  if (estimators.empty())
    throw std::invalid_argument("config: no estimators given");
  if (sizes.empty())
    throw std::invalid_argument("config: no sample sizes given");
  for (auto n : sizes)
    if (n < 20)
      throw std::invalid_argument("config: sample sizes must be at least 20");
}

std::string
default_output_dir()
{
  const char* env = std::getenv(output_dir_env);
  return env && *env ? std::string(env) : std::string(".");
}

std::uint64_t
replication_seed(std::uint64_t master, std::size_t copula, std::size_t size,
                 std::size_t replication)
{
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(copula));
  s = splitmix64(s ^ static_cast<std::uint64_t>(size));
  return splitmix64(s ^ static_cast<std::uint64_t>(replication));
}

// report

const BenchmarkCell&
BenchmarkReport::cell(const std::string& copula, const std::string& estimator,
                      std::size_t n) const
{
  for (const auto& c : cells)
    if (c.copula == copula && c.estimator == estimator && c.n == n)
      return c;
  throw std::out_of_range("benchmark report: no cell " + copula + " / " + estimator +
                          " / n=" + std::to_string(n));
}

namespace {

std::string
csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

void
BenchmarkReport::write_csv(std::ostream& out) const
{
  out << "copula,estimator,n,M,mise,stderr,relative_to_mirror,failures\n";
  out << std::setprecision(10);
  for (const auto& c : cells) {
    out << csv_field(c.copula) << ',' << csv_field(c.estimator) << ',' << c.n << ','
        << c.replications << ',' << c.mise << ',' << c.stderr_mise << ','
        << c.relative_to_mirror << ',' << c.failures << '\n';
  }
}

void
BenchmarkReport::write_replications_csv(std::ostream& out) const
{
  out << "copula,estimator,n,replication,ise\n";
  out << std::setprecision(12);
  for (const auto& c : cells)
    for (std::size_t r = 0; r < c.ise.size(); ++r)
      out << csv_field(c.copula) << ',' << csv_field(c.estimator) << ',' << c.n << ',' << r
          << ',' << c.ise[r] << '\n';
}

BenchmarkReport
run_benchmark(const BenchmarkConfig& cfg,
              const std::function<void(std::size_t, std::size_t)>& progress)
{
  cfg.validate();
  std::vector<EstimatorSpec> specs = cfg.estimators;
  const auto is_mirror = [](const EstimatorSpec& s) {
    return s.kind == EstimatorSpec::Kind::mirror;
  };
  if (std::none_of(specs.begin(), specs.end(), is_mirror))
    specs.push_back(EstimatorSpec::parse("mirror"));
  const std::size_t mirror_index = static_cast<std::size_t>(
    std::find_if(specs.begin(), specs.end(), is_mirror) - specs.begin());

  const std::size_t nc = cfg.copulas.size();
  const std::size_t nn = cfg.sizes.size();
  const std::size_t ne = specs.size();
  const std::size_t M = cfg.replications;

  std::vector<DensityGrid> truth;
  truth.reserve(nc);
  for (const auto& model : cfg.copulas)
    truth.push_back(evaluate_grid([&model](double u, double v) { return model.density(u, v); },
                                  cfg.grid, Lattice::rank, cfg.threads));

  // ise[((c * nn + s) * ne + e) * M + r]
  std::vector<double> ise(nc * nn * ne * M, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> error(ise.size());
  const std::size_t tasks = nc * nn * M;
  std::size_t done = 0;
  std::mutex progress_mutex;

  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t r = task % M;
    const std::size_t s = (task / M) % nn;
    const std::size_t c = task / (M * nn);
    const auto& model = cfg.copulas[c];
    const std::uint64_t seed = replication_seed(cfg.seed, c, s, r);
    RawSample raw{ model.sample(cfg.sizes[s], seed) };
    const PseudoSample ps = pseudo_observations(raw);
    for (std::size_t e = 0; e < ne; ++e) {
      const std::size_t slot = ((c * nn + s) * ne + e) * M + r;
      try {
        const FittedEstimator fit = fit_estimator(specs[e], ps, model, 1);
        const DensityGrid g = fit.grid(cfg.grid, Lattice::rank, 1);
        const double value = ise_grid(g, truth[c]);
        if (!std::isfinite(value))
          throw std::runtime_error("non-finite integrated squared error");
        ise[slot] = value;
      } catch (const std::exception& ex) {
        error[slot] = ex.what();
      }
    }
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(++done, tasks);
    }
  });

  BenchmarkReport report;
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t s = 0; s < nn; ++s) {
      const std::size_t first = report.cells.size();
      for (std::size_t e = 0; e < ne; ++e) {
        BenchmarkCell cell;
        cell.copula = cfg.copulas[c].str();
        cell.estimator = specs[e].str();
        cell.n = cfg.sizes[s];
        cell.replications = M;
        const std::size_t base = ((c * nn + s) * ne + e) * M;
        cell.ise.assign(ise.begin() + static_cast<std::ptrdiff_t>(base),
                        ise.begin() + static_cast<std::ptrdiff_t>(base + M));
        double sum = 0.0, sum_sq = 0.0;
        std::size_t ok = 0;
        for (std::size_t r = 0; r < M; ++r) {
          const double x = cell.ise[r];
          if (std::isnan(x)) {
            ++cell.failures;
            if (cell.errors.size() < 3)
              cell.errors.push_back(error[base + r]);
            continue;
          }
          sum += x;
          sum_sq += x * x;
          ++ok;
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        cell.mise = ok > 0 ? sum / static_cast<double>(ok) : nan;
        if (ok > 1) {
          const double var = std::max(0.0, (sum_sq - sum * sum / static_cast<double>(ok)) /
                                             static_cast<double>(ok - 1));
          cell.stderr_mise = std::sqrt(var / static_cast<double>(ok));
        } else {
          cell.stderr_mise = ok == 1 ? 0.0 : nan;
        }
        report.cells.push_back(std::move(cell));
      }
      const double mirror = report.cells[first + mirror_index].mise;
      for (std::size_t e = 0; e < ne; ++e) {
        auto& cell = report.cells[first + e];
        cell.relative_to_mirror = e == mirror_index ? 1.0 : cell.mise / mirror;
      }
    }
  }
  return report;
}

// single data set

FitResult
fit_dataset(const RawSample& raw, const EstimatorSpec& spec, const FitOptions& opt)
{
  if (raw.size() < 20)
    throw std::invalid_argument("fit: at least 20 observations required, got " +
                                std::to_string(raw.size()));
  if (opt.grid < 2)
    throw std::invalid_argument("fit: grid size must be at least 2");
  if (spec.kind == EstimatorSpec::Kind::truth)
    throw std::invalid_argument("fit: the truth estimator needs a simulation model");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const PseudoSample ps = pseudo_observations(raw);
  const FittedEstimator fit = fit_estimator(spec, ps, std::nullopt, opt.threads);
  const auto t1 = clock::now();
  DensityGrid grid = fit.grid(opt.grid, opt.lattice, opt.threads);
  const double raw_integral = grid.integral();
  if (opt.renormalize)
    grid = renormalize(grid);
  const auto t2 = clock::now();

  FitResult out{ std::move(grid), nlohmann::json::object() };
  auto& m = out.manifest;
  m["estimator"] = fit.label;
  m["n"] = raw.size();
  m["grid"] = { { "N", opt.grid },
                { "lattice", opt.lattice == Lattice::rank ? "rank" : "midpoint" },
                { "integral_before_renormalization", raw_integral },
                { "renormalized", opt.renormalize } };
  m["selection"] = fit.info;
  m["seed"] = opt.seed;
  m["threads"] = opt.threads;
  m["timings_seconds"] = { { "fit", std::chrono::duration<double>(t1 - t0).count() },
                           { "grid", std::chrono::duration<double>(t2 - t1).count() } };
  return out;
}

FitResult
fit_dataset_file(const std::string& csv_path, const EstimatorSpec& spec, const FitOptions& opt)
{
  FitResult out = fit_dataset(read_csv_file(csv_path), spec, opt);
  out.manifest["input"] = csv_path;
  return out;
}

} // namespace probitcop
