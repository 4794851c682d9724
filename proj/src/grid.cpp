#include "probitcop/grid.hpp"
#include "probitcop/parallel.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace probitcop {

DensityGrid::DensityGrid(std::size_t n, Lattice lattice)
  : DensityGrid(n, lattice, std::vector<double>(n * n, 0.0))
{
}

DensityGrid::DensityGrid(std::size_t n, Lattice lattice, std::vector<double> values)
  : n_(n)
  , lattice_(lattice)
  , values_(std::move(values))
{
  if (n < 2)
    throw std::invalid_argument("density grid: N must be >= 2");
  if (values_.size() != n * n)
    throw std::invalid_argument("density grid: expected N^2 values");
}

double
DensityGrid::coord(std::size_t k) const
{
  const double dn = static_cast<double>(n_);
  if (lattice_ == Lattice::rank)
    return static_cast<double>(k + 1) / (dn + 1.0);
  return (static_cast<double>(k) + 0.5) / dn;
}

double
DensityGrid::integral() const
{
  double sum = 0.0;
  for (double v : values_)
    sum += v;
  return sum / static_cast<double>(values_.size());
}

void
DensityGrid::write_csv(std::ostream& out) const
{
  out << "u,v,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      out << coord(i) << ',' << coord(j) << ',' << (*this)(i, j) << '\n';
}

void
DensityGrid::write_csv_file(const std::string& path) const
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path + "'");
  write_csv(out);
}

DensityGrid
DensityGrid::read_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("grid csv: empty input");
  std::vector<double> us, values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r")
      continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
      throw std::runtime_error("grid csv: malformed line " + std::to_string(lineno));
    try {
      us.push_back(std::stod(a));
      values.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw std::runtime_error("grid csv: malformed line " + std::to_string(lineno));
    }
  }
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(values.size())));
  if (n * n != values.size() || n < 2)
    throw std::runtime_error("grid csv: number of rows is not a square >= 4");
  const double dn = static_cast<double>(n);
  const Lattice lattice =
    std::fabs(us.front() - 1.0 / (dn + 1.0)) < std::fabs(us.front() - 0.5 / dn)
      ? Lattice::rank
      : Lattice::midpoint;
  return DensityGrid(n, lattice, std::move(values));
}

DensityGrid
DensityGrid::read_csv_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

DensityGrid
evaluate_grid(const std::function<double(double, double)>& f,
              std::size_t n,
              Lattice lattice,
              unsigned threads)
{
  DensityGrid grid(n, lattice);
  parallel_for(n, threads, [&](std::size_t i) {
    const double u = grid.coord(i);
    for (std::size_t j = 0; j < n; ++j)
      grid(i, j) = f(u, grid.coord(j));
  });
  return grid;
}

DensityGrid
renormalize(const DensityGrid& grid)
{
  const double total = grid.integral();
  if (!(total > 0.0) || !std::isfinite(total))
    throw std::invalid_argument("renormalize: grid has no positive mass");
  DensityGrid out = grid;
  for (auto& v : out.values())
    v /= total;
  return out;
}

} // namespace probitcop
