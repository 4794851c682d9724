#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace probitcop {

//! placement of an N x N lattice inside the unit square.
enum class Lattice
{
  //! points k / (N + 1), k = 1..N; the lattice used for ISE.
  rank,
  //! cell midpoints (k - 1/2) / N, k = 1..N; used for quadrature.
  midpoint
};

//! density values on an N x N lattice, stored row-major with the u index
//! outermost.
class DensityGrid
{
public:
  DensityGrid() = default;
  DensityGrid(std::size_t n, Lattice lattice = Lattice::rank);
  DensityGrid(std::size_t n, Lattice lattice, std::vector<double> values);

  std::size_t size() const { return n_; }
  Lattice lattice() const { return lattice_; }

  //! coordinate of lattice index k (0-based).
  double coord(std::size_t k) const;

  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  //! midpoint-type quadrature over the unit square: the mean of the values.
  double integral() const;

  //! CSV with header "u,v,value", row-major.
  void write_csv(std::ostream& out) const;
  void write_csv_file(const std::string& path) const;
  //! reads a grid written by `write_csv`; the lattice type is inferred from
  //! the first coordinate.
  static DensityGrid read_csv(std::istream& in);
  static DensityGrid read_csv_file(const std::string& path);

private:
  std::size_t n_{ 0 };
  Lattice lattice_{ Lattice::rank };
  std::vector<double> values_;
};

//! evaluates `f(u, v)` on every lattice point, `threads` = 0 meaning all
//! hardware threads.
DensityGrid
evaluate_grid(const std::function<double(double, double)>& f,
              std::size_t n,
              Lattice lattice = Lattice::rank,
              unsigned threads = 1);

//! rescales a grid so that `integral()` of the result is one.
//! @throws std::invalid_argument if the grid has no positive value.
DensityGrid
renormalize(const DensityGrid& grid);

} // namespace probitcop
