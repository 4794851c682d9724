#pragma once

#include "probitcop/grid.hpp"
#include "probitcop/kde.hpp"
#include "probitcop/transforms.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace probitcop {

//! competitor estimator and its tuning parameter.
struct CompetitorSpec
{
  enum class Kind
  {
    mirror,
    beta,
    bernstein
  };
  Kind kind{ Kind::mirror };
  double h{ 0.0 };  // beta
  std::size_t k{ 0 }; // bernstein

  //! parses "mirror", "beta:h=0.02" or "bernstein:k=15".
  //! @throws std::invalid_argument on unknown kinds or invalid parameters.
  static CompetitorSpec parse(const std::string& spec);
  std::string str() const;
};

//! Gaussian kernel estimator on the unit square, applied to the 9n points
//! obtained by reflecting each pseudo-observation in the four sides and
//! corners. The bandwidth is the normal reference matrix of the augmented
//! sample multiplied by (1/9)^{2/3}.
class MirrorEstimator
{
public:
  //! @throws std::invalid_argument for n < 3.
  explicit MirrorEstimator(const PseudoSample& ps);

  //! @throws std::domain_error outside [0, 1]^2.
  double operator()(double u, double v) const;
  const BandwidthMatrix& bandwidth() const { return H_; }
  std::size_t augmented_size() const { return augmented_.size(); }

private:
  std::vector<Point> augmented_;
  BandwidthMatrix H_;
  double scale_;
};

double
mirror_estimate(const PseudoSample& ps, double u, double v);

//! Beta kernel estimator with the boundary-modified kernel: for x in [2h, 1 - 2h]
//! the kernel at x is the Beta(x/h, (1-x)/h) density; for x < 2h the first
//! shape is rho(x) = 2h^2 + 2.5 - sqrt(4h^4 + 6h^2 + 2.25 - x^2 - x/h), and
//! symmetrically the second shape is rho(1 - x) for x > 1 - 2h.
class BetaEstimator
{
public:
  //! @throws std::invalid_argument unless h > 0 and the sample is non-empty.
  BetaEstimator(const PseudoSample& ps, double h);

  //! @throws std::domain_error outside (0, 1)^2.
  double operator()(double u, double v) const;
  //! evaluates on a lattice as a product of the two kernel matrices.
  DensityGrid grid(std::size_t n, Lattice lattice) const;
  double bandwidth() const { return h_; }

private:
  Eigen::MatrixXd kernel_matrix(const std::vector<double>& at, bool first) const;

  std::vector<double> u_, v_;
  double h_;
};

//! shape parameters (a, b) of the modified Beta kernel at x.
std::pair<double, double>
beta_kernel_shapes(double x, double h);

double
beta_estimate(const PseudoSample& ps, double h, double u, double v);

//! Bernstein copula density estimator with k boxes per axis:
//!   k^2 sum_{i,j} mass_ij B_{i,k-1}(u) B_{j,k-1}(v),
//! with mass_ij the measure of the box ((i/k, (i+1)/k] x (j/k, (j+1)/k]).
class BernsteinEstimator
{
public:
  //! box masses of the empirical copula of `ps`.
  //! @throws std::invalid_argument for k < 1 or an empty sample.
  BernsteinEstimator(const PseudoSample& ps, std::size_t k);
  //! box masses taken from a copula distribution function.
  static BernsteinEstimator from_cdf(const std::function<double(double, double)>& cdf,
                                     std::size_t k);

  //! @throws std::domain_error outside [0, 1]^2.
  double operator()(double u, double v) const;
  DensityGrid grid(std::size_t n, Lattice lattice) const;
  const Eigen::MatrixXd& box_masses() const { return mass_; }
  std::size_t boxes() const { return k_; }

private:
  explicit BernsteinEstimator(Eigen::MatrixXd mass);

  Eigen::MatrixXd mass_;
  std::size_t k_;
};

//! Bernstein basis values B_{i,m}(x), i = 0..m.
Eigen::VectorXd
bernstein_basis(std::size_t m, double x);

double
bernstein_estimate(const PseudoSample& ps, std::size_t k, double u, double v);

} // namespace probitcop
