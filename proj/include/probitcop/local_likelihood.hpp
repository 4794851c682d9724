#pragma once

#include "probitcop/kde.hpp"
#include "probitcop/transforms.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace probitcop {

//! thrown when all kernel weights at an evaluation point vanish.
class NoLocalData : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! result of a local log-polynomial fit at one point. Coefficients follow
//! the monomials 1, z1, z2 (degree 1) and additionally z1^2, z2^2, z1 z2
//! (degree 2) in the bivariate case; 1, z, z^2 in the univariate case.
struct LocalFit
{
  int degree{ 1 };
  Eigen::VectorXd coefficients;
  bool converged{ false };
  int iterations{ 0 };
  double scaled_gradient{ std::numeric_limits<double>::infinity() };

  //! local density estimate exp(a0).
  double density() const { return std::exp(coefficients(0)); }
};

//! scale of the Gaussian kernel relative to the nearest-neighbour distance:
//! the Gaussian gets the per-coordinate variance of a tricube kernel
//! (1 - |x|^3)^3 supported on the neighbourhood, 35/243 on the line and
//! 11/91 in the plane (radial kernel), so that alpha keeps its meaning of
//! the fraction of observations entering each local fit.
inline constexpr double knn_scale_1d = 0.3795166950355407; // sqrt(35/243)
inline constexpr double knn_scale_2d = 0.3476767476825577; // sqrt(11/91)

//! nearest-neighbour smoothing: distance to the k-th neighbour under
//! ||(q, r)||^2 = q^2 + kappa^2 r^2 in the rotated coordinates
//! (q, r)' = rotation * (s, t)'.
struct KnnBandwidth
{
  std::size_t k;
  double kappa;
  Eigen::Matrix2d rotation;

  //! @throws std::invalid_argument unless k >= 1, kappa > 0 and the rotation
  //!   is orthonormal to 1e-12.
  void validate(std::size_t n) const;
};

using BandwidthSpec = std::variant<BandwidthMatrix, KnnBandwidth>;

//! number of local polynomial coefficients, univariate (`dim` = 1) or
//! bivariate (`dim` = 2).
std::size_t
coefficient_count(int degree, int dim = 2);

//! local likelihood objective at `at`
//!   sum_i K(H^{-1/2} z_i) P_a(z_i) - n * int K(H^{-1/2} z) exp(P_a(z)) dz,
//! with z_i = X_i - at and K(x) = exp(-|x|^2 / 2). The integral is closed
//! form; it diverges, and the objective is -infinity, unless
//! H^{-1} - 2 Q_a is positive definite.
double
loclik_objective(const TransformedSample& ts,
                 const BandwidthMatrix& H,
                 int degree,
                 Point at,
                 const Eigen::VectorXd& a);

//! maximizer of `loclik_objective` by damped Newton iterations, started from
//! the log kernel density estimate with zero higher-order terms.
//! @throws NoLocalData if the weights are degenerate.
LocalFit
loclik_fit_point(const TransformedSample& ts,
                 const BandwidthMatrix& H,
                 int degree,
                 Point at);

//! fit with the local bandwidth matrix of a nearest-neighbour specification.
LocalFit
loclik_fit_point(const TransformedSample& ts,
                 const KnnBandwidth& bw,
                 int degree,
                 Point at);

//! k-th smallest sqrt((q - q_i)^2 + kappa^2 (r - r_i)^2).
//! @throws std::invalid_argument unless 1 <= k <= scores.size().
double
knn_distance(std::span<const Point> scores, double kappa, std::size_t k, Point at);

//! local bandwidth matrix knn_scale_2d^2 D^2 rotation' diag(1, 1/kappa^2) rotation.
BandwidthMatrix
knn_local_matrix(const KnnBandwidth& bw, double distance);

//! improved estimator: exp(a0) of the local fit at (probit(u), probit(v))
//! divided by phi(probit(u)) phi(probit(v)).
double
improved_estimate(const TransformedSample& ts,
                  const BandwidthSpec& bw,
                  int degree,
                  double u,
                  double v);

//! improved estimator bound to one sample; the rotated neighbour scores are
//! built once and shared read-only.
class ImprovedEstimator
{
public:
  ImprovedEstimator(TransformedSample ts, BandwidthSpec bw, int degree);

  double operator()(double u, double v) const;
  LocalFit fit(Point st) const;
  //! bandwidth matrix used at a point of the transformed domain.
  BandwidthMatrix local_matrix(Point st) const;

  int degree() const { return degree_; }
  const BandwidthSpec& bandwidth() const { return bw_; }

private:
  TransformedSample ts_;
  BandwidthSpec bw_;
  int degree_;
  std::vector<Point> scaled_scores_; // (q_i, kappa r_i), k-NN only
};

//! univariate local likelihood fit with Gaussian weights exp(-(x_i - at)^2
//! / (2 h^2)). `exclude` drops one observation (leave-one-out); the sample
//! size in the integral term is then n - 1.
//! @throws NoLocalData if the weights are degenerate.
LocalFit
loclik_fit_point_1d(std::span<const double> x,
                    double h,
                    int degree,
                    double at,
                    std::size_t exclude = static_cast<std::size_t>(-1));

//! univariate analogue of `loclik_objective`.
double
loclik_objective_1d(std::span<const double> x,
                    double h,
                    int degree,
                    double at,
                    const Eigen::VectorXd& a);

//! distance from `at` to its k-th nearest neighbour in ascending `sorted`,
//! optionally ignoring index `exclude`.
double
knn_distance_1d(std::span<const double> sorted,
                std::size_t k,
                double at,
                std::size_t exclude = static_cast<std::size_t>(-1));

//! number of neighbours for a smoothing fraction: round(factor * alpha * n),
//! clamped to [max(6, 3 degree), n].
std::size_t
knn_count(double alpha, double factor, std::size_t n, int degree);

} // namespace probitcop
