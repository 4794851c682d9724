#pragma once

#include "probitcop/grid.hpp"
#include "probitcop/transforms.hpp"

#include <Eigen/Dense>

#include <span>

namespace probitcop {

//! symmetric positive definite 2 x 2 bandwidth matrix
//! [[h1^2, h12], [h12, h2^2]].
class BandwidthMatrix
{
public:
  //! @throws std::invalid_argument unless the matrix is SPD.
  BandwidthMatrix(double h1_sq, double h2_sq, double h12);
  explicit BandwidthMatrix(const Eigen::Matrix2d& m);

  static BandwidthMatrix scaled_identity(double h) { return { h * h, h * h, 0.0 }; }

  double h1_sq() const { return h1_sq_; }
  double h2_sq() const { return h2_sq_; }
  double h12() const { return h12_; }
  double det() const { return h1_sq_ * h2_sq_ - h12_ * h12_; }
  Eigen::Matrix2d matrix() const;
  Eigen::Matrix2d inverse() const;

  //! z' H^{-1} z
  double mahalanobis_sq(double z1, double z2) const;

private:
  double h1_sq_;
  double h2_sq_;
  double h12_;
};

//! bivariate Gaussian kernel density estimate
//! (1 / (n |H|^{1/2})) sum_i K(H^{-1/2}(x - X_i)) at `at`.
double
gaussian_kde2(std::span<const Point> points, const BandwidthMatrix& H, Point at);

//! gradient of `gaussian_kde2` with respect to the evaluation point.
Eigen::Vector2d
gaussian_kde2_gradient(std::span<const Point> points, const BandwidthMatrix& H,
                       Point at);

//! multivariate normal reference bandwidth n^{-1/3} * sample covariance
//! (the d = 2 constant (4 / (d + 2))^{2 / (d + 4)} is one).
//! @throws std::invalid_argument for n < 3 or a singular covariance.
BandwidthMatrix
normal_reference_H(std::span<const Point> points);
inline BandwidthMatrix
normal_reference_H(const TransformedSample& ts)
{
  return normal_reference_H(ts.points);
}

//! probit back-transform factor phi(probit(u)) phi(probit(v)).
double
back_transform_jacobian(double u, double v);

//! naive probit-transformation estimator: the kernel density estimate of the
//! transformed sample, evaluated at (probit(u), probit(v)) and divided by
//! phi(probit(u)) phi(probit(v)).
double
naive_estimate(const TransformedSample& ts, const BandwidthMatrix& H, double u,
               double v);

//! divisor of the amended estimator,
//! 1 + [h1^2 (s^2 - 1) + 2 h12 s t + h2^2 (t^2 - 1)] / 2, floored at
//! `amendment_floor`.
inline constexpr double amendment_floor = 0.1;
double
amendment_divisor(const BandwidthMatrix& H, double s, double t);

//! amended estimator before renormalization.
double
amended_raw_estimate(const TransformedSample& ts, const BandwidthMatrix& H,
                     double u, double v);

//! amended estimator, renormalized to integrate to one over the
//! `amended_quadrature_size`^2 midpoint lattice. Each call recomputes the
//! normalizing constant; use `AmendedEstimator` for repeated evaluation.
inline constexpr std::size_t amended_quadrature_size = 400;
double
amended_estimate(const TransformedSample& ts, const BandwidthMatrix& H, double u,
                 double v);

class NaiveEstimator
{
public:
  NaiveEstimator(TransformedSample ts, BandwidthMatrix H);
  double operator()(double u, double v) const;
  const BandwidthMatrix& bandwidth() const { return H_; }

private:
  TransformedSample ts_;
  BandwidthMatrix H_;
};

//! amended estimator with its normalizing constant computed once.
class AmendedEstimator
{
public:
  AmendedEstimator(TransformedSample ts, BandwidthMatrix H, unsigned threads = 1);
  double operator()(double u, double v) const;
  double raw(double u, double v) const;
  //! integral of the raw estimate over the midpoint lattice.
  double normalizing_constant() const { return norm_; }
  const BandwidthMatrix& bandwidth() const { return H_; }

private:
  TransformedSample ts_;
  BandwidthMatrix H_;
  double norm_;
};

} // namespace probitcop
