#include "probitcop/kde.hpp"
#include "probitcop/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace probitcop {

BandwidthMatrix::BandwidthMatrix(double h1_sq, double h2_sq, double h12)
  : h1_sq_(h1_sq)
  , h2_sq_(h2_sq)
  , h12_(h12)
{
  if (!std::isfinite(h1_sq) || !std::isfinite(h2_sq) || !std::isfinite(h12))
    throw std::invalid_argument("bandwidth matrix: entries must be finite");
  if (!(h1_sq > 0.0 && h2_sq > 0.0 && det() > 0.0))
    throw std::invalid_argument("bandwidth matrix must be positive definite");
}

BandwidthMatrix::BandwidthMatrix(const Eigen::Matrix2d& m)
  : BandwidthMatrix(m(0, 0), m(1, 1), 0.5 * (m(0, 1) + m(1, 0)))
{
}

Eigen::Matrix2d
BandwidthMatrix::matrix() const
{
  Eigen::Matrix2d m;
  m << h1_sq_, h12_, h12_, h2_sq_;
  return m;
}

Eigen::Matrix2d
BandwidthMatrix::inverse() const
{
  Eigen::Matrix2d m;
  const double d = det();
  m << h2_sq_ / d, -h12_ / d, -h12_ / d, h1_sq_ / d;
  return m;
}

double
BandwidthMatrix::mahalanobis_sq(double z1, double z2) const
{
  return (h2_sq_ * z1 * z1 - 2.0 * h12_ * z1 * z2 + h1_sq_ * z2 * z2) / det();
}

namespace {

struct KernelConstants
{
  double a, b, c; // H^{-1} = [[a, b], [b, c]]
  double norm;    // 1 / (2 pi |H|^{1/2})
};

KernelConstants
kernel_constants(const BandwidthMatrix& H)
{
  const double d = H.det();
  return { H.h2_sq() / d, -H.h12() / d, H.h1_sq() / d, 1.0 / (2.0 * pi * std::sqrt(d)) };
}

} // namespace

double
gaussian_kde2(std::span<const Point> points, const BandwidthMatrix& H, Point at)
{
  if (points.empty())
    throw std::invalid_argument("gaussian_kde2: no points");
  const auto k = kernel_constants(H);
  double sum = 0.0;
  for (const auto& p : points) {
    const double z1 = at.x - p.x;
    const double z2 = at.y - p.y;
    sum += std::exp(-0.5 * (k.a * z1 * z1 + 2.0 * k.b * z1 * z2 + k.c * z2 * z2));
  }
  return k.norm * sum / static_cast<double>(points.size());
}

Eigen::Vector2d
gaussian_kde2_gradient(std::span<const Point> points, const BandwidthMatrix& H,
                       Point at)
{
  if (points.empty())
    throw std::invalid_argument("gaussian_kde2_gradient: no points");
  const auto k = kernel_constants(H);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const auto& p : points) {
    const double z1 = at.x - p.x;
    const double z2 = at.y - p.y;
    const double w =
      std::exp(-0.5 * (k.a * z1 * z1 + 2.0 * k.b * z1 * z2 + k.c * z2 * z2));
    g(0) -= w * (k.a * z1 + k.b * z2);
    g(1) -= w * (k.b * z1 + k.c * z2);
  }
  return g * (k.norm / static_cast<double>(points.size()));
}

BandwidthMatrix
normal_reference_H(std::span<const Point> points)
{
  const std::size_t n = points.size();
  if (n < 3)
    throw std::invalid_argument("normal_reference_H: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  const double dn = static_cast<double>(n);
  const double scale = std::pow(dn, -1.0 / 3.0) / (dn - 1.0);
  const double h11 = scale * sxx, h22 = scale * syy, h12 = scale * sxy;
  if (!(h11 > 0.0 && h22 > 0.0 && h11 * h22 - h12 * h12 > 1e-14 * h11 * h22))
    throw std::invalid_argument("normal_reference_H: sample covariance is singular");
  return { h11, h22, h12 };
}

double
back_transform_jacobian(double u, double v)
{
  return normal_pdf(probit(u)) * normal_pdf(probit(v));
}

namespace {

void
check_interior(double u, double v, const char* who)
{
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw std::domain_error(std::string(who) + ": (u, v) must lie in (0, 1)^2");
}

} // namespace

double
naive_estimate(const TransformedSample& ts, const BandwidthMatrix& H, double u,
               double v)
{
  check_interior(u, v, "naive_estimate");
  const double s = probit(u), t = probit(v);
  return gaussian_kde2(ts.points, H, { s, t }) / (normal_pdf(s) * normal_pdf(t));
}

double
amendment_divisor(const BandwidthMatrix& H, double s, double t)
{
  const double d = 1.0 + 0.5 * (H.h1_sq() * (s * s - 1.0) + 2.0 * H.h12() * s * t +
                                H.h2_sq() * (t * t - 1.0));
  return std::max(d, amendment_floor);
}

double
amended_raw_estimate(const TransformedSample& ts, const BandwidthMatrix& H,
                     double u, double v)
{
  check_interior(u, v, "amended_estimate");
  const double s = probit(u), t = probit(v);
  return gaussian_kde2(ts.points, H, { s, t }) /
         (normal_pdf(s) * normal_pdf(t) * amendment_divisor(H, s, t));
}

double
amended_estimate(const TransformedSample& ts, const BandwidthMatrix& H, double u,
                 double v)
{
  return AmendedEstimator(ts, H)(u, v);
}

NaiveEstimator::NaiveEstimator(TransformedSample ts, BandwidthMatrix H)
  : ts_(std::move(ts))
  , H_(H)
{
}

double
NaiveEstimator::operator()(double u, double v) const
{
  return naive_estimate(ts_, H_, u, v);
}

AmendedEstimator::AmendedEstimator(TransformedSample ts, BandwidthMatrix H,
                                   unsigned threads)
  : ts_(std::move(ts))
  , H_(H)
{
  const auto grid = evaluate_grid([this](double u, double v) { return raw(u, v); },
                                  amended_quadrature_size, Lattice::midpoint, threads);
  norm_ = grid.integral();
  if (!(norm_ > 0.0))
    throw std::runtime_error("amended estimator: vanishing normalizing constant");
}

double
AmendedEstimator::raw(double u, double v) const
{
  return amended_raw_estimate(ts_, H_, u, v);
}

double
AmendedEstimator::operator()(double u, double v) const
{
  return raw(u, v) / norm_;
}

} // namespace probitcop
