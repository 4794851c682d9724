#pragma once

#include "probitcop/kde.hpp"
#include "probitcop/local_likelihood.hpp"
#include "probitcop/transforms.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace probitcop {

//! principal components of the transformed sample. Rows of `W` are the
//! eigenvectors of the (centred) cross-product matrix, larger eigenvalue
//! first; the signs are chosen so that W = [[c, s], [s, -c]] with c >= 0,
//! which makes W symmetric and its own inverse.
struct PcaDecomposition
{
  Eigen::Matrix2d W;
  Eigen::Vector2d eigenvalues; // descending
  std::vector<Point> scores;   // (q_i, r_i) = W (s_i, t_i)

  std::vector<double> q() const;
  std::vector<double> r() const;
};

//! @throws std::invalid_argument for n < 3, non-finite points, or data whose
//!   cross-product matrix is (numerically) singular, such as collinear points.
PcaDecomposition
pca_scores(const TransformedSample& ts);

//! univariate smoothing: a fixed bandwidth h or a nearest-neighbour fraction
//! alpha (k = round(alpha n), clamped as in `knn_count`; kernel standard
//! deviation knn_scale_1d times the k-th neighbour distance).
struct UnivariateSmoothing
{
  enum class Kind
  {
    fixed,
    knn
  };
  Kind kind{ Kind::fixed };
  double value{ 0.0 };

  static UnivariateSmoothing bandwidth(double h) { return { Kind::fixed, h }; }
  static UnivariateSmoothing fraction(double alpha) { return { Kind::knn, alpha }; }
};

//! terms of the likelihood cross-validation criterion
//!   int f^2 - (2/n) sum_i f_{-i}(x_i).
struct CvTerms
{
  double integral_sq{ 0.0 };
  double loo_mean{ 0.0 }; // (1/n) sum_i f_{-i}(x_i)
  std::size_t loo_failures{ 0 };
  std::size_t integral_failures{ 0 };
  bool valid{ false }; // false if more than 20% of leave-one-out fits failed

  double value() const { return integral_sq - 2.0 * loo_mean; }
};

//! number of trapezoid nodes used for the integral term.
inline constexpr std::size_t cv_integration_nodes = 257;

//! cross-validation terms for a univariate local log-polynomial estimator.
//! The integral runs over [min - 4 sd, max + 4 sd]; fits that fail count
//! as zero. Leave-one-out fits that fail or do not converge are counted as
//! failures and contribute zero.
//! @throws std::invalid_argument for n < 10 or smoothing out of range.
CvTerms
cv_terms_1d(std::span<const double> sample,
            int degree,
            UnivariateSmoothing smoothing,
            unsigned threads = 1);

//! `cv_terms_1d(...).value()`, or NaN when the criterion is invalid.
double
cv_criterion_1d(std::span<const double> sample,
                int degree,
                UnivariateSmoothing smoothing,
                unsigned threads = 1);

//! dimension correction for fixed bandwidths: n^{1/15} (degree 1) or
//! n^{1/45} (degree 2), applied to squared bandwidths.
double
fixed_bandwidth_factor(std::size_t n, int degree);

//! dimension correction for nearest-neighbour fractions: n^{-2/15}
//! (degree 1) or n^{-4/45} (degree 2).
double
knn_fraction_factor(std::size_t n, int degree);

//! W^{-1} diag(h_q^2, h_r^2) W^{-1}, scaled by `factor`.
BandwidthMatrix
assemble_bandwidth(const Eigen::Matrix2d& W, double h_q, double h_r, double factor = 1.0);

struct SmoothingSelection
{
  enum class Mode
  {
    fixed,
    knn
  };
  Mode mode{ Mode::fixed };
  int degree{ 1 };
  std::size_t n{ 0 };
  Eigen::Matrix2d W = Eigen::Matrix2d::Identity();

  // fixed mode
  double h_q{ 0.0 };
  double h_r{ 0.0 };
  double factor{ 1.0 };
  std::optional<BandwidthMatrix> H_st;

  // nearest-neighbour mode
  double alpha_q{ 0.0 };
  double alpha_r{ 0.0 };
  double kappa{ 1.0 };
  std::size_t k{ 0 };

  std::vector<std::string> warnings;

  //! the bandwidth to hand to `ImprovedEstimator`.
  BandwidthSpec bandwidth() const;
};

struct SelectionOptions
{
  double log_h_tolerance{ 1e-3 };
  double alpha_min{ 0.05 };
  double alpha_max{ 0.95 };
  double alpha_step{ 0.025 };
  double fallback_alpha{ 0.3 };
  unsigned threads{ 1 };
};

//! univariate bandwidth minimizing the criterion by golden-section search on
//! log h in [log(0.05 sd), log(3 sd)]. Empty if the minimum sits on the
//! bracket boundary or no valid criterion value was found.
std::optional<double>
cv_bandwidth_1d(std::span<const double> sample, int degree, const SelectionOptions& opt = {});

//! univariate fraction minimizing the criterion over the alpha grid, ties
//! going to the larger fraction. Empty if no grid value is valid or the
//! minimum sits at the lower end of the grid.
std::optional<double>
cv_fraction_1d(std::span<const double> sample, int degree, const SelectionOptions& opt = {});

//! fixed bandwidth matrix from cross-validation along the principal axes.
//! A direction without an interior minimum falls back to the univariate
//! normal reference bandwidth (4 / (3n))^{1/5} sd, with a warning.
SmoothingSelection
select_fixed(const TransformedSample& ts, int degree, const SelectionOptions& opt = {});

//! nearest-neighbour smoothing from cross-validation along the principal
//! axes. A direction without a valid minimum falls back to
//! `opt.fallback_alpha`, with a warning.
SmoothingSelection
select_knn(const TransformedSample& ts, int degree, const SelectionOptions& opt = {});

} // namespace probitcop
