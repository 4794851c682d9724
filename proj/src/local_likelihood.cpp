#include "probitcop/local_likelihood.hpp"
#include "probitcop/normal.hpp"

#include "newton.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace probitcop {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
constexpr double log_2pi = 1.8378770664093454836;

void
check_degree(int degree)
{
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("local likelihood: degree must be 1 or 2");
}

// exponents (i, j) of the bivariate monomials z1^i z2^j
constexpr std::array<std::array<int, 2>, 6> monomials2 = {
  { { 0, 0 }, { 1, 0 }, { 0, 1 }, { 2, 0 }, { 0, 2 }, { 1, 1 } }
};

// E[z1^i z2^j], i + j <= 4, for z ~ N(m, S)
using MomentTable = std::array<std::array<double, 5>, 5>;

MomentTable
gaussian_moments2(const Eigen::Vector2d& m, const Eigen::Matrix2d& S)
{
  MomentTable c{}; // centred moments
  c[0][0] = 1.0;
  c[2][0] = S(0, 0);
  c[0][2] = S(1, 1);
  c[1][1] = S(0, 1);
  c[4][0] = 3.0 * S(0, 0) * S(0, 0);
  c[0][4] = 3.0 * S(1, 1) * S(1, 1);
  c[3][1] = 3.0 * S(0, 0) * S(0, 1);
  c[1][3] = 3.0 * S(1, 1) * S(0, 1);
  c[2][2] = S(0, 0) * S(1, 1) + 2.0 * S(0, 1) * S(0, 1);

  static constexpr std::array<std::array<double, 5>, 5> binom = {
    { { 1, 0, 0, 0, 0 }, { 1, 1, 0, 0, 0 }, { 1, 2, 1, 0, 0 }, { 1, 3, 3, 1, 0 },
      { 1, 4, 6, 4, 1 } }
  };
  std::array<double, 5> p1{ 1, 0, 0, 0, 0 }, p2{ 1, 0, 0, 0, 0 };
  for (int k = 1; k < 5; ++k) {
    p1[k] = p1[k - 1] * m(0);
    p2[k] = p2[k - 1] * m(1);
  }
  MomentTable out{};
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; a + b <= 4; ++b) {
      double sum = 0.0;
      for (int i = 0; i <= a; ++i)
        for (int j = 0; j <= b; ++j)
          sum += binom[a][i] * binom[b][j] * p1[a - i] * p2[b - j] * c[i][j];
      out[a][b] = sum;
    }
  }
  return out;
}

// bivariate problem: maximize T'a - n I(a)
template<int N>
class Problem2d
{
public:
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  Problem2d(const Vec& t, const Vec& t_abs, double n, const Eigen::Matrix2d& h_inv)
    : t_(t)
    , t_abs_(t_abs)
    , n_(n)
    , h_inv_(h_inv)
  {
  }

  // log of the integral term, -inf if it diverges; fills A^{-1} and mean
  double log_integral(const Vec& a, Eigen::Matrix2d& cov, Eigen::Vector2d& mean) const
  {
    Eigen::Matrix2d A = h_inv_;
    if constexpr (N == 6) {
      A(0, 0) -= 2.0 * a(3);
      A(1, 1) -= 2.0 * a(4);
      A(0, 1) -= a(5);
      A(1, 0) -= a(5);
    }
    const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    if (!(A(0, 0) > 0.0 && det > 0.0))
      return std::numeric_limits<double>::quiet_NaN();
    cov << A(1, 1) / det, -A(0, 1) / det, -A(1, 0) / det, A(0, 0) / det;
    const Eigen::Vector2d b(a(1), a(2));
    mean = cov * b;
    return a(0) + log_2pi - 0.5 * std::log(det) + 0.5 * b.dot(mean);
  }

  double value(const Vec& a) const
  {
    Eigen::Matrix2d cov;
    Eigen::Vector2d mean;
    const double li = log_integral(a, cov, mean);
    if (std::isnan(li))
      return neg_inf;
    return t_.dot(a) - n_ * std::exp(li);
  }

  void derivatives(const Vec& a, Vec& g, Mat& hess) const
  {
    Eigen::Matrix2d cov;
    Eigen::Vector2d mean;
    const double li = log_integral(a, cov, mean);
    if (std::isnan(li)) {
      g.setConstant(std::numeric_limits<double>::quiet_NaN());
      hess.setZero();
      return;
    }
    const double scale = n_ * std::exp(li);
    const auto mom = gaussian_moments2(mean, cov);
    for (int j = 0; j < N; ++j) {
      const auto [ej1, ej2] = monomials2[j];
      g(j) = t_(j) - scale * mom[ej1][ej2];
      for (int k = j; k < N; ++k) {
        const auto [ek1, ek2] = monomials2[k];
        hess(j, k) = hess(k, j) = -scale * mom[ej1 + ek1][ej2 + ek2];
      }
    }
  }

  double scaled_gradient(const Vec& g) const
  {
    double worst = 0.0;
    for (int j = 0; j < N; ++j)
      worst = std::max(worst, std::fabs(g(j)) / std::max(t_abs_(j), 1e-300));
    return std::isfinite(worst) ? worst : std::numeric_limits<double>::infinity();
  }

private:
  Vec t_, t_abs_;
  double n_;
  Eigen::Matrix2d h_inv_;
};

// univariate problem with monomials 1, z, z^2
template<int N>
class Problem1d
{
public:
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;

  Problem1d(const Vec& t, const Vec& t_abs, double n, double h)
    : t_(t)
    , t_abs_(t_abs)
    , n_(n)
    , prec_(1.0 / (h * h))
  {
  }

  double log_integral(const Vec& a, double& var, double& mean) const
  {
    double A = prec_;
    if constexpr (N == 3)
      A -= 2.0 * a(2);
    if (!(A > 0.0))
      return std::numeric_limits<double>::quiet_NaN();
    var = 1.0 / A;
    mean = a(1) * var;
    return a(0) + 0.5 * (log_2pi - std::log(A)) + 0.5 * a(1) * mean;
  }

  double value(const Vec& a) const
  {
    double var, mean;
    const double li = log_integral(a, var, mean);
    if (std::isnan(li))
      return neg_inf;
    return t_.dot(a) - n_ * std::exp(li);
  }

  void derivatives(const Vec& a, Vec& g, Mat& hess) const
  {
    double var, mean;
    const double li = log_integral(a, var, mean);
    if (std::isnan(li)) {
      g.setConstant(std::numeric_limits<double>::quiet_NaN());
      hess.setZero();
      return;
    }
    const double scale = n_ * std::exp(li);
    const double m = mean;
    const std::array<double, 5> mom = { 1.0, m, m * m + var, m * m * m + 3.0 * m * var,
                                        m * m * m * m + 6.0 * m * m * var +
                                          3.0 * var * var };
    for (int j = 0; j < N; ++j) {
      g(j) = t_(j) - scale * mom[j];
      for (int k = j; k < N; ++k)
        hess(j, k) = hess(k, j) = -scale * mom[j + k];
    }
  }

  double scaled_gradient(const Vec& g) const
  {
    double worst = 0.0;
    for (int j = 0; j < N; ++j)
      worst = std::max(worst, std::fabs(g(j)) / std::max(t_abs_(j), 1e-300));
    return std::isfinite(worst) ? worst : std::numeric_limits<double>::infinity();
  }

private:
  Vec t_, t_abs_;
  double n_;
  double prec_;
};

struct WeightedSums2
{
  Eigen::Matrix<double, 6, 1> t = Eigen::Matrix<double, 6, 1>::Zero();
  Eigen::Matrix<double, 6, 1> t_abs = Eigen::Matrix<double, 6, 1>::Zero();
};

WeightedSums2
weighted_sums2(std::span<const Point> pts, const Eigen::Matrix2d& h_inv, Point at)
{
  WeightedSums2 s;
  const double a = h_inv(0, 0), b = h_inv(0, 1), c = h_inv(1, 1);
  for (const auto& p : pts) {
    const double z1 = p.x - at.x;
    const double z2 = p.y - at.y;
    const double w = std::exp(-0.5 * (a * z1 * z1 + 2.0 * b * z1 * z2 + c * z2 * z2));
    const std::array<double, 6> f = { 1.0, z1, z2, z1 * z1, z2 * z2, z1 * z2 };
    for (int j = 0; j < 6; ++j) {
      s.t(j) += w * f[j];
      s.t_abs(j) += w * std::fabs(f[j]);
    }
  }
  return s;
}

void
check_weights(double w)
{
  if (!(w > 1e-280))
    throw NoLocalData("local likelihood: all kernel weights vanish at the evaluation point");
}

template<int N>
LocalFit
solve2d(const WeightedSums2& sums, double n, const BandwidthMatrix& H, int degree)
{
  using Vec = Eigen::Matrix<double, N, 1>;
  const Vec t = sums.t.template head<N>();
  const Vec t_abs = sums.t_abs.template head<N>();
  Problem2d<N> problem(t, t_abs, n, H.inverse());
  const double kde = sums.t(0) / (n * 2.0 * pi * std::sqrt(H.det()));
  Vec a = Vec::Zero();
  a(0) = std::log(std::max(kde, 1e-12));
  const auto res = detail::newton_maximize(problem, a);
  LocalFit fit;
  fit.degree = degree;
  fit.coefficients = a;
  fit.converged = res.converged;
  fit.iterations = res.iterations;
  fit.scaled_gradient = res.scaled_gradient;
  return fit;
}

LocalFit
fit2d(std::span<const Point> pts, const BandwidthMatrix& H, int degree, Point at)
{
  check_degree(degree);
  if (pts.empty())
    throw NoLocalData("local likelihood: empty sample");
  const auto sums = weighted_sums2(pts, H.inverse(), at);
  check_weights(sums.t(0));
  const double n = static_cast<double>(pts.size());
  return degree == 1 ? solve2d<3>(sums, n, H, degree) : solve2d<6>(sums, n, H, degree);
}

} // namespace

std::size_t
coefficient_count(int degree, int dim)
{
  check_degree(degree);
  if (dim == 1)
    return static_cast<std::size_t>(degree) + 1;
  return degree == 1 ? 3 : 6;
}

void
KnnBandwidth::validate(std::size_t n) const
{
  if (k < 1 || k > n)
    throw std::invalid_argument("knn bandwidth: k must lie in [1, n]");
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("knn bandwidth: kappa must be positive");
  const Eigen::Matrix2d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("knn bandwidth: rotation is not orthonormal");
}

double
loclik_objective(const TransformedSample& ts,
                 const BandwidthMatrix& H,
                 int degree,
                 Point at,
                 const Eigen::VectorXd& a)
{
  const std::size_t ncoef = coefficient_count(degree, 2);
  if (static_cast<std::size_t>(a.size()) != ncoef)
    throw std::invalid_argument("loclik_objective: wrong number of coefficients");
  if (!a.allFinite())
    throw std::invalid_argument("loclik_objective: coefficients must be finite");
  const auto sums = weighted_sums2(ts.points, H.inverse(), at);
  const double n = static_cast<double>(ts.size());
  if (degree == 1) {
    Problem2d<3> problem(sums.t.head<3>(), sums.t_abs.head<3>(), n, H.inverse());
    return problem.value(a);
  }
  Problem2d<6> problem(sums.t, sums.t_abs, n, H.inverse());
  return problem.value(a);
}

LocalFit
loclik_fit_point(const TransformedSample& ts,
                 const BandwidthMatrix& H,
                 int degree,
                 Point at)
{
  return fit2d(ts.points, H, degree, at);
}

double
knn_distance(std::span<const Point> scores, double kappa, std::size_t k, Point at)
{
  if (k < 1 || k > scores.size())
    throw std::invalid_argument("knn_distance: k must lie in [1, n]");
  std::vector<double> d2(scores.size());
  const double k2 = kappa * kappa;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double dq = at.x - scores[i].x;
    const double dr = at.y - scores[i].y;
    d2[i] = dq * dq + k2 * dr * dr;
  }
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(k - 1), d2.end());
  return std::sqrt(d2[k - 1]);
}

BandwidthMatrix
knn_local_matrix(const KnnBandwidth& bw, double distance)
{
  if (!(distance > 0.0))
    throw NoLocalData("knn bandwidth: zero neighbour distance");
  const double d2 = knn_scale_2d * knn_scale_2d * distance * distance;
  const Eigen::Matrix2d qr =
    Eigen::Vector2d(d2, d2 / (bw.kappa * bw.kappa)).asDiagonal();
  return BandwidthMatrix(Eigen::Matrix2d(bw.rotation.transpose() * qr * bw.rotation));
}

LocalFit
loclik_fit_point(const TransformedSample& ts,
                 const KnnBandwidth& bw,
                 int degree,
                 Point at)
{
  return ImprovedEstimator(ts, bw, degree).fit(at);
}

ImprovedEstimator::ImprovedEstimator(TransformedSample ts, BandwidthSpec bw, int degree)
  : ts_(std::move(ts))
  , bw_(std::move(bw))
  , degree_(degree)
{
  check_degree(degree);
  if (ts_.size() == 0)
    throw std::invalid_argument("improved estimator: empty sample");
  if (const auto* knn = std::get_if<KnnBandwidth>(&bw_)) {
    knn->validate(ts_.size());
    scaled_scores_.reserve(ts_.size());
    for (const auto& p : ts_.points) {
      const Eigen::Vector2d qr = knn->rotation * Eigen::Vector2d(p.x, p.y);
      scaled_scores_.push_back({ qr(0), knn->kappa * qr(1) });
    }
  }
}

BandwidthMatrix
ImprovedEstimator::local_matrix(Point st) const
{
  if (const auto* fixed = std::get_if<BandwidthMatrix>(&bw_))
    return *fixed;
  const auto& knn = std::get<KnnBandwidth>(bw_);
  const Eigen::Vector2d qr = knn.rotation * Eigen::Vector2d(st.x, st.y);
  const double d = knn_distance(scaled_scores_, 1.0, knn.k, { qr(0), knn.kappa * qr(1) });
  return knn_local_matrix(knn, d);
}

LocalFit
ImprovedEstimator::fit(Point st) const
{
  return fit2d(ts_.points, local_matrix(st), degree_, st);
}

double
ImprovedEstimator::operator()(double u, double v) const
{
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw std::domain_error("improved_estimate: (u, v) must lie in (0, 1)^2");
  const double s = probit(u), t = probit(v);
  return fit({ s, t }).density() / (normal_pdf(s) * normal_pdf(t));
}

double
improved_estimate(const TransformedSample& ts,
                  const BandwidthSpec& bw,
                  int degree,
                  double u,
                  double v)
{
  return ImprovedEstimator(ts, bw, degree)(u, v);
}

// univariate

namespace {

template<int N>
LocalFit
solve1d(const Eigen::Vector3d& t, const Eigen::Vector3d& t_abs, double n, double h,
        int degree)
{
  using Vec = Eigen::Matrix<double, N, 1>;
  Problem1d<N> problem(t.head<N>(), t_abs.head<N>(), n, h);
  const double kde = t(0) / (n * std::sqrt(2.0 * pi) * h);
  Vec a = Vec::Zero();
  a(0) = std::log(std::max(kde, 1e-12));
  const auto res = detail::newton_maximize(problem, a);
  LocalFit fit;
  fit.degree = degree;
  fit.coefficients = a;
  fit.converged = res.converged;
  fit.iterations = res.iterations;
  fit.scaled_gradient = res.scaled_gradient;
  return fit;
}

} // namespace

LocalFit
loclik_fit_point_1d(std::span<const double> x,
                    double h,
                    int degree,
                    double at,
                    std::size_t exclude)
{
  check_degree(degree);
  if (!(h > 0.0) || !std::isfinite(h))
    throw NoLocalData("local likelihood: bandwidth must be positive");
  Eigen::Vector3d t = Eigen::Vector3d::Zero(), t_abs = Eigen::Vector3d::Zero();
  const double prec = 1.0 / (h * h);
  std::size_t used = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i == exclude)
      continue;
    ++used;
    const double z = x[i] - at;
    const double w = std::exp(-0.5 * prec * z * z);
    t(0) += w;
    t(1) += w * z;
    t(2) += w * z * z;
    t_abs(1) += w * std::fabs(z);
  }
  t_abs(0) = t(0);
  t_abs(2) = t(2);
  if (used == 0)
    throw NoLocalData("local likelihood: empty sample");
  check_weights(t(0));
  const double n = static_cast<double>(used);
  return degree == 1 ? solve1d<2>(t, t_abs, n, h, degree)
                     : solve1d<3>(t, t_abs, n, h, degree);
}

double
loclik_objective_1d(std::span<const double> x,
                    double h,
                    int degree,
                    double at,
                    const Eigen::VectorXd& a)
{
  const std::size_t ncoef = coefficient_count(degree, 1);
  if (static_cast<std::size_t>(a.size()) != ncoef)
    throw std::invalid_argument("loclik_objective_1d: wrong number of coefficients");
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  for (double xi : x) {
    const double z = xi - at;
    const double w = std::exp(-0.5 * z * z / (h * h));
    t += w * Eigen::Vector3d(1.0, z, z * z);
  }
  const double n = static_cast<double>(x.size());
  if (degree == 1)
    return Problem1d<2>(t.head<2>(), t.head<2>(), n, h).value(a);
  return Problem1d<3>(t, t, n, h).value(a);
}

double
knn_distance_1d(std::span<const double> sorted,
                std::size_t k,
                double at,
                std::size_t exclude)
{
  const std::size_t avail = sorted.size() - (exclude < sorted.size() ? 1 : 0);
  if (k < 1 || k > avail)
    throw std::invalid_argument("knn_distance_1d: k must lie in [1, n]");
  // merge outwards from the insertion point
  auto hi = static_cast<std::size_t>(
    std::lower_bound(sorted.begin(), sorted.end(), at) - sorted.begin());
  std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(hi) - 1;
  double d = 0.0;
  for (std::size_t found = 0; found < k;) {
    if (lo >= 0 && static_cast<std::size_t>(lo) == exclude) {
      --lo;
      continue;
    }
    if (hi < sorted.size() && hi == exclude) {
      ++hi;
      continue;
    }
    const double dl = lo >= 0 ? at - sorted[static_cast<std::size_t>(lo)]
                              : std::numeric_limits<double>::infinity();
    const double dh = hi < sorted.size() ? sorted[hi] - at
                                         : std::numeric_limits<double>::infinity();
    if (dl <= dh) {
      d = dl;
      --lo;
    } else {
      d = dh;
      ++hi;
    }
    ++found;
  }
  return d;
}

std::size_t
knn_count(double alpha, double factor, std::size_t n, int degree)
{
  const auto lower = static_cast<std::size_t>(std::max(6, 3 * degree));
  const double raw = std::round(factor * alpha * static_cast<double>(n));
  std::size_t k = raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
  k = std::max(k, lower);
  return std::min(k, n);
}

} // namespace probitcop
