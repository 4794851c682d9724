#include "probitcop/bandwidth.hpp"
#include "probitcop/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace probitcop {

namespace {

constexpr std::size_t no_index = static_cast<std::size_t>(-1);
constexpr double inf = std::numeric_limits<double>::infinity();

double
sample_sd(std::span<const double> x)
{
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double xi : x)
    ss += (xi - mean) * (xi - mean);
  return std::sqrt(ss / (n - 1.0));
}

// density of the univariate fit at `at`, throwing NoLocalData on failure
class UnivariateFitter
{
public:
  UnivariateFitter(std::span<const double> sorted, int degree, UnivariateSmoothing sm)
    : x_(sorted)
    , degree_(degree)
    , sm_(sm)
  {
    if (sm.kind == UnivariateSmoothing::Kind::knn)
      k_ = knn_count(sm.value, 1.0, x_.size(), degree);
  }

  LocalFit fit(double at, std::size_t exclude = no_index) const
  {
    double h = sm_.value;
    if (sm_.kind == UnivariateSmoothing::Kind::knn) {
      const std::size_t avail = x_.size() - (exclude == no_index ? 0 : 1);
      h = knn_scale_1d * knn_distance_1d(x_, std::min(k_, avail), at, exclude);
    }
    return loclik_fit_point_1d(x_, h, degree_, at, exclude);
  }

private:
  std::span<const double> x_;
  int degree_;
  UnivariateSmoothing sm_;
  std::size_t k_{ 0 };
};

std::string
format_double(double x)
{
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

} // namespace

std::vector<double>
PcaDecomposition::q() const
{
  std::vector<double> out(scores.size());
  std::transform(scores.begin(), scores.end(), out.begin(), [](Point p) { return p.x; });
  return out;
}

std::vector<double>
PcaDecomposition::r() const
{
  std::vector<double> out(scores.size());
  std::transform(scores.begin(), scores.end(), out.begin(), [](Point p) { return p.y; });
  return out;
}

PcaDecomposition
pca_scores(const TransformedSample& ts)
{
  const std::size_t n = ts.size();
  if (n < 3)
    throw std::invalid_argument("pca_scores: at least 3 observations required");
  double ms = 0.0, mt = 0.0;
  for (const auto& p : ts.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw std::invalid_argument("pca_scores: non-finite transformed observation");
    ms += p.x;
    mt += p.y;
  }
  ms /= static_cast<double>(n);
  mt /= static_cast<double>(n);
  Eigen::Matrix2d cross = Eigen::Matrix2d::Zero();
  for (const auto& p : ts.points) {
    const Eigen::Vector2d z(p.x - ms, p.y - mt);
    cross += z * z.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cross);
  const Eigen::Vector2d ev = eig.eigenvalues(); // ascending
  if (!(ev(0) > 1e-12 * ev(1)))
    throw std::invalid_argument("pca_scores: degenerate (collinear) data");

  Eigen::Vector2d lead = eig.eigenvectors().col(1).normalized();
  if (lead(0) < 0.0 || (lead(0) == 0.0 && lead(1) < 0.0))
    lead = -lead;
  PcaDecomposition pca;
  pca.W << lead(0), lead(1), lead(1), -lead(0);
  pca.eigenvalues << ev(1), ev(0);
  pca.scores.reserve(n);
  for (const auto& p : ts.points) {
    const Eigen::Vector2d qr = pca.W * Eigen::Vector2d(p.x, p.y);
    pca.scores.push_back({ qr(0), qr(1) });
  }
  return pca;
}

CvTerms
cv_terms_1d(std::span<const double> sample,
            int degree,
            UnivariateSmoothing smoothing,
            unsigned threads)
{
  const std::size_t n = sample.size();
  if (n < 10)
    throw std::invalid_argument("cv_criterion_1d: at least 10 observations required");
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("cv_criterion_1d: degree must be 1 or 2");
  if (smoothing.kind == UnivariateSmoothing::Kind::fixed) {
    if (!(smoothing.value > 0.0) || !std::isfinite(smoothing.value))
      throw std::invalid_argument("cv_criterion_1d: bandwidth must be positive");
  } else if (!(smoothing.value > 0.0 && smoothing.value < 1.0)) {
    throw std::invalid_argument("cv_criterion_1d: alpha must lie in (0, 1)");
  }
  std::vector<double> x(sample.begin(), sample.end());
  for (double xi : x)
    if (!std::isfinite(xi))
      throw std::invalid_argument("cv_criterion_1d: non-finite observation");
  std::sort(x.begin(), x.end());
  const UnivariateFitter fitter(x, degree, smoothing);

  // leave-one-out term
  std::vector<double> loo(n, 0.0);
  std::vector<char> loo_failed(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      const LocalFit f = fitter.fit(x[i], i);
      if (f.converged && std::isfinite(f.density()))
        loo[i] = f.density();
      else
        loo_failed[i] = 1;
    } catch (const NoLocalData&) {
      loo_failed[i] = 1;
    }
  });

  // integral of the squared full-sample estimate
  const double sd = sample_sd(x);
  const double lo = x.front() - 4.0 * sd;
  const double hi = x.back() + 4.0 * sd;
  const std::size_t m = cv_integration_nodes;
  const double step = (hi - lo) / static_cast<double>(m - 1);
  std::vector<double> sq(m, 0.0);
  std::vector<char> node_failed(m, 0);
  parallel_for(m, threads, [&](std::size_t j) {
    try {
      const LocalFit f = fitter.fit(lo + step * static_cast<double>(j));
      const double d = f.density();
      if (std::isfinite(d))
        sq[j] = d * d;
      else
        node_failed[j] = 1;
    } catch (const NoLocalData&) {
      node_failed[j] = 1;
    }
  });

  CvTerms out;
  for (std::size_t j = 0; j < m; ++j)
    out.integral_sq += (j == 0 || j + 1 == m ? 0.5 : 1.0) * sq[j];
  out.integral_sq *= step;
  out.loo_mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(n);
  out.loo_failures = static_cast<std::size_t>(std::count(loo_failed.begin(), loo_failed.end(), 1));
  out.integral_failures =
    static_cast<std::size_t>(std::count(node_failed.begin(), node_failed.end(), 1));
  out.valid = static_cast<double>(out.loo_failures) <= 0.2 * static_cast<double>(n);
  return out;
}

double
cv_criterion_1d(std::span<const double> sample,
                int degree,
                UnivariateSmoothing smoothing,
                unsigned threads)
{
  const CvTerms terms = cv_terms_1d(sample, degree, smoothing, threads);
  return terms.valid ? terms.value() : std::numeric_limits<double>::quiet_NaN();
}

double
fixed_bandwidth_factor(std::size_t n, int degree)
{
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("fixed_bandwidth_factor: degree must be 1 or 2");
  return std::pow(static_cast<double>(n), degree == 1 ? 1.0 / 15.0 : 1.0 / 45.0);
}

double
knn_fraction_factor(std::size_t n, int degree)
{
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("knn_fraction_factor: degree must be 1 or 2");
  return std::pow(static_cast<double>(n), degree == 1 ? -2.0 / 15.0 : -4.0 / 45.0);
}

BandwidthMatrix
assemble_bandwidth(const Eigen::Matrix2d& W, double h_q, double h_r, double factor)
{
  const Eigen::Matrix2d w_inv = W.inverse();
  const Eigen::Matrix2d d =
    Eigen::Vector2d(factor * h_q * h_q, factor * h_r * h_r).asDiagonal();
  Eigen::Matrix2d H = w_inv * d * w_inv;
  H(0, 1) = H(1, 0) = 0.5 * (H(0, 1) + H(1, 0));
  return BandwidthMatrix(H);
}

BandwidthSpec
SmoothingSelection::bandwidth() const
{
  if (mode == Mode::fixed) {
    if (!H_st)
      throw std::logic_error("smoothing selection: bandwidth matrix not assembled");
    return *H_st;
  }
  return KnnBandwidth{ k, kappa, W };
}

std::optional<double>
cv_bandwidth_1d(std::span<const double> sample, int degree, const SelectionOptions& opt)
{
  const double sd = sample_sd(sample);
  const double lo = std::log(0.05 * sd);
  const double hi = std::log(3.0 * sd);
  auto crit = [&](double log_h) {
    const double c = cv_criterion_1d(
      sample, degree, UnivariateSmoothing::bandwidth(std::exp(log_h)), opt.threads);
    return std::isnan(c) ? inf : c;
  };
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
  double f1 = crit(x1), f2 = crit(x2);
  while (b - a > opt.log_h_tolerance) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - golden * (b - a);
      f1 = crit(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + golden * (b - a);
      f2 = crit(x2);
    }
  }
  const double best = f1 <= f2 ? x1 : x2;
  if (!std::isfinite(std::min(f1, f2)))
    return std::nullopt;
  if (best - lo < 2.0 * opt.log_h_tolerance || hi - best < 2.0 * opt.log_h_tolerance)
    return std::nullopt;
  return std::exp(best);
}

std::optional<double>
cv_fraction_1d(std::span<const double> sample, int degree, const SelectionOptions& opt)
{
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double alpha = opt.alpha_min + opt.alpha_step * i;
    if (alpha > opt.alpha_max + 1e-9)
      break;
    grid.push_back(alpha);
  }
  std::optional<double> best;
  double best_value = inf;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double c =
      cv_criterion_1d(sample, degree, UnivariateSmoothing::fraction(grid[i]), opt.threads);
    if (std::isnan(c))
      continue;
    if (c <= best_value) { // ties go to the larger fraction
      best_value = c;
      best = grid[i];
      best_index = i;
    }
  }
  if (best && best_index == 0 && grid.size() > 1)
    return std::nullopt;
  return best;
}

SmoothingSelection
select_fixed(const TransformedSample& ts, int degree, const SelectionOptions& opt)
{
  const PcaDecomposition pca = pca_scores(ts);
  const std::size_t n = ts.size();
  SmoothingSelection sel;
  sel.mode = SmoothingSelection::Mode::fixed;
  sel.degree = degree;
  sel.n = n;
  sel.W = pca.W;
  sel.factor = fixed_bandwidth_factor(n, degree);

  auto choose = [&](const std::vector<double>& scores, const char* name) {
    if (auto h = cv_bandwidth_1d(scores, degree, opt))
      return *h;
    const double h = std::pow(4.0 / (3.0 * static_cast<double>(n)), 0.2) * sample_sd(scores);
    sel.warnings.push_back(std::string("no interior cross-validation minimum for h_") +
                           name + "; using normal reference h = " + format_double(h));
    return h;
  };
  sel.h_q = choose(pca.q(), "Q");
  sel.h_r = choose(pca.r(), "R");
  sel.H_st = assemble_bandwidth(pca.W, sel.h_q, sel.h_r, sel.factor);
  return sel;
}

SmoothingSelection
select_knn(const TransformedSample& ts, int degree, const SelectionOptions& opt)
{
  const PcaDecomposition pca = pca_scores(ts);
  const std::size_t n = ts.size();
  SmoothingSelection sel;
  sel.mode = SmoothingSelection::Mode::knn;
  sel.degree = degree;
  sel.n = n;
  sel.W = pca.W;
  sel.factor = knn_fraction_factor(n, degree);

  auto choose = [&](const std::vector<double>& scores, const char* name) {
    if (auto a = cv_fraction_1d(scores, degree, opt))
      return *a;
    sel.warnings.push_back(std::string("no valid cross-validation minimum for alpha_") +
                           name + "; using alpha = " + format_double(opt.fallback_alpha));
    return opt.fallback_alpha;
  };
  sel.alpha_q = choose(pca.q(), "Q");
  sel.alpha_r = choose(pca.r(), "R");
  sel.kappa = sel.alpha_q / sel.alpha_r;
  sel.k = knn_count(sel.alpha_q, sel.factor, n, degree);
  return sel;
}

} // namespace probitcop
