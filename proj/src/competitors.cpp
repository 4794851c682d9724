#include "probitcop/competitors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace probitcop {

namespace {

std::string
trim(std::string s)
{
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double
parse_number(const std::string& text, const std::string& spec)
{
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw std::invalid_argument("invalid number '" + text + "' in '" + spec + "'");
  return x;
}

bool
in_unit_square(double u, double v)
{
  return u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0;
}

} // namespace

CompetitorSpec
CompetitorSpec::parse(const std::string& spec)
{
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  const std::string kind = trim(s.substr(0, colon));
  const std::string args = colon == std::string::npos ? "" : s.substr(colon + 1);

  CompetitorSpec out;
  if (kind == "mirror") {
    out.kind = Kind::mirror;
    if (!trim(args).empty())
      throw std::invalid_argument("mirror takes no parameters: '" + spec + "'");
    return out;
  }
  if (kind != "beta" && kind != "bernstein")
    throw std::invalid_argument("unknown competitor '" + spec + "'");
  out.kind = kind == "beta" ? Kind::beta : Kind::bernstein;
  const std::string key = kind == "beta" ? "h" : "k";
  const auto eq = args.find('=');
  if (eq == std::string::npos || trim(args.substr(0, eq)) != key)
    throw std::invalid_argument(kind + " requires '" + key + "=<value>': '" + spec + "'");
  const double value = parse_number(trim(args.substr(eq + 1)), spec);
  if (out.kind == Kind::beta) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::invalid_argument("beta bandwidth must be positive: '" + spec + "'");
    out.h = value;
  } else {
    if (!(value >= 1.0) || value != std::floor(value) || value > 1e6)
      throw std::invalid_argument("bernstein k must be a positive integer: '" + spec + "'");
    out.k = static_cast<std::size_t>(value);
  }
  return out;
}

std::string
CompetitorSpec::str() const
{
  std::ostringstream os;
  switch (kind) {
    case Kind::mirror:
      os << "mirror";
      break;
    case Kind::beta:
      os << "beta:h=" << h;
      break;
    case Kind::bernstein:
      os << "bernstein:k=" << k;
      break;
  }
  return os.str();
}

// mirror reflection

namespace {

std::vector<Point>
reflect(const PseudoSample& ps)
{
  std::vector<Point> out;
  out.reserve(9 * ps.size());
  for (const auto& p : ps.points) {
    const double us[3] = { p.x, -p.x, 2.0 - p.x };
    const double vs[3] = { p.y, -p.y, 2.0 - p.y };
    for (double u : us)
      for (double v : vs)
        out.push_back({ u, v });
  }
  return out;
}

std::vector<Point>
checked_reflection(const PseudoSample& ps)
{
  if (ps.size() < 3)
    throw std::invalid_argument("mirror estimator: at least 3 observations required");
  return reflect(ps);
}

} // namespace

MirrorEstimator::MirrorEstimator(const PseudoSample& ps)
  : augmented_(checked_reflection(ps))
  , H_(Eigen::Matrix2d(normal_reference_H(augmented_).matrix() * std::pow(1.0 / 9.0, 2.0 / 3.0)))
  , scale_(9.0)
{
}

double
MirrorEstimator::operator()(double u, double v) const
{
  if (!in_unit_square(u, v))
    throw std::domain_error("mirror estimator: (u, v) must lie in [0, 1]^2");
  return scale_ * gaussian_kde2(augmented_, H_, { u, v });
}

double
mirror_estimate(const PseudoSample& ps, double u, double v)
{
  return MirrorEstimator(ps)(u, v);
}

// beta kernel

std::pair<double, double>
beta_kernel_shapes(double x, double h)
{
  auto rho = [h](double y) {
    return 2.0 * h * h + 2.5 - std::sqrt(4.0 * h * h * h * h + 6.0 * h * h + 2.25 - y * y - y / h);
  };
  double a = x / h, b = (1.0 - x) / h;
  if (x < 2.0 * h)
    a = rho(x);
  if (x > 1.0 - 2.0 * h)
    b = rho(1.0 - x);
  return { a, b };
}

namespace {

double
beta_pdf(double x, double a, double b)
{
  const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta);
}

} // namespace

BetaEstimator::BetaEstimator(const PseudoSample& ps, double h)
  : h_(h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("beta estimator: h must be positive");
  if (ps.size() == 0)
    throw std::invalid_argument("beta estimator: empty sample");
  u_.reserve(ps.size());
  v_.reserve(ps.size());
  for (const auto& p : ps.points) {
    if (!(p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0))
      throw std::invalid_argument("beta estimator: pseudo-observations must lie in (0, 1)");
    u_.push_back(p.x);
    v_.push_back(p.y);
  }
}

double
BetaEstimator::operator()(double u, double v) const
{
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
    throw std::domain_error("beta estimator: (u, v) must lie in (0, 1)^2");
  const auto [a1, b1] = beta_kernel_shapes(u, h_);
  const auto [a2, b2] = beta_kernel_shapes(v, h_);
  double sum = 0.0;
  for (std::size_t i = 0; i < u_.size(); ++i)
    sum += beta_pdf(u_[i], a1, b1) * beta_pdf(v_[i], a2, b2);
  return sum / static_cast<double>(u_.size());
}

Eigen::MatrixXd
BetaEstimator::kernel_matrix(const std::vector<double>& at, bool first) const
{
  const auto& data = first ? u_ : v_;
  Eigen::MatrixXd K(at.size(), data.size());
  for (std::size_t r = 0; r < at.size(); ++r) {
    const auto [a, b] = beta_kernel_shapes(at[r], h_);
    for (std::size_t i = 0; i < data.size(); ++i)
      K(r, i) = beta_pdf(data[i], a, b);
  }
  return K;
}

DensityGrid
BetaEstimator::grid(std::size_t n, Lattice lattice) const
{
  DensityGrid out(n, lattice);
  std::vector<double> coords(n);
  for (std::size_t k = 0; k < n; ++k)
    coords[k] = out.coord(k);
  const Eigen::MatrixXd values =
    kernel_matrix(coords, true) * kernel_matrix(coords, false).transpose() /
    static_cast<double>(u_.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = values(i, j);
  return out;
}

double
beta_estimate(const PseudoSample& ps, double h, double u, double v)
{
  return BetaEstimator(ps, h)(u, v);
}

// Bernstein

Eigen::VectorXd
bernstein_basis(std::size_t m, double x)
{
  // de Casteljau-style recursion: stable for all x in [0, 1]
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m) + 1);
  b(0) = 1.0;
  for (std::size_t d = 1; d <= m; ++d) {
    for (std::size_t i = d; i > 0; --i)
      b(i) = (1.0 - x) * b(i) + x * b(i - 1);
    b(0) *= 1.0 - x;
  }
  return b;
}

BernsteinEstimator::BernsteinEstimator(Eigen::MatrixXd mass)
  : mass_(std::move(mass))
  , k_(static_cast<std::size_t>(mass_.rows()))
{
}

namespace {

// index i of the box (i/k, (i+1)/k] containing x in (0, 1]
std::size_t
box_index(double x, std::size_t k)
{
  const double kd = static_cast<double>(k);
  auto i = static_cast<std::ptrdiff_t>(std::ceil(x * kd)) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(k) - 1);
  while (i + 1 < static_cast<std::ptrdiff_t>(k) && x > static_cast<double>(i + 1) / kd)
    ++i;
  while (i > 0 && x <= static_cast<double>(i) / kd)
    --i;
  return static_cast<std::size_t>(i);
}

} // namespace

BernsteinEstimator::BernsteinEstimator(const PseudoSample& ps, std::size_t k)
  : k_(k)
{
  if (k < 1)
    throw std::invalid_argument("bernstein estimator: k must be at least 1");
  if (ps.size() == 0)
    throw std::invalid_argument("bernstein estimator: empty sample");
  const auto kk = static_cast<Eigen::Index>(k);
  mass_ = Eigen::MatrixXd::Zero(kk, kk);
  const double w = 1.0 / static_cast<double>(ps.size());
  for (const auto& p : ps.points) {
    if (!(p.x > 0.0 && p.x <= 1.0 && p.y > 0.0 && p.y <= 1.0))
      throw std::invalid_argument("bernstein estimator: pseudo-observations must lie in (0, 1]");
    mass_(static_cast<Eigen::Index>(box_index(p.x, k)),
          static_cast<Eigen::Index>(box_index(p.y, k))) += w;
  }
}

BernsteinEstimator
BernsteinEstimator::from_cdf(const std::function<double(double, double)>& cdf, std::size_t k)
{
  if (k < 1)
    throw std::invalid_argument("bernstein estimator: k must be at least 1");
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd c(kk + 1, kk + 1);
  for (Eigen::Index i = 0; i <= kk; ++i)
    for (Eigen::Index j = 0; j <= kk; ++j)
      c(i, j) = cdf(static_cast<double>(i) / static_cast<double>(k),
                    static_cast<double>(j) / static_cast<double>(k));
  Eigen::MatrixXd mass(kk, kk);
  for (Eigen::Index i = 0; i < kk; ++i)
    for (Eigen::Index j = 0; j < kk; ++j)
      mass(i, j) = c(i + 1, j + 1) - c(i, j + 1) - c(i + 1, j) + c(i, j);
  return BernsteinEstimator(std::move(mass));
}

double
BernsteinEstimator::operator()(double u, double v) const
{
  if (!in_unit_square(u, v))
    throw std::domain_error("bernstein estimator: (u, v) must lie in [0, 1]^2");
  const Eigen::VectorXd bu = bernstein_basis(k_ - 1, u);
  const Eigen::VectorXd bv = bernstein_basis(k_ - 1, v);
  const double kd = static_cast<double>(k_);
  return kd * kd * bu.dot(mass_ * bv);
}

DensityGrid
BernsteinEstimator::grid(std::size_t n, Lattice lattice) const
{
  DensityGrid out(n, lattice);
  Eigen::MatrixXd B(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k_));
  for (std::size_t r = 0; r < n; ++r)
    B.row(static_cast<Eigen::Index>(r)) = bernstein_basis(k_ - 1, out.coord(r)).transpose();
  const double kd = static_cast<double>(k_);
  const Eigen::MatrixXd values = kd * kd * B * mass_ * B.transpose();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return out;
}

double
bernstein_estimate(const PseudoSample& ps, std::size_t k, double u, double v)
{
  return BernsteinEstimator(ps, k)(u, v);
}

} // namespace probitcop
