#include "probitcop/copula.hpp"
#include "probitcop/normal.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace probitcop {

std::string
to_string(CopulaFamily family)
{
  switch (family) {
    case CopulaFamily::independence:
      return "independence";
    case CopulaFamily::gaussian:
      return "gaussian";
    case CopulaFamily::student_t:
      return "t";
    case CopulaFamily::frank:
      return "frank";
    case CopulaFamily::gumbel:
      return "gumbel";
    case CopulaFamily::clayton:
      return "clayton";
  }
  return "unknown";
}

CopulaModel::CopulaModel(CopulaFamily family, double param, double df)
  : family_(family)
  , param_(param)
  , df_(df)
{
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument(to_string(family) + " copula: " + what);
  };
  if (!std::isfinite(param))
    fail("parameter must be finite");
  switch (family) {
    case CopulaFamily::independence:
      param_ = 0.0;
      break;
    case CopulaFamily::student_t:
      if (!(df > 0.0) || !std::isfinite(df))
        fail("degrees of freedom must be positive");
      [[fallthrough]];
    case CopulaFamily::gaussian:
      if (!(param > -1.0 && param < 1.0))
        fail("rho must lie in (-1, 1)");
      break;
    case CopulaFamily::frank:
      if (param == 0.0)
        fail("theta must be non-zero");
      break;
    case CopulaFamily::gumbel:
      if (!(param >= 1.0))
        fail("theta must be >= 1");
      break;
    case CopulaFamily::clayton:
      if (!(param > 0.0))
        fail("theta must be > 0");
      break;
  }
}

CopulaModel
CopulaModel::parse(const std::string& spec)
{
  const auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  for (auto& c : name)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream rest(spec.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("copula spec '" + spec + "': expected key=value");
      try {
        std::size_t used = 0;
        const std::string value = item.substr(eq + 1);
        kv[item.substr(0, eq)] = std::stod(value, &used);
        if (used != value.size())
          throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::invalid_argument("copula spec '" + spec + "': bad number in '" +
                                    item + "'");
      }
    }
  }
  auto get = [&](const std::string& key) -> double {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::invalid_argument("copula spec '" + spec + "': missing " + key);
    return it->second;
  };

  CopulaFamily family;
  if (name == "independence" || name == "indep" || name == "pi")
    return independence();
  else if (name == "gaussian" || name == "normal" || name == "gauss")
    family = CopulaFamily::gaussian;
  else if (name == "t" || name == "student" || name == "student_t")
    family = CopulaFamily::student_t;
  else if (name == "frank")
    family = CopulaFamily::frank;
  else if (name == "gumbel")
    family = CopulaFamily::gumbel;
  else if (name == "clayton")
    family = CopulaFamily::clayton;
  else
    throw std::invalid_argument("unknown copula family '" + name + "'");

  const bool elliptical =
    family == CopulaFamily::gaussian || family == CopulaFamily::student_t;
  const std::string key = elliptical ? "rho" : "theta";
  const double param = kv.count("tau") ? tau_to_param(family, get("tau")) : get(key);
  const double df = family == CopulaFamily::student_t ? get("nu") : 0.0;
  return CopulaModel(family, param, df);
}

std::string
CopulaModel::str() const
{
  // shortest representation that reads back to the same double
  auto num = [](double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  };
  std::string s = to_string(family_);
  switch (family_) {
    case CopulaFamily::independence:
      break;
    case CopulaFamily::gaussian:
      s += ":rho=" + num(param_);
      break;
    case CopulaFamily::student_t:
      s += ":rho=" + num(param_) + ",nu=" + num(df_);
      break;
    default:
      s += ":theta=" + num(param_);
  }
  return s;
}

namespace {

void
check_open_square(double u, double v)
{
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
    throw std::domain_error("copula density: (u, v) must lie in (0, 1)^2");
  }
}

double
gaussian_density(double rho, double u, double v)
{
  const double x = probit(u);
  const double y = probit(v);
  const double r2 = 1.0 - rho * rho;
  const double q = (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
  return std::exp(-q) / std::sqrt(r2);
}

double
t_density(double rho, double nu, double u, double v)
{
  boost::math::students_t_distribution<double> t(nu);
  const double x = boost::math::quantile(t, u);
  const double y = boost::math::quantile(t, v);
  const double r2 = 1.0 - rho * rho;
  // log of the bivariate t density
  const double log_f2 = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) -
                        std::log(nu * pi) - 0.5 * std::log(r2) -
                        0.5 * (nu + 2.0) *
                          std::log1p((x * x - 2.0 * rho * x * y + y * y) / (nu * r2));
  auto log_f1 = [nu](double z) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
           0.5 * std::log(nu * pi) - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
  };
  return std::exp(log_f2 - log_f1(x) - log_f1(y));
}

double
frank_density(double theta, double u, double v)
{
  // theta (1 - e^-theta) e^{-theta(u+v)} / [(1-e^-theta) - (1-e^{-theta u})(1-e^{-theta v})]^2
  const double a = -std::expm1(-theta);
  const double bu = -std::expm1(-theta * u);
  const double bv = -std::expm1(-theta * v);
  const double denom = a - bu * bv;
  return theta * a * std::exp(-theta * (u + v)) / (denom * denom);
}

double
clayton_density(double theta, double u, double v)
{
  const double lu = std::log(u);
  const double lv = std::log(v);
  const double s = std::exp(-theta * lu) + std::exp(-theta * lv) - 1.0;
  return std::exp(std::log1p(theta) - (theta + 1.0) * (lu + lv) -
                  (2.0 + 1.0 / theta) * std::log(s));
}

double
gumbel_density(double theta, double u, double v)
{
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double a = std::pow(std::pow(x, theta) + std::pow(y, theta), 1.0 / theta);
  // c = C (xy)^{theta-1} / (uv) A^{1-2 theta} (A + theta - 1)
  const double log_c = -a + (theta - 1.0) * std::log(x * y) + x + y +
                       (1.0 - 2.0 * theta) * std::log(a) + std::log(a + theta - 1.0);
  return std::exp(log_c);
}

} // namespace

double
CopulaModel::density(double u, double v) const
{
  check_open_square(u, v);
  switch (family_) {
    case CopulaFamily::independence:
      return 1.0;
    case CopulaFamily::gaussian:
      return gaussian_density(param_, u, v);
    case CopulaFamily::student_t:
      return t_density(param_, df_, u, v);
    case CopulaFamily::frank:
      return frank_density(param_, u, v);
    case CopulaFamily::gumbel:
      return gumbel_density(param_, u, v);
    case CopulaFamily::clayton:
      return clayton_density(param_, u, v);
  }
  return 0.0;
}

double
CopulaModel::cdf(double u, double v) const
{
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  if (u == 0.0 || v == 0.0)
    return 0.0;
  switch (family_) {
    case CopulaFamily::independence:
      return u * v;
    case CopulaFamily::frank: {
      const double t = param_;
      return -std::log1p(std::expm1(-t * u) * std::expm1(-t * v) / std::expm1(-t)) / t;
    }
    case CopulaFamily::gumbel: {
      const double a = std::pow(std::pow(-std::log(u), param_) +
                                  std::pow(-std::log(v), param_),
                                1.0 / param_);
      return std::exp(-a);
    }
    case CopulaFamily::clayton:
      return std::pow(std::pow(u, -param_) + std::pow(v, -param_) - 1.0, -1.0 / param_);
    default:
      throw std::logic_error("cdf not available for the " + to_string(family_) +
                             " copula");
  }
}

double
frank_tau(double theta)
{
  if (theta == 0.0)
    return 0.0;
  const double a = std::fabs(theta);
  // Debye function D_1(a) = (1/a) int_0^a t / (e^t - 1) dt
  auto integrand = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
  const double d1 =
    boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, a, 15,
                                                                    1e-14) /
    a;
  const double tau = 1.0 - 4.0 / a + 4.0 * d1 / a;
  return theta > 0.0 ? tau : -tau;
}

double
CopulaModel::kendall_tau() const
{
  switch (family_) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian:
    case CopulaFamily::student_t:
      return 2.0 / pi * std::asin(param_);
    case CopulaFamily::frank:
      return frank_tau(param_);
    case CopulaFamily::gumbel:
      return 1.0 - 1.0 / param_;
    case CopulaFamily::clayton:
      return param_ / (param_ + 2.0);
  }
  return 0.0;
}

double
tau_to_param(CopulaFamily family, double tau)
{
  if (!(tau > -1.0 && tau < 1.0))
    throw std::domain_error("tau_to_param: tau must lie in (-1, 1)");
  switch (family) {
    case CopulaFamily::independence:
      if (tau != 0.0)
        throw std::domain_error("tau_to_param: independence requires tau = 0");
      return 0.0;
    case CopulaFamily::gaussian:
    case CopulaFamily::student_t:
      return std::sin(pi * tau / 2.0);
    case CopulaFamily::gumbel:
      if (!(tau >= 0.0))
        throw std::domain_error("tau_to_param: Gumbel requires tau >= 0");
      return 1.0 / (1.0 - tau);
    case CopulaFamily::clayton:
      if (!(tau > 0.0))
        throw std::domain_error("tau_to_param: Clayton requires tau > 0");
      return 2.0 * tau / (1.0 - tau);
    case CopulaFamily::frank: {
      if (tau == 0.0)
        throw std::domain_error("tau_to_param: Frank requires tau != 0");
      const double target = std::fabs(tau);
      double lo = 1e-6, hi = 100.0;
      if (frank_tau(hi) < target)
        throw std::domain_error("tau_to_param: tau beyond the Frank search range");
      // tau(theta) is increasing; bisect until |tau error| <= 1e-8 is certain
      while (hi - lo > 1e-12 * (1.0 + hi)) {
        const double mid = 0.5 * (lo + hi);
        (frank_tau(mid) < target ? lo : hi) = mid;
      }
      const double theta = 0.5 * (lo + hi);
      return tau > 0.0 ? theta : -theta;
    }
  }
  return 0.0;
}

std::vector<Point>
CopulaModel::sample(std::size_t n, std::uint64_t seed) const
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  // uniform on (0, 1), never exactly 0
  auto open_unif = [&]() {
    double w;
    do {
      w = unif(rng);
    } while (w <= 0.0);
    return w;
  };

  std::vector<Point> out(n);
  switch (family_) {
    case CopulaFamily::independence:
      for (auto& p : out)
        p = { open_unif(), open_unif() };
      break;
    case CopulaFamily::gaussian: {
      const double c = std::sqrt(1.0 - param_ * param_);
      for (auto& p : out) {
        const double z1 = normal(rng);
        const double z2 = param_ * z1 + c * normal(rng);
        p = { normal_cdf(z1), normal_cdf(z2) };
      }
      break;
    }
    case CopulaFamily::student_t: {
      const double c = std::sqrt(1.0 - param_ * param_);
      std::chi_squared_distribution<double> chi2(df_);
      boost::math::students_t_distribution<double> t(df_);
      for (auto& p : out) {
        const double z1 = normal(rng);
        const double z2 = param_ * z1 + c * normal(rng);
        const double scale = std::sqrt(chi2(rng) / df_);
        p = { boost::math::cdf(t, z1 / scale), boost::math::cdf(t, z2 / scale) };
      }
      break;
    }
    case CopulaFamily::clayton: {
      // Marshall-Olkin: frailty S ~ Gamma(1/theta), generator (1 + t)^(-1/theta)
      std::gamma_distribution<double> frailty(1.0 / param_, 1.0);
      for (auto& p : out) {
        double s;
        do {
          s = frailty(rng);
        } while (s <= 0.0);
        const double e1 = expo(rng), e2 = expo(rng);
        p = { std::exp(-std::log1p(e1 / s) / param_),
              std::exp(-std::log1p(e2 / s) / param_) };
      }
      break;
    }
    case CopulaFamily::gumbel: {
      // Marshall-Olkin with a positive stable frailty (Kanter's representation)
      const double alpha = 1.0 / param_;
      for (auto& p : out) {
        double s = 1.0;
        if (alpha < 1.0) {
          const double w = pi * open_unif();
          const double e = expo(rng);
          s = std::sin(alpha * w) / std::pow(std::sin(w), 1.0 / alpha) *
              std::pow(std::sin((1.0 - alpha) * w) / e, (1.0 - alpha) / alpha);
        }
        const double e1 = expo(rng), e2 = expo(rng);
        p = { std::exp(-std::pow(e1 / s, alpha)), std::exp(-std::pow(e2 / s, alpha)) };
      }
      break;
    }
    case CopulaFamily::frank: {
      // conditional inversion of dC/du
      const double t = param_;
      const double d = std::expm1(-t);
      for (auto& p : out) {
        const double u = open_unif();
        const double w = open_unif();
        const double a = std::exp(-t * u);
        const double v = -std::log1p(w * d / (w + (1.0 - w) * a)) / t;
        p = { u, v };
      }
      break;
    }
  }
  // guard against rounding onto the boundary in the extreme tails
  for (auto& p : out) {
    p.x = std::clamp(p.x, 1e-300, std::nextafter(1.0, 0.0));
    p.y = std::clamp(p.y, 1e-300, std::nextafter(1.0, 0.0));
  }
  return out;
}

double
copula_density(const CopulaModel& model, double u, double v)
{
  return model.density(u, v);
}

std::vector<Point>
sample_copula(const CopulaModel& model, std::size_t n, std::uint64_t seed)
{
  if (n == 0)
    throw std::invalid_argument("sample_copula: n must be >= 1");
  return model.sample(n, seed);
}

} // namespace probitcop
