#pragma once

#include "probitcop/transforms.hpp"

#include <cstdint>
#include <string>

namespace probitcop {

enum class CopulaFamily
{
  independence,
  gaussian,
  student_t,
  frank,
  gumbel,
  clayton
};

//! a parametric copula. `param` is rho for the elliptical families and theta
//! for the Archimedean ones; `df` is only used by the Student-t family.
class CopulaModel
{
public:
  CopulaModel() = default;
  CopulaModel(CopulaFamily family, double param = 0.0, double df = 0.0);

  static CopulaModel independence() { return {}; }
  static CopulaModel gaussian(double rho) { return { CopulaFamily::gaussian, rho }; }
  static CopulaModel student_t(double rho, double nu)
  {
    return { CopulaFamily::student_t, rho, nu };
  }
  static CopulaModel frank(double theta) { return { CopulaFamily::frank, theta }; }
  static CopulaModel gumbel(double theta) { return { CopulaFamily::gumbel, theta }; }
  static CopulaModel clayton(double theta) { return { CopulaFamily::clayton, theta }; }

  //! parses "independence", "gaussian:rho=0.59", "t:rho=0.31,nu=4",
  //! "frank:theta=1.86", "gumbel:theta=1.25", "clayton:theta=0.5". The
  //! Archimedean and elliptical families also accept "tau=..." instead.
  static CopulaModel parse(const std::string& spec);

  CopulaFamily family() const { return family_; }
  double param() const { return param_; }
  double df() const { return df_; }

  //! canonical spec string, the inverse of `parse`.
  std::string str() const;

  //! copula density c(u, v).
  //! @throws std::domain_error unless (u, v) lies in the open unit square.
  double density(double u, double v) const;

  //! copula cdf C(u, v) on [0, 1]^2 (Archimedean and independence only;
  //! the elliptical families throw std::logic_error).
  double cdf(double u, double v) const;

  //! population Kendall's tau.
  double kendall_tau() const;

  //! `n` i.i.d. draws; deterministic given `seed`.
  std::vector<Point> sample(std::size_t n, std::uint64_t seed) const;

private:
  CopulaFamily family_{ CopulaFamily::independence };
  double param_{ 0.0 };
  double df_{ 0.0 };
};

double
copula_density(const CopulaModel& model, double u, double v);

std::vector<Point>
sample_copula(const CopulaModel& model, std::size_t n, std::uint64_t seed);

//! parameter matching a Kendall's tau: rho = sin(pi tau / 2) for the
//! elliptical families, theta = 1 / (1 - tau) (Gumbel), 2 tau / (1 - tau)
//! (Clayton), numerical Debye inversion for Frank.
//! @throws std::domain_error for unattainable tau.
double
tau_to_param(CopulaFamily family, double tau);

//! Frank's tau(theta) = 1 - 4/theta + 4 D_1(theta)/theta.
double
frank_tau(double theta);

std::string
to_string(CopulaFamily family);

} // namespace probitcop
