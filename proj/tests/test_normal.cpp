#include "probitcop/normal.hpp"

#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace probitcop;

TEST_CASE("probit reference values")
{
  CHECK(probit(0.5) == 0.0);
  CHECK(std::abs(probit(0.975) - 1.959964) < 1e-6);
  CHECK(std::abs(probit(0.00134990) - (-3.0)) < 1e-4);
  CHECK(std::abs(probit(0.25) - (-0.6744897501960817)) < 1e-12);
}

TEST_CASE("probit against an independent quantile")
{
  const boost::math::normal_distribution<double> nd;
  for (double lu = -300.0; lu < -0.31; lu += 0.37) {
    const double u = std::pow(10.0, lu);
    CHECK(std::abs(probit(u) - boost::math::quantile(nd, u)) < 1e-9);
  }
  for (double u = 0.001; u < 1.0; u += 0.0137)
    CHECK(std::abs(probit(u) - boost::math::quantile(nd, u)) < 1e-9);
  const double u_hi = 1.0 - 1e-16;
  CHECK(std::abs(probit(u_hi) - boost::math::quantile(nd, u_hi)) < 1e-9);
}

TEST_CASE("probit antisymmetry and cdf round trip")
{
  for (double u = 0.0005; u < 0.5; u += 0.0123)
    CHECK(std::abs(probit(1.0 - u) + probit(u)) < 1e-12); // 1 - u is rounded
  // the upper half goes through antisymmetry: normal_cdf(x) rounds to
  // 1 - k eps there and cannot carry 1e-8 accuracy in x
  for (double x = -8.0; x <= 8.0; x += 0.05) {
    const double lower = -std::abs(x);
    const double back = probit(normal_cdf(lower));
    CHECK(std::abs((x < 0 ? back : -back) - x) < 1e-8);
  }
}

TEST_CASE("normal cdf and pdf")
{
  const boost::math::normal_distribution<double> nd;
  for (double x = -37.0; x < 8.0; x += 0.25) {
    const double ref = boost::math::cdf(nd, x);
    CHECK(std::abs(normal_cdf(x) - ref) <= 1e-13 * ref + 1e-300);
    CHECK(normal_pdf(x) == doctest::Approx(boost::math::pdf(nd, x)).epsilon(1e-13));
  }
}

TEST_CASE("probit rejects the boundary")
{
  CHECK_THROWS_AS(probit(0.0), std::domain_error);
  CHECK_THROWS_AS(probit(1.0), std::domain_error);
  CHECK_THROWS_AS(probit(-0.1), std::domain_error);
  CHECK_THROWS_AS(probit(std::nan("")), std::domain_error);
}
