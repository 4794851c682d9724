#pragma once

namespace probitcop {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934381868;

//! standard normal density.
double normal_pdf(double x);

//! standard normal cdf, accurate in relative terms in the lower tail.
double normal_cdf(double x);

//! standard normal quantile (the probit function).
//!
//! the AS241 rational approximation followed by one Halley step
//! against `normal_cdf`; absolute error stays below 1e-9 on
//! [1e-300, 1 - 1e-16] and the result is exactly antisymmetric,
//! `probit(1 - u) == -probit(u)` whenever `1 - u` is representable.
//! @throws std::domain_error unless 0 < u < 1.
double probit(double u);

} // namespace probitcop
