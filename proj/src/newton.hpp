#pragma once

// Damped Newton ascent shared by the univariate and bivariate local
// likelihood fits.

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace probitcop::detail {

struct NewtonResult
{
  bool converged{ false };
  int iterations{ 0 };
  double scaled_gradient{ std::numeric_limits<double>::infinity() };
};

//! Maximizes a concave objective. `Problem` provides
//!   double value(const Vec&) const               (-inf outside the domain)
//!   void derivatives(const Vec&, Vec& g, Mat& H) const   (H negative definite)
//!   double scaled_gradient(const Vec& g) const
template<class Problem, int N>
NewtonResult
newton_maximize(const Problem& problem,
                Eigen::Matrix<double, N, 1>& a,
                int max_iterations = 100,
                double tolerance = 1e-8)
{
  using Vec = Eigen::Matrix<double, N, 1>;
  using Mat = Eigen::Matrix<double, N, N>;
  NewtonResult res;
  double current = problem.value(a);
  Vec g;
  Mat hess;
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    problem.derivatives(a, g, hess);
    res.scaled_gradient = problem.scaled_gradient(g);
    Eigen::LDLT<Mat> ldlt(-hess);
    if (res.scaled_gradient <= tolerance) {
      // one more full step; convergence is quadratic here
      const Vec polished = a + ldlt.solve(g);
      if (ldlt.info() == Eigen::Success && polished.allFinite() &&
          problem.value(polished) >= current - 1e-12 * std::abs(current))
        a = polished;
      res.converged = true;
      return res;
    }
    Vec step = ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !step.allFinite())
      step = g / std::max(1.0, g.cwiseAbs().maxCoeff());

    // step halving until the objective does not decrease
    double t = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      const Vec trial = a + t * step;
      const double val = problem.value(trial);
      if (std::isfinite(val) && val >= current) {
        const bool stalled = (trial - a).cwiseAbs().maxCoeff() == 0.0;
        a = trial;
        current = val;
        moved = !stalled;
        break;
      }
    }
    if (!moved) {
      problem.derivatives(a, g, hess);
      res.scaled_gradient = problem.scaled_gradient(g);
      res.converged = res.scaled_gradient <= tolerance;
      return res;
    }
  }
  problem.derivatives(a, g, hess);
  res.scaled_gradient = problem.scaled_gradient(g);
  res.converged = res.scaled_gradient <= tolerance;
  return res;
}

} // namespace probitcop::detail
