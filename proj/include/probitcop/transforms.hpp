#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace probitcop {

//! a point of the plane; (x, y) on the raw scale, (u, v) on the unit square
//! or (s, t) in the probit domain depending on context.
struct Point
{
  double x;
  double y;
};

//! bivariate observations on their original scale.
struct RawSample
{
  std::vector<Point> points;
  std::size_t size() const { return points.size(); }
};

//! rank-based observations in (0, 1)^2.
struct PseudoSample
{
  std::vector<Point> points;
  std::size_t size() const { return points.size(); }
};

//! probit transform of a pseudo-sample; lives on R^2.
struct TransformedSample
{
  std::vector<Point> points;
  std::size_t size() const { return points.size(); }
};

//! normalized mid-ranks `rank / (n + 1)` of each margin; output order follows
//! the input order.
//! @throws std::invalid_argument on an empty sample or a non-finite value;
//!   the message names the offending row (1-based).
PseudoSample
pseudo_observations(const RawSample& raw);

//! mid-ranks of `x` divided by `x.size() + 1`.
std::vector<double>
normalized_ranks(std::span<const double> x);

TransformedSample
transform(const PseudoSample& ps);

//! empirical copula, proportion of pseudo-observations with u_i <= u and
//! v_i <= v.
double
empirical_copula(const PseudoSample& ps, double u, double v);

//! reads a two-column numeric CSV; a non-numeric first line is treated as
//! a header. Blank lines are skipped.
//! @throws std::runtime_error naming the (1-based) line of any malformed row.
RawSample
read_csv(std::istream& in);
RawSample
read_csv_file(const std::string& path);

void
write_csv(std::ostream& out, std::span<const Point> points,
          const std::string& header = "u,v");

} // namespace probitcop
