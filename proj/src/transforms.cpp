#include "probitcop/transforms.hpp"
#include "probitcop/normal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace probitcop {

std::vector<double>
normalized_ranks(std::span<const double> x)
{
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  std::vector<double> ranks(n);
  const double denom = static_cast<double>(n) + 1.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]])
      ++j;
    // ordinal ranks i+1 .. j share their average
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      ranks[order[k]] = mid / denom;
    i = j;
  }
  return ranks;
}

PseudoSample
pseudo_observations(const RawSample& raw)
{
  const std::size_t n = raw.size();
  if (n == 0)
    throw std::invalid_argument("pseudo_observations: empty sample");
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = raw.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("pseudo_observations: non-finite value in row " +
                                  std::to_string(i + 1));
    }
    xs[i] = p.x;
    ys[i] = p.y;
  }
  const auto ru = normalized_ranks(xs);
  const auto rv = normalized_ranks(ys);
  PseudoSample ps;
  ps.points.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    ps.points[i] = { ru[i], rv[i] };
  return ps;
}

TransformedSample
transform(const PseudoSample& ps)
{
  TransformedSample ts;
  ts.points.reserve(ps.size());
  for (const auto& p : ps.points)
    ts.points.push_back({ probit(p.x), probit(p.y) });
  return ts;
}

double
empirical_copula(const PseudoSample& ps, double u, double v)
{
  if (ps.size() == 0)
    throw std::invalid_argument("empirical_copula: empty sample");
  std::size_t count = 0;
  for (const auto& p : ps.points)
    count += (p.x <= u && p.y <= v);
  return static_cast<double>(count) / static_cast<double>(ps.size());
}

namespace {

std::string
trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

bool
parse_double(const std::string& field, double& out)
{
  if (field.empty())
    return false;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (*begin == '+')
    ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

bool
split_row(const std::string& line, std::string& a, std::string& b)
{
  auto pos = line.find(',');
  if (pos == std::string::npos)
    pos = line.find(';');
  if (pos == std::string::npos)
    pos = line.find('\t');
  if (pos == std::string::npos)
    return false;
  a = trim(std::string_view(line).substr(0, pos));
  b = trim(std::string_view(line).substr(pos + 1));
  return true;
}

} // namespace

RawSample
read_csv(std::istream& in)
{
  RawSample raw;
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty())
      continue;
    std::string a, b;
    double x = 0.0, y = 0.0;
    const bool ok = split_row(line, a, b) && parse_double(a, x) && parse_double(b, y);
    if (!ok) {
      if (first_content) {
        first_content = false;
        continue; // header
      }
      throw std::runtime_error("read_csv: malformed row at line " +
                               std::to_string(lineno) + ": '" + line + "'");
    }
    first_content = false;
    raw.points.push_back({ x, y });
  }
  return raw;
}

RawSample
read_csv_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  return read_csv(in);
}

void
write_csv(std::ostream& out, std::span<const Point> points, const std::string& header)
{
  out << header << '\n' << std::setprecision(17);
  for (const auto& p : points)
    out << p.x << ',' << p.y << '\n';
}

} // namespace probitcop
