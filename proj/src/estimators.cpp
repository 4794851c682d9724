#include "probitcop/estimators.hpp"
#include "probitcop/competitors.hpp"
#include "probitcop/kde.hpp"
#include "probitcop/local_likelihood.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace probitcop {

namespace {

std::string
trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::map<std::string, std::string>
parse_args(const std::string& args, const std::string& spec)
{
  std::map<std::string, std::string> out;
  std::istringstream in(args);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty())
      continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key=value in '" + spec + "', got '" + item + "'");
    const std::string key = trim(item.substr(0, eq));
    if (!out.emplace(key, trim(item.substr(eq + 1))).second)
      throw std::invalid_argument("duplicate key '" + key + "' in '" + spec + "'");
  }
  return out;
}

double
positive_number(const std::string& text, const std::string& spec)
{
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument("expected a positive number in '" + spec + "', got '" +
                                text + "'");
  return x;
}

std::string
format_double(double x)
{
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

nlohmann::json
matrix_json(const BandwidthMatrix& H)
{
  return { { "h1_sq", H.h1_sq() }, { "h2_sq", H.h2_sq() }, { "h12", H.h12() } };
}

nlohmann::json
selection_json(const SmoothingSelection& sel)
{
  nlohmann::json j;
  j["rotation"] = { { sel.W(0, 0), sel.W(0, 1) }, { sel.W(1, 0), sel.W(1, 1) } };
  j["factor"] = sel.factor;
  if (sel.mode == SmoothingSelection::Mode::fixed) {
    j["h_Q"] = sel.h_q;
    j["h_R"] = sel.h_r;
    j["H_ST"] = matrix_json(*sel.H_st);
  } else {
    j["alpha_Q"] = sel.alpha_q;
    j["alpha_R"] = sel.alpha_r;
    j["kappa"] = sel.kappa;
    j["k"] = sel.k;
  }
  j["warnings"] = sel.warnings;
  return j;
}

struct TrueDensity
{
  CopulaModel model;
  double operator()(double u, double v) const { return model.density(u, v); }
};

template<class Est>
FittedEstimator
pointwise(std::string label, std::shared_ptr<const Est> est, nlohmann::json info)
{
  FittedEstimator out;
  out.label = std::move(label);
  out.density = [est](double u, double v) { return (*est)(u, v); };
  out.grid = [est](std::size_t n, Lattice lattice, unsigned threads) {
    return evaluate_grid([&est](double u, double v) { return (*est)(u, v); }, n, lattice,
                         threads);
  };
  out.info = std::move(info);
  return out;
}

} // namespace

EstimatorSpec
EstimatorSpec::parse(const std::string& spec)
{
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  const std::string kind = trim(s.substr(0, colon));
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);

  EstimatorSpec out;
  if (kind == "mirror" || kind == "beta" || kind == "bernstein") {
    const CompetitorSpec c = CompetitorSpec::parse(s);
    switch (c.kind) {
      case CompetitorSpec::Kind::mirror:
        out.kind = Kind::mirror;
        break;
      case CompetitorSpec::Kind::beta:
        out.kind = Kind::beta;
        out.h = c.h;
        break;
      case CompetitorSpec::Kind::bernstein:
        out.kind = Kind::bernstein;
        out.k = c.k;
        break;
    }
    return out;
  }

  auto args = parse_args(rest, s);
  auto take = [&args](const std::string& key) -> std::optional<std::string> {
    const auto it = args.find(key);
    if (it == args.end())
      return std::nullopt;
    std::string v = it->second;
    args.erase(it);
    return v;
  };

  if (kind == "truth") {
    out.kind = Kind::truth;
  } else if (kind == "naive" || kind == "amended") {
    out.kind = kind == "naive" ? Kind::naive : Kind::amended;
    if (auto h = take("h"))
      out.h = positive_number(*h, s);
  } else if (kind == "loclik") {
    out.kind = Kind::loclik;
    const auto p = take("p");
    if (!p || (*p != "1" && *p != "2"))
      throw std::invalid_argument("loclik requires p=1 or p=2: '" + s + "'");
    out.degree = *p == "1" ? 1 : 2;
    const auto bw = take("bw");
    if (bw && *bw != "knn" && *bw != "fixed")
      throw std::invalid_argument("bw must be knn or fixed: '" + s + "'");
    out.knn = !bw || *bw == "knn";
    if (auto h = take("h")) {
      if (bw && *bw == "knn")
        throw std::invalid_argument("h cannot be combined with bw=knn: '" + s + "'");
      out.knn = false;
      out.h = positive_number(*h, s);
    }
    if (auto a = take("alpha")) {
      if (!out.knn)
        throw std::invalid_argument("alpha requires bw=knn: '" + s + "'");
      const double alpha = positive_number(*a, s);
      if (!(alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0, 1): '" + s + "'");
      out.alpha = alpha;
    }
  } else {
    throw std::invalid_argument("unknown estimator '" + s + "'");
  }
  if (!args.empty())
    throw std::invalid_argument("unknown key '" + args.begin()->first + "' in '" + s + "'");
  return out;
}

std::string
EstimatorSpec::str() const
{
  switch (kind) {
    case Kind::naive:
    case Kind::amended: {
      std::string s = kind == Kind::naive ? "naive" : "amended";
      if (h)
        s += ":h=" + format_double(*h);
      return s;
    }
    case Kind::loclik: {
      std::string s = "loclik:p=" + std::to_string(degree) + ",bw=" + (knn ? "knn" : "fixed");
      if (h)
        s += ",h=" + format_double(*h);
      if (alpha)
        s += ",alpha=" + format_double(*alpha);
      return s;
    }
    case Kind::mirror:
      return "mirror";
    case Kind::beta:
      return "beta:h=" + format_double(*h);
    case Kind::bernstein:
      return "bernstein:k=" + std::to_string(k);
    case Kind::truth:
      return "truth";
  }
  return {};
}

FittedEstimator
fit_estimator(const EstimatorSpec& spec,
              const PseudoSample& ps,
              const std::optional<CopulaModel>& truth,
              unsigned threads)
{
  const std::string label = spec.str();
  switch (spec.kind) {
    case EstimatorSpec::Kind::truth: {
      if (!truth)
        throw std::invalid_argument("the truth estimator needs a copula model");
      auto model = std::make_shared<const TrueDensity>(TrueDensity{ *truth });
      return pointwise(label, model, { { "copula", truth->str() } });
    }
    case EstimatorSpec::Kind::naive:
    case EstimatorSpec::Kind::amended: {
      TransformedSample ts = transform(ps);
      const BandwidthMatrix H =
        spec.h ? BandwidthMatrix::scaled_identity(*spec.h) : normal_reference_H(ts);
      nlohmann::json info = { { "H_ST", matrix_json(H) },
                              { "bandwidth_rule", spec.h ? "fixed" : "normal_reference" } };
      if (spec.kind == EstimatorSpec::Kind::naive)
        return pointwise(label, std::make_shared<const NaiveEstimator>(std::move(ts), H), info);
      auto est = std::make_shared<const AmendedEstimator>(std::move(ts), H, threads);
      info["normalizing_constant"] = est->normalizing_constant();
      return pointwise(label, est, info);
    }
    case EstimatorSpec::Kind::loclik: {
      TransformedSample ts = transform(ps);
      nlohmann::json info;
      std::optional<BandwidthSpec> bw;
      SelectionOptions opt;
      opt.threads = threads;
      if (!spec.knn && spec.h) {
        bw = BandwidthMatrix::scaled_identity(*spec.h);
        info["H_ST"] = matrix_json(std::get<BandwidthMatrix>(*bw));
      } else if (spec.knn && spec.alpha) {
        const PcaDecomposition pca = pca_scores(ts);
        const std::size_t k =
          knn_count(*spec.alpha, knn_fraction_factor(ts.size(), spec.degree), ts.size(),
                    spec.degree);
        bw = KnnBandwidth{ k, 1.0, pca.W };
        info["alpha_Q"] = *spec.alpha;
        info["alpha_R"] = *spec.alpha;
        info["kappa"] = 1.0;
        info["k"] = k;
      } else {
        const SmoothingSelection sel =
          spec.knn ? select_knn(ts, spec.degree, opt) : select_fixed(ts, spec.degree, opt);
        bw = sel.bandwidth();
        info = selection_json(sel);
      }
      info["bandwidth_mode"] = spec.knn ? "knn" : "fixed";
      info["degree"] = spec.degree;
      auto est = std::make_shared<const ImprovedEstimator>(std::move(ts), *bw, spec.degree);
      return pointwise(label, est, info);
    }
    case EstimatorSpec::Kind::mirror: {
      auto est = std::make_shared<const MirrorEstimator>(ps);
      return pointwise(label, est, { { "H", matrix_json(est->bandwidth()) } });
    }
    case EstimatorSpec::Kind::beta: {
      auto est = std::make_shared<const BetaEstimator>(ps, *spec.h);
      FittedEstimator out = pointwise(label, est, { { "h", *spec.h } });
      out.grid = [est](std::size_t n, Lattice lattice, unsigned) { return est->grid(n, lattice); };
      return out;
    }
    case EstimatorSpec::Kind::bernstein: {
      auto est = std::make_shared<const BernsteinEstimator>(ps, spec.k);
      FittedEstimator out = pointwise(label, est, { { "k", spec.k } });
      out.grid = [est](std::size_t n, Lattice lattice, unsigned) { return est->grid(n, lattice); };
      return out;
    }
  }
  throw std::logic_error("fit_estimator: unhandled estimator kind");
}

} // namespace probitcop
