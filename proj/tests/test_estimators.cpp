#include "probitcop/competitors.hpp"
#include "probitcop/estimators.hpp"
#include "probitcop/kde.hpp"
#include "probitcop/local_likelihood.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace probitcop;

namespace {

PseudoSample
pseudo(const CopulaModel& m, std::size_t n, std::uint64_t seed)
{
  RawSample raw;
  raw.points = m.sample(n, seed);
  return pseudo_observations(raw);
}

} // namespace

TEST_CASE("estimator spec strings")
{
  auto round_trip = [](const std::string& s) { return EstimatorSpec::parse(s).str(); };
  CHECK(round_trip("naive") == "naive");
  CHECK(round_trip("amended:h=0.3") == "amended:h=0.3");
  CHECK(round_trip("loclik:p=2") == "loclik:p=2,bw=knn");
  CHECK(round_trip("loclik:p=1,bw=fixed") == "loclik:p=1,bw=fixed");
  CHECK(round_trip("loclik:p=1,h=0.3") == "loclik:p=1,bw=fixed,h=0.3");
  CHECK(round_trip("loclik:p=2,alpha=0.5") == "loclik:p=2,bw=knn,alpha=0.5");
  CHECK(round_trip(" mirror ") == "mirror");
  CHECK(round_trip("beta:h=0.05") == "beta:h=0.05");
  CHECK(round_trip("bernstein:k=15") == "bernstein:k=15");
  CHECK(round_trip("truth") == "truth");

  const auto s = EstimatorSpec::parse("loclik:p=2,bw=fixed,h=0.25");
  CHECK(s.kind == EstimatorSpec::Kind::loclik);
  CHECK(s.degree == 2);
  CHECK(!s.knn);
  CHECK(*s.h == 0.25);

  for (const char* bad : { "loclik", "loclik:p=3", "loclik:p=1,bw=knn,h=0.3",
                           "loclik:p=1,bw=fixed,alpha=0.3", "loclik:p=1,alpha=1.5",
                           "loclik:p=1,foo=1", "naive:h=-1", "naive:h", "kde",
                           "loclik:p=1,p=2" })
    CHECK_THROWS_AS(EstimatorSpec::parse(bad), std::invalid_argument);
}

TEST_CASE("fitted estimators agree with the underlying classes")
{
  const auto model = CopulaModel::gaussian(0.4);
  const auto ps = pseudo(model, 150, 2);
  const auto ts = transform(ps);

  const auto naive = fit_estimator(EstimatorSpec::parse("naive"), ps);
  CHECK(naive.density(0.3, 0.6) ==
        doctest::Approx(naive_estimate(ts, normal_reference_H(ts), 0.3, 0.6)));
  CHECK(naive.info["bandwidth_rule"] == "normal_reference");

  const auto fixed = fit_estimator(EstimatorSpec::parse("loclik:p=1,h=0.4"), ps);
  CHECK(fixed.density(0.3, 0.6) ==
        doctest::Approx(improved_estimate(ts, BandwidthMatrix::scaled_identity(0.4), 1, 0.3, 0.6)));

  const auto knn = fit_estimator(EstimatorSpec::parse("loclik:p=2,alpha=0.5"), ps);
  const std::size_t k = knn_count(0.5, knn_fraction_factor(150, 2), 150, 2);
  CHECK(knn.info["k"] == k);
  CHECK(knn.density(0.3, 0.6) ==
        doctest::Approx(
          improved_estimate(ts, KnnBandwidth{ k, 1.0, pca_scores(ts).W }, 2, 0.3, 0.6)));

  const auto sel = fit_estimator(EstimatorSpec::parse("loclik:p=1,bw=fixed"), ps);
  CHECK(sel.info.contains("h_Q"));
  CHECK(sel.info.contains("H_ST"));
  const auto selk = fit_estimator(EstimatorSpec::parse("loclik:p=1"), ps);
  CHECK(selk.info.contains("alpha_Q"));
  CHECK(selk.info.contains("kappa"));

  const auto beta = fit_estimator(EstimatorSpec::parse("beta:h=0.05"), ps);
  const auto g = beta.grid(8, Lattice::rank, 1);
  CHECK(g(2, 5) == doctest::Approx(beta_estimate(ps, 0.05, g.coord(2), g.coord(5))));

  const auto bern = fit_estimator(EstimatorSpec::parse("bernstein:k=10"), ps);
  CHECK(bern.density(0.2, 0.2) == doctest::Approx(bernstein_estimate(ps, 10, 0.2, 0.2)));

  const auto mirror = fit_estimator(EstimatorSpec::parse("mirror"), ps);
  CHECK(mirror.density(0.2, 0.9) == doctest::Approx(mirror_estimate(ps, 0.2, 0.9)));

  const auto truth = fit_estimator(EstimatorSpec::parse("truth"), ps, model);
  CHECK(truth.density(0.1, 0.7) == model.density(0.1, 0.7));
  CHECK_THROWS_AS(fit_estimator(EstimatorSpec::parse("truth"), ps), std::invalid_argument);
}

TEST_CASE("grid evaluation matches pointwise evaluation")
{
  const auto ps = pseudo(CopulaModel::clayton(1.0), 100, 3);
  for (const char* spec : { "naive", "amended", "loclik:p=1,h=0.5", "mirror" }) {
    const auto f = fit_estimator(EstimatorSpec::parse(spec), ps);
    const auto g = f.grid(6, Lattice::rank, 2);
    for (std::size_t i = 0; i < 6; ++i)
      CHECK(g(i, 3) == doctest::Approx(f.density(g.coord(i), g.coord(3))).epsilon(1e-13));
  }
}
