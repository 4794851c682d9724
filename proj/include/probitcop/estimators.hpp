#pragma once

#include "probitcop/bandwidth.hpp"
#include "probitcop/copula.hpp"
#include "probitcop/grid.hpp"
#include "probitcop/transforms.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>

namespace probitcop {

//! estimator description as used on the command line and in benchmark
//! configurations:
//!   naive[:h=<h>]                       normal reference H, or h^2 I
//!   amended[:h=<h>]
//!   loclik:p=<1|2>[,bw=knn|fixed][,alpha=<a>|,h=<h>]
//!                                       cross-validated unless alpha / h given
//!   mirror | beta:h=<h> | bernstein:k=<k>
//!   truth                               the true density (simulations only)
struct EstimatorSpec
{
  enum class Kind
  {
    naive,
    amended,
    loclik,
    mirror,
    beta,
    bernstein,
    truth
  };
  Kind kind{ Kind::mirror };
  int degree{ 1 };
  bool knn{ true };
  std::optional<double> h;     // naive, amended, loclik fixed, beta
  std::optional<double> alpha; // loclik knn
  std::size_t k{ 0 };          // bernstein

  //! @throws std::invalid_argument on unknown kinds, keys or values.
  static EstimatorSpec parse(const std::string& spec);
  //! canonical string form, accepted by `parse`.
  std::string str() const;
};

//! an estimator fitted to one sample.
struct FittedEstimator
{
  std::string label;
  std::function<double(double, double)> density;
  //! lattice evaluation; may be faster than pointwise evaluation.
  std::function<DensityGrid(std::size_t, Lattice, unsigned)> grid;
  //! selected smoothing parameters and other facts worth recording.
  nlohmann::json info = nlohmann::json::object();
};

//! fits `spec` to the pseudo-observations. `truth` is required for the
//! "truth" kind. `threads` parallelizes the selection and the evaluation.
FittedEstimator
fit_estimator(const EstimatorSpec& spec,
              const PseudoSample& ps,
              const std::optional<CopulaModel>& truth = std::nullopt,
              unsigned threads = 1);

} // namespace probitcop
