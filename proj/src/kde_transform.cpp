#include "synthreg/kde_transform.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "synthreg/register.hpp"

namespace synthreg {

namespace {

// Piecewise-linear interpolation through (xs, ys), xs strictly increasing,
// with linear extrapolation from the outermost segments.
double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const std::size_t n = xs.size();
  std::size_t hi;
  if (x <= xs.front()) {
    hi = 1;
  } else if (x >= xs.back()) {
    hi = n - 1;
  } else {
    hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  }
  const std::size_t lo = hi - 1;
  const double slope = (ys[hi] - ys[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + slope * (x - xs[lo]);
}

}  // namespace

double probit(double p) { return boost::math::quantile(boost::math::normal(), p); }

double normal_cdf(double z) { return boost::math::cdf(boost::math::normal(), z); }

KdeTransform KdeTransform::build(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  if (std::ranges::any_of(sorted, [](double v) { return !std::isfinite(v); }))
    throw DataError("transform sample contains non-finite values");
  std::ranges::sort(sorted);
  const auto m = static_cast<double>(sorted.size());

  KdeTransform t;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    double score_sum = 0.0;
    while (j < sorted.size() && sorted[j] == sorted[i]) {
      score_sum += probit((static_cast<double>(j) + 0.5) / m);
      ++j;
    }
    t.values_.push_back(sorted[i]);
    t.scores_.push_back(score_sum / static_cast<double>(j - i));
    i = j;
  }
  if (t.values_.size() < 3) throw DataError("transform needs at least 3 distinct values");
  return t;
}

double KdeTransform::forward(double x) const { return interpolate(values_, scores_, x); }

double KdeTransform::inverse(double z) const { return interpolate(scores_, values_, z); }

}  // namespace synthreg
