#pragma once

#include <span>
#include <vector>

namespace synthreg {

// Monotone map from a sample's scale to normal scores. The i-th of m order
// statistics goes to probit((i - 0.5)/m); tied values share the mean score of
// their block. Between knots the map is linear, and beyond the sample range it
// extends the line through the two outermost knots.
class KdeTransform {
 public:
  // Requires at least three distinct values.
  static KdeTransform build(std::span<const double> values);

  double forward(double x) const;
  double inverse(double z) const;

  const std::vector<double>& knots() const { return values_; }
  const std::vector<double>& scores() const { return scores_; }

 private:
  std::vector<double> values_;  // strictly increasing
  std::vector<double> scores_;  // strictly increasing
};

// Standard normal quantile and CDF.
double probit(double p);
double normal_cdf(double z);

}  // namespace synthreg
