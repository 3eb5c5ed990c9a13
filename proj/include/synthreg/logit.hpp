#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace synthreg {

struct LogitOptions {
  int max_iterations = 100;
  double tolerance = 1e-10;  // relative log-likelihood change
  double clamp = 1e-12;
};

struct LogitFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd std_error;
  Eigen::VectorXd fitted;  // probabilities, clamped to [clamp, 1 - clamp]
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  // Coefficients diverge or fitted probabilities reach the clamp band.
  bool separated = false;
};

// Maximum-likelihood logistic regression by iteratively reweighted least
// squares with step halving. Throws NumericalError naming collinear columns
// when the design is singular.
LogitFit fit_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                   const LogitOptions& options = {});

}  // namespace synthreg
