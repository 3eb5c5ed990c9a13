#include "synthreg/logit.hpp"

#include <cmath>

#include "least_squares.hpp"

namespace synthreg {

namespace {

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    // log(1 + exp(eta)) without overflow
    const double e = eta(i);
    const double softplus = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    ll += y(i) * e - softplus;
  }
  return ll;
}

double sigmoid(double e) {
  if (e >= 0.0) return 1.0 / (1.0 + std::exp(-e));
  const double z = std::exp(e);
  return z / (1.0 + z);
}

}  // namespace

LogitFit fit_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names,
                   const LogitOptions& options) {
  const auto n = x.rows();
  const auto p = x.cols();
  if (n == 0 || p == 0) throw NumericalError("fit_logit: empty design");
  {
    const auto collinear = detail::collinear_columns_tall(x, names);
    if (!collinear.empty()) {
      throw NumericalError("propensity design is singular (collinear: " + detail::join(collinear) + ")");
    }
  }

  LogitFit fit;
  fit.coef = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  double ll = log_likelihood(eta, y);
  Eigen::MatrixXd info(p, p);
  std::vector<double> norms;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    fit.iterations = iter;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = sigmoid(eta(i));
      w(i) = std::max(mu(i) * (1.0 - mu(i)), 1e-300);
    }
    const Eigen::VectorXd score = x.transpose() * (y - mu);
    const Eigen::MatrixXd xw = x.array().colwise() * w.array().sqrt();
    info.setZero();
    info.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
    info = info.selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd step = info.ldlt().solve(score);

    // Step halving guards against overshooting.
    double scale = 1.0;
    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_eta;
    double candidate_ll = 0.0;
    for (int h = 0; h < 30; ++h) {
      candidate = fit.coef + scale * step;
      candidate_eta = x * candidate;
      candidate_ll = log_likelihood(candidate_eta, y);
      if (candidate_ll >= ll - 1e-12 * std::abs(ll)) break;
      scale *= 0.5;
    }
    const double change = std::abs(candidate_ll - ll) / (std::abs(ll) + 1e-300);
    fit.coef = candidate;
    eta = candidate_eta;
    ll = candidate_ll;
    norms.push_back(fit.coef.lpNorm<Eigen::Infinity>());
    if (change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.log_likelihood = ll;
  fit.fitted.resize(n);
  bool clamped = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = sigmoid(eta(i));
    if (v < options.clamp || v > 1.0 - options.clamp) clamped = true;
    fit.fitted(i) = std::clamp(v, options.clamp, 1.0 - options.clamp);
  }
  bool diverging = false;
  if (!fit.converged && norms.size() >= 10) {
    diverging = true;
    for (std::size_t k = norms.size() - 9; k < norms.size(); ++k) diverging &= norms[k] > norms[k - 1];
  }
  fit.separated = clamped || diverging;

  {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = fit.fitted(i) * (1.0 - fit.fitted(i));
    const Eigen::MatrixXd xw = x.array().colwise() * w.array().sqrt();
    info.setZero();
    info.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
    info = info.selfadjointView<Eigen::Lower>();
    const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    fit.std_error = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  }
  return fit;
}

}  // namespace synthreg
