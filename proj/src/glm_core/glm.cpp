#include "adaptrial/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adaptrial/error.hpp"
#include "adaptrial/normal.hpp"

namespace adaptrial::glm {
namespace {

double xlogx_ratio(double y, double mu) { return y > 0.0 ? y * std::log(y / mu) : 0.0; }

Eigen::VectorXd expit_vec(const Eigen::VectorXd& eta) {
  Eigen::VectorXd mu(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) mu(i) = expit(eta(i));
  return mu;
}

bool is_constant_one(const Eigen::MatrixXd& X) {
  return X.cols() == 1 && (X.col(0).array() == 1.0).all();
}

void check_rank(const Eigen::MatrixXd& X) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-9);
  if (qr.rank() < X.cols()) {
    throw Error(ErrorCode::RankDeficient, "design matrix has rank " + std::to_string(qr.rank()) +
                                              " < " + std::to_string(X.cols()) + " columns");
  }
}

Eigen::VectorXd weighted_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& w, const Eigen::VectorXd& z) {
  const Eigen::VectorXd sw = w.array().sqrt();
  Eigen::MatrixXd Xw = X.array().colwise() * sw.array();
  Eigen::VectorXd zw = z.array() * sw.array();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  qr.setThreshold(1e-12);
  if (qr.rank() < X.cols()) throw Error(ErrorCode::RankDeficient, "weighted design lost rank during IRLS");
  return qr.solve(zw);
}

FittedGlm fit_binomial(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitOptions& opt) {
  FittedGlm out;
  out.family = Family::BinomialLogit;
  out.n_obs = static_cast<std::size_t>(X.rows());

  if (is_constant_one(X)) {
    // Closed form; a degenerate mean of 0 or 1 gives an infinite coefficient.
    const double ybar = y.mean();
    out.coefficients = Eigen::VectorXd::Constant(1, logit(ybar));
    out.converged = true;
    out.deviance = deviance(Family::BinomialLogit, y, Eigen::VectorXd::Constant(y.size(), ybar));
    return out;
  }

  Eigen::VectorXd mu = (y.array() + 0.5) / 2.0;
  Eigen::VectorXd eta = mu.unaryExpr([](double m) { return logit(m); });
  double dev_old = deviance(Family::BinomialLogit, y, mu);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  int polish = 0;
  bool met = false;

  for (int it = 1; it <= opt.max_iter + 3; ++it) {
    if (it > opt.max_iter && !met) break;
    Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).max(1e-300);
    Eigen::VectorXd z = eta.array() + (y - mu).array() / w.array();
    Eigen::VectorXd beta_new = weighted_ls(X, w, z);
    Eigen::VectorXd eta_new = X * beta_new;
    Eigen::VectorXd mu_new = expit_vec(eta_new);
    double dev = deviance(Family::BinomialLogit, y, mu_new);

    if (it > 1) {
      for (int half = 0; half < 20 && !(std::isfinite(dev) && dev <= dev_old + 1e-10 * (std::fabs(dev_old) + 1.0)); ++half) {
        beta_new = 0.5 * (beta_new + beta);
        eta_new = X * beta_new;
        mu_new = expit_vec(eta_new);
        dev = deviance(Family::BinomialLogit, y, mu_new);
      }
    }
    const double step = it > 1 ? (beta_new - beta).cwiseAbs().maxCoeff() : std::numeric_limits<double>::infinity();
    beta = beta_new;
    eta = eta_new;
    mu = mu_new;
    out.iterations = it;

    if (beta.cwiseAbs().maxCoeff() > opt.divergence_bound) {
      throw Error(ErrorCode::CompleteSeparation,
                  "coefficient exceeded " + std::to_string(opt.divergence_bound) + " (separated data)");
    }
    if (met) {
      // Extra Newton steps so the score equations hold to near machine precision.
      if (step < 1e-13 * (1.0 + beta.cwiseAbs().maxCoeff()) || ++polish >= 3) break;
      dev_old = dev;
      continue;
    }
    if (it > 1 && std::fabs(dev - dev_old) / (std::fabs(dev) + 0.1) < opt.tol) {
      if (step > 0.1) {
        throw Error(ErrorCode::CompleteSeparation, "coefficients still drifting at convergence (separated data)");
      }
      met = true;
    }
    dev_old = dev;
  }

  if (!met) {
    const double extreme = (mu.array() * (1.0 - mu.array())).minCoeff();
    if (extreme < 1e-8)
      throw Error(ErrorCode::CompleteSeparation, "fitted probabilities at 0 or 1 after iteration cap");
    throw Error(ErrorCode::NonConvergence,
                "IRLS did not converge in " + std::to_string(opt.max_iter) + " iterations");
  }
  out.coefficients = beta;
  out.converged = true;
  out.deviance = deviance(Family::BinomialLogit, y, mu);
  return out;
}

}  // namespace

double deviance(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double d = 0.0;
  if (family == Family::GaussianIdentity) return (y - mu).squaredNorm();
  for (Eigen::Index i = 0; i < y.size(); ++i)
    d += 2.0 * (xlogx_ratio(y(i), mu(i)) + xlogx_ratio(1.0 - y(i), 1.0 - mu(i)));
  return std::max(d, 0.0);
}

FittedGlm fit_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Family family, const FitOptions& opt) {
  if (X.rows() == 0) throw Error(ErrorCode::InvalidArgument, "cannot fit a model to zero rows");
  if (X.cols() == 0) throw Error(ErrorCode::InvalidArgument, "model has no terms");
  if (y.size() != X.rows()) throw Error(ErrorCode::InvalidArgument, "response length does not match rows");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y(i))) throw Error(ErrorCode::InvalidArgument, "response has a non-finite value");
    if (family == Family::BinomialLogit && (y(i) < 0.0 || y(i) > 1.0))
      throw Error(ErrorCode::InvalidArgument, "binomial response outside [0, 1]");
  }
  if (!X.allFinite()) throw Error(ErrorCode::InvalidArgument, "design matrix has a non-finite value");
  check_rank(X);

  if (family == Family::BinomialLogit) return fit_binomial(X, y, opt);

  FittedGlm out;
  out.family = family;
  out.n_obs = static_cast<std::size_t>(X.rows());
  out.coefficients = weighted_ls(X, Eigen::VectorXd::Ones(X.rows()), y);
  out.converged = true;
  out.iterations = 1;
  out.deviance = deviance(family, y, X * out.coefficients);
  return out;
}

FittedGlm fit(const DesignSpec& design, const Table& rows, const std::vector<double>& response,
              Family family, const FitOptions& opt) {
  if (response.size() != rows.rows())
    throw Error(ErrorCode::InvalidArgument, "response length does not match rows");
  const Eigen::MatrixXd X = model_matrix(design, rows);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(response.data(), static_cast<Eigen::Index>(response.size()));
  FittedGlm out = fit_matrix(X, y, family, opt);
  out.design = design;
  return out;
}

Eigen::VectorXd linear_predictor(const FittedGlm& model, const Table& rows) {
  return model_matrix(model.design, rows) * model.coefficients;
}

std::vector<double> predict_mean(const FittedGlm& model, const Table& rows) {
  // Intercept-only fits may carry an infinite coefficient; avoid 0 * inf.
  const auto n = rows.rows();
  std::vector<double> out(n);
  if (model.design.terms.size() == 1 && model.design.terms[0].is_intercept()) {
    const double b = model.coefficients(0);
    const double m = model.family == Family::BinomialLogit ? expit(b) : b;
    std::fill(out.begin(), out.end(), m);
    return out;
  }
  const Eigen::VectorXd eta = linear_predictor(model, rows);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = eta(static_cast<Eigen::Index>(i));
    out[i] = model.family == Family::BinomialLogit ? expit(e) : e;
  }
  return out;
}

}  // namespace adaptrial::glm
