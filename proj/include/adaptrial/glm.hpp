#pragma once

#include <vector>

#include <Eigen/Dense>

#include "adaptrial/design.hpp"

namespace adaptrial::glm {

enum class Family { BinomialLogit, GaussianIdentity };

struct FittedGlm {
  DesignSpec design;
  Family family = Family::BinomialLogit;
  Eigen::VectorXd coefficients;
  bool converged = false;
  double deviance = 0.0;
  std::size_t n_obs = 0;
  int iterations = 0;
};

struct FitOptions {
  int max_iter = 25;
  double tol = 1e-8;
  double divergence_bound = 30.0;
};

// IRLS for canonical links. Binomial responses may be fractional (quasi-likelihood).
// Throws Error with NonConvergence, CompleteSeparation or RankDeficient.
FittedGlm fit(const DesignSpec& design, const Table& rows, const std::vector<double>& response,
              Family family, const FitOptions& opt = {});

// Same, on an explicit model matrix; coefficients align with its columns.
FittedGlm fit_matrix(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Family family,
                     const FitOptions& opt = {});

Eigen::VectorXd linear_predictor(const FittedGlm& model, const Table& rows);
std::vector<double> predict_mean(const FittedGlm& model, const Table& rows);

double deviance(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu);

}  // namespace adaptrial::glm
