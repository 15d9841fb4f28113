#pragma once

#include "adaptrial/interim.hpp"

namespace adaptrial::monitoring {

enum class Decision { Continue, StopFutility };

struct MonitoringState {
  double t = 0.0;
  double z = 0.0;
  double b = 0.0;
  double cp = 0.0;
  double theta = 0.0;
  Decision decision = Decision::Continue;
};

// Design drift z_{1-alpha} + z_{1-beta}.
double design_theta(double alpha, double beta);

double interim_z(const interim::EffectEstimate& effect);

// (1/n_planned) x sample variance over cohort 1 of
// (A/pi)(Y - mu1) - ((1 - A)/(1 - pi))(Y - mu0), with cohort-1 arm means.
double final_variance_unblinded(const interim::InterimSnapshot& snap, double n_planned);

// final_var / interim_s2 clamped into (0, 1].
double information_fraction(double interim_s2, double final_var);

// Ratio of the blinded end-of-study variance to the blinded interim variance,
// using single pooled working models.
double blinded_information_fraction(const interim::InterimSnapshot& snap, double n_planned,
                                    const glm::DesignSpec& h_spec, const glm::DesignSpec& f_spec);

// 1 - Phi((z_{1-alpha} - Z_t sqrt(t) - theta (1 - t)) / sqrt(1 - t)); requires 0 < t < 1.
double conditional_power(double z_t, double t, double theta, double alpha);

// Clamp used before evaluating conditional power at an estimated fraction.
double cp_fraction(double t);

class FutilityBoundary {
 public:
  enum class Kind { FixedCpThreshold, ObrienFlemingBeta };

  static FutilityBoundary fixed(double threshold, double alpha, double beta = 0.1);
  static FutilityBoundary obrien_fleming(double alpha, double beta);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  // Beta spent by information fraction t: 2 - 2 Phi(z_{1-beta/2} / sqrt(t)).
  double beta_spent(double t) const;
  // Z-scale futility boundary theta sqrt(t) + Phi^{-1}(beta_spent(t)).
  double z_boundary(double t) const;
  // Conditional-power cutoff (design drift) equivalent to z_boundary.
  double threshold_at(double t) const;

 private:
  Kind kind_ = Kind::ObrienFlemingBeta;
  double alpha_ = 0.025, beta_ = 0.1, threshold_ = 0.0;
};

Decision futility_decision(double cp, const FutilityBoundary& boundary, double t);

// Full interim monitoring step for an estimate; cp uses the design drift.
MonitoringState monitor(const interim::EffectEstimate& effect, double t, const FutilityBoundary& boundary);

// Final-analysis Z for complete data: (p1 - p0)/sqrt(p1 q1/n1 + p0 q0/n0).
double final_z(const interim::InterimSnapshot& snap);

}  // namespace adaptrial::monitoring
