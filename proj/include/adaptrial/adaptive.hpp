#pragma once

#include <string>

namespace adaptrial::adaptive {

struct CombinationPlan {
  double w = 0.5;
  double alpha = 0.025;
  double beta = 0.1;

  void validate() const;
};

struct CombinationResult {
  double p = 1.0;
  bool reject = false;
};

enum class SsrRationale { BelowFloor, Interior, AtCap, NoFurtherRecruitment };
std::string to_string(SsrRationale r);

struct SsrResult {
  long n_new = 0;               // total over both arms, even
  double n_second_stage = 0.0;  // before floors, caps and rounding
  bool capped = false;
  SsrRationale rationale = SsrRationale::Interior;
};

// (z_final_naive - sqrt(t_tilde) z_t) / sqrt(1 - t_tilde).
double second_stage_statistic(double z_final_naive, double z_t, double t_tilde);

// p = 1 - Phi(sqrt(w) z1 + sqrt(1 - w) z2); reject iff p < alpha.
CombinationResult combination_test(double z1, double z2, const CombinationPlan& plan);

// Drift estimated from the interim statistic, z_t / sqrt(t). Throws NonPositiveTheta for z_t <= 0.
double observed_theta(double z_t, double t);

// Conditional-power based reassessment. n, n_prime and cap count patients over both arms.
SsrResult reassess_sample_size(double z_t, double t, long n, long n_prime, double theta,
                               const CombinationPlan& plan, long cap, bool allow_decrease);

}  // namespace adaptrial::adaptive
