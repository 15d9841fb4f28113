#include "adaptrial/adaptive.hpp"

#include <algorithm>
#include <cmath>

#include "adaptrial/error.hpp"
#include "adaptrial/normal.hpp"

namespace adaptrial::adaptive {

void CombinationPlan::validate() const {
  if (!(w > 0.0 && w < 1.0)) throw Error(ErrorCode::InvalidArgument, "combination weight must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 0.5)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 0.5)");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 1)");
}

std::string to_string(SsrRationale r) {
  switch (r) {
    case SsrRationale::BelowFloor: return "BelowFloor";
    case SsrRationale::Interior: return "Interior";
    case SsrRationale::AtCap: return "AtCap";
    case SsrRationale::NoFurtherRecruitment: return "NoFurtherRecruitment";
  }
  return "?";
}

double second_stage_statistic(double z_final_naive, double z_t, double t_tilde) {
  if (!(t_tilde > 0.0 && t_tilde < 1.0))
    throw Error(ErrorCode::InvalidFraction, "second-stage statistic needs 0 < t < 1");
  return (z_final_naive - std::sqrt(t_tilde) * z_t) / std::sqrt(1.0 - t_tilde);
}

CombinationResult combination_test(double z1, double z2, const CombinationPlan& plan) {
  plan.validate();
  CombinationResult r;
  r.p = norm_sf(std::sqrt(plan.w) * z1 + std::sqrt(1.0 - plan.w) * z2);
  r.reject = r.p < plan.alpha;
  return r;
}

double observed_theta(double z_t, double t) {
  if (!(z_t > 0.0)) throw Error(ErrorCode::NonPositiveTheta, "observed drift is not positive (Z_t <= 0)");
  return z_t / std::sqrt(t);
}

SsrResult reassess_sample_size(double z_t, double t, long n, long n_prime, double theta,
                               const CombinationPlan& plan, long cap, bool allow_decrease) {
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidFraction, "sample size reassessment needs 0 < t < 1");
  if (n <= 0 || n_prime <= 0 || cap <= 0)
    throw Error(ErrorCode::InvalidArgument, "sample sizes must be positive");
  if (!(theta > 0.0)) throw Error(ErrorCode::NonPositiveTheta, "drift must be positive");

  const double k = (norm_quantile(1.0 - plan.alpha) - z_t * std::sqrt(t)) / std::sqrt(1.0 - t) -
                   norm_quantile(plan.beta);
  SsrResult r;
  r.n_second_stage = std::pow(std::max(0.0, k), 2) * static_cast<double>(n) / (theta * theta);
  const double raw = r.n_second_stage + t * static_cast<double>(n);
  double target = std::max(static_cast<double>(n_prime), raw);
  r.rationale = raw <= static_cast<double>(n_prime) ? SsrRationale::NoFurtherRecruitment : SsrRationale::Interior;
  if (!allow_decrease && target < static_cast<double>(n)) {
    target = static_cast<double>(n);
    r.rationale = SsrRationale::BelowFloor;
  }
  const long cap_even = cap - cap % 2;
  if (target > static_cast<double>(cap_even)) {
    r.capped = true;
    r.rationale = SsrRationale::AtCap;
    r.n_new = cap_even;
    return r;
  }
  auto n_new = static_cast<long>(std::ceil(target - 1e-9));
  n_new += n_new % 2;
  r.n_new = std::min(n_new, cap_even);
  return r;
}

}  // namespace adaptrial::adaptive
