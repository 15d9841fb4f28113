#include "adaptrial/monitoring.hpp"

#include <algorithm>
#include <cmath>

#include "adaptrial/error.hpp"
#include "adaptrial/normal.hpp"

namespace adaptrial::monitoring {
namespace {

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double design_theta(double alpha, double beta) {
  return norm_quantile(1.0 - alpha) + norm_quantile(1.0 - beta);
}

double interim_z(const interim::EffectEstimate& effect) {
  if (!(effect.s2 > 0.0)) throw Error(ErrorCode::ZeroVariance, "interim variance is zero");
  return effect.diff / std::sqrt(effect.s2);
}

double final_variance_unblinded(const interim::InterimSnapshot& snap, double n_planned) {
  double n1 = 0, n0 = 0, s1 = 0, s0 = 0;
  for (std::size_t i = 0; i < snap.patients.size(); ++i) {
    if (!snap.ind[i].cy) continue;
    const auto& p = snap.patients[i];
    (p.arm == 1 ? n1 : n0) += 1;
    (p.arm == 1 ? s1 : s0) += *p.y;
  }
  if (n1 == 0 || n0 == 0)
    throw Error(ErrorCode::EmptyCohort1, std::string("no patients with observed Y in arm ") + (n1 == 0 ? "1" : "0"));
  const double mu1 = s1 / n1, mu0 = s0 / n0, pi = snap.pi_hat;
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n1 + n0));
  for (std::size_t i = 0; i < snap.patients.size(); ++i) {
    if (!snap.ind[i].cy) continue;
    const auto& p = snap.patients[i];
    v.push_back(p.arm == 1 ? (*p.y - mu1) / pi : -(*p.y - mu0) / (1.0 - pi));
  }
  return sample_variance(v) / n_planned;
}

double information_fraction(double interim_s2, double final_var) {
  if (!(interim_s2 > 0.0) || !(final_var > 0.0))
    throw Error(ErrorCode::NonPositiveVariance, "information fraction needs positive variances");
  return std::min(1.0, final_var / interim_s2);
}

double blinded_information_fraction(const interim::InterimSnapshot& snap, double n_planned,
                                    const glm::DesignSpec& h_spec, const glm::DesignSpec& f_spec) {
  double ny = 0, sy = 0;
  for (std::size_t i = 0; i < snap.patients.size(); ++i)
    if (snap.ind[i].cy) {
      ny += 1;
      sy += *snap.patients[i].y;
    }
  if (ny == 0) throw Error(ErrorCode::EmptyCohort1, "no patients with observed Y");
  const double mu = sy / ny;
  double ss = 0;
  for (std::size_t i = 0; i < snap.patients.size(); ++i)
    if (snap.ind[i].cy) ss += (*snap.patients[i].y - mu) * (*snap.patients[i].y - mu);
  if (ss == 0.0) throw Error(ErrorCode::ZeroVariance, "all observed Y are identical");
  const double numerator = ss / ny / n_planned;

  const auto pooled = interim::estimate_arm_mean(snap, -1, h_spec, f_spec);
  double s = 0, nr = 0;
  for (std::size_t i = 0; i < snap.patients.size(); ++i) {
    if (!snap.ind[i].cz) continue;
    const double v = interim::influence_bracket(snap, pooled, i) + pooled.mu - mu;
    s += v * v;
    nr += 1;
  }
  const double denominator = s / nr / nr;
  if (!(denominator > 0.0)) throw Error(ErrorCode::ZeroVariance, "blinded interim variance is zero");
  return numerator / denominator;
}

double conditional_power(double z_t, double t, double theta, double alpha) {
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::InvalidFraction, "conditional power needs 0 < t < 1");
  const double arg = (norm_quantile(1.0 - alpha) - z_t * std::sqrt(t) - theta * (1.0 - t)) / std::sqrt(1.0 - t);
  return norm_sf(arg);
}

double cp_fraction(double t) { return std::min(t, 1.0 - 1e-9); }

FutilityBoundary FutilityBoundary::fixed(double threshold, double alpha, double beta) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "conditional power threshold must lie in [0, 1]");
  FutilityBoundary b;
  b.kind_ = Kind::FixedCpThreshold;
  b.threshold_ = threshold;
  b.alpha_ = alpha;
  b.beta_ = beta;
  return b;
}

FutilityBoundary FutilityBoundary::obrien_fleming(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 0.5) || !(beta > 0.0 && beta < 0.5))
    throw Error(ErrorCode::InvalidArgument, "alpha and beta must lie in (0, 0.5)");
  FutilityBoundary b;
  b.kind_ = Kind::ObrienFlemingBeta;
  b.alpha_ = alpha;
  b.beta_ = beta;
  return b;
}

double FutilityBoundary::beta_spent(double t) const {
  return 2.0 * norm_sf(norm_quantile(1.0 - beta_ / 2.0) / std::sqrt(t));
}

double FutilityBoundary::z_boundary(double t) const {
  return design_theta(alpha_, beta_) * std::sqrt(t) + norm_quantile(beta_spent(t));
}

double FutilityBoundary::threshold_at(double t) const {
  if (kind_ == Kind::FixedCpThreshold) return threshold_;
  const double tc = cp_fraction(t);
  return conditional_power(z_boundary(tc), tc, design_theta(alpha_, beta_), alpha_);
}

Decision futility_decision(double cp, const FutilityBoundary& boundary, double t) {
  return cp < boundary.threshold_at(t) ? Decision::StopFutility : Decision::Continue;
}

MonitoringState monitor(const interim::EffectEstimate& effect, double t, const FutilityBoundary& boundary) {
  MonitoringState m;
  m.t = t;
  m.z = interim_z(effect);
  m.b = m.z * std::sqrt(t);
  m.theta = design_theta(boundary.alpha(), boundary.beta());
  m.cp = conditional_power(m.z, cp_fraction(t), m.theta, boundary.alpha());
  m.decision = futility_decision(m.cp, boundary, t);
  return m;
}

double final_z(const interim::InterimSnapshot& snap) {
  double n1 = 0, n0 = 0, s1 = 0, s0 = 0;
  for (std::size_t i = 0; i < snap.patients.size(); ++i) {
    if (!snap.ind[i].cy) continue;
    const auto& p = snap.patients[i];
    (p.arm == 1 ? n1 : n0) += 1;
    (p.arm == 1 ? s1 : s0) += *p.y;
  }
  if (n1 == 0 || n0 == 0) throw Error(ErrorCode::EmptyCohort1, "final analysis has an empty arm");
  const double p1 = s1 / n1, p0 = s0 / n0;
  const double v = p1 * (1 - p1) / n1 + p0 * (1 - p0) / n0;
  if (!(v > 0.0)) throw Error(ErrorCode::ZeroVariance, "final-analysis variance is zero");
  return (p1 - p0) / std::sqrt(v);
}

}  // namespace adaptrial::monitoring
