#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "adaptrial/glm.hpp"
#include "adaptrial/table.hpp"

namespace adaptrial::interim {

struct PatientRecord {
  std::string id;
  int arm = 0;
  std::vector<double> z;  // aligned with the owning snapshot's covariate names
  std::optional<int> x;
  std::optional<int> y;
  double arrival = 0.0;
};

struct Lags {
  double x = 121.75;
  double y = 456.6;
};

struct Indicators {
  bool cz = false, cx = false, cy = false;
};

struct InterimSnapshot {
  double calendar_time = 0.0;
  Lags lags;
  std::vector<std::string> covariate_names;
  std::vector<PatientRecord> patients;
  std::vector<Indicators> ind;
  // False when the trial has no short-term endpoint; C^X then mirrors C^Y.
  bool has_short_term = true;
  double pi_hat = 0.0, pix_hat = 0.0, piy_hat = 0.0;

  std::size_t n_recruited() const;
};

// Indicators from arrival times and lags as seen at calendar_time.
InterimSnapshot snapshot_at_day(std::vector<PatientRecord> patients, std::vector<std::string> covariate_names,
                                double calendar_time, Lags lags, bool has_short_term = true);
// Indicators from which outcomes are present; every row counts as recruited.
// Throws InconsistentIndicators when Y is present without X.
InterimSnapshot snapshot_from_observed(std::vector<PatientRecord> patients,
                                       std::vector<std::string> covariate_names, bool has_short_term = true);

// Recomputes pi_hat, pix_hat and piy_hat from the indicators.
void update_proportions(InterimSnapshot& snap);

// Index lists for cohorts 1..4 (element 0 is cohort 1).
std::array<std::vector<std::size_t>, 4> partition_cohorts(const InterimSnapshot& snap);

struct WorkingModels {
  glm::DesignSpec h1, h0, f1, f0;

  static WorkingModels shared(const glm::DesignSpec& h, const glm::DesignSpec& f) { return {h, h, f, f}; }
};

// A working-model fit together with the rung of the fallback ladder it came from
// (0 = as specified).
struct ModelFit {
  glm::FittedGlm model;
  int fallback_level = 0;
  std::string failure;  // last error that pushed the ladder down, if any
};

struct ArmEstimate {
  double mu = 0.0;
  // Indexed like snapshot.patients; NaN where undefined.
  std::vector<double> yhat, yhat2;
  std::optional<ModelFit> h, f;
};

struct EffectEstimate {
  double mu1 = 0.0, mu0 = 0.0, diff = 0.0, s2 = 0.0;
  std::vector<double> influence;          // one per recruited patient
  std::vector<std::size_t> recruited;     // snapshot indices matching influence
  std::size_t n_prime = 0;
  std::optional<ModelFit> h1, h0, f1, f0;
};

// Fits with the fallback ladder: drop interactions, then remaining terms from the
// end, then intercept-only. Rows < terms + 5 counts as a failure.
ModelFit fit_with_fallback(const glm::DesignSpec& spec, const Table& rows, const std::vector<double>& response);

// Covariates plus "x" (NaN when unobserved) for the given snapshot rows.
Table covariate_table(const InterimSnapshot& snap, const std::vector<std::size_t>& rows);

// Steps 1-4 for one arm. arm < 0 pools both arms (used by the blinded fraction).
ArmEstimate estimate_arm_mean(const InterimSnapshot& snap, int arm, const glm::DesignSpec& h_spec,
                              const glm::DesignSpec& f_spec);

// The per-patient bracket of the influence expression for one arm estimate,
// C^Y C^X/(pY pX)(Y - Yhat) + C^X/pX (Yhat - Yhat') + Yhat' - mu.
double influence_bracket(const InterimSnapshot& snap, const ArmEstimate& est, std::size_t i);

EffectEstimate estimate_effect(const InterimSnapshot& snap, const WorkingModels& specs);

// Complete-case comparison of proportions over cohort 1 with the usual
// p1(1-p1)/n1 + p0(1-p0)/n0 variance.
EffectEstimate complete_case_effect(const InterimSnapshot& snap);

enum class Method { Proposal, Standard, XOnly };

Method parse_method(const std::string& s);
std::string to_string(Method m);

// Dispatches on the method; XOnly uses h = y ~ x and f = y ~ 1.
EffectEstimate analyze(const InterimSnapshot& snap, Method method, const WorkingModels& specs);

}  // namespace adaptrial::interim
