#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adaptrial/adaptive.hpp"
#include "adaptrial/interim.hpp"
#include "adaptrial/monitoring.hpp"
#include "adaptrial/rng.hpp"

namespace adaptrial::sim {

inline constexpr double kDaysPerMonth = 30.4375;

struct CovariateSpec {
  enum class Kind { Normal, Bernoulli, Categorical };
  std::string name;
  Kind kind = Kind::Normal;
  double mean = 0.0, sd = 1.0;  // Normal
  double p = 0.5;               // Bernoulli
  std::vector<double> probs;    // Categorical; encoded as name_1 .. name_{k-1}
};

struct CovariateSource {
  // Bootstrap table (covariate columns only). Empty when parametric.
  Table table;
  std::vector<CovariateSpec> parametric;

  bool bootstrap() const { return table.rows() > 0; }
  std::vector<std::string> names() const;
};

// Logistic outcome model: term -> coefficient, with the coefficients of
// scaled_terms multiplied by scale. "intercept" names the constant.
struct OutcomeModel {
  std::map<std::string, double> coefficients;
  double scale = 1.0;
  std::vector<std::string> scaled_terms;
};

enum class TriggerKind { InformationFraction, CalendarDay, RecruitedFraction };
enum class ThetaMode { Design, Observed };

struct Trigger {
  TriggerKind kind = TriggerKind::InformationFraction;
  double value = 0.5;
};

struct SsrConfig {
  bool enabled = false;
  double cap_multiplier = 2.0;
  bool allow_decrease = false;
  ThetaMode theta_mode = ThetaMode::Design;
  std::optional<double> combination_weight;
};

struct ScenarioConfig {
  long n_per_arm = 0;
  double alpha = 0.025, beta = 0.1;
  double rate_per_month = 8.0;
  interim::Lags lags;
  CovariateSource covariates;
  std::optional<OutcomeModel> x_model;
  OutcomeModel y_model;
  interim::WorkingModels working;
  interim::Method method = interim::Method::Proposal;
  Trigger trigger;
  monitoring::FutilityBoundary boundary = monitoring::FutilityBoundary::obrien_fleming(0.025, 0.1);
  SsrConfig ssr;
  std::uint64_t seed = 1;
  std::vector<double> plot_fractions;

  long n_total() const { return 2 * n_per_arm; }
  long n_max() const;
  bool has_short_term() const { return x_model.has_value(); }
  // Throws Error(BadConfig).
  void validate() const;
};

struct Trial {
  std::vector<std::string> covariate_names;
  std::vector<interim::PatientRecord> patients;
  bool has_short_term = true;
};

// Evaluates an OutcomeModel on a patient; columns are the covariates plus "a" and "x".
class CompiledModel {
 public:
  CompiledModel(const OutcomeModel& m, const std::vector<std::string>& covariate_names);
  double linear_predictor(const std::vector<double>& z, int arm, int x) const;

 private:
  struct Piece {
    std::vector<std::pair<int, bool>> factors;  // variable index, absolute value
    double coef;
  };
  double intercept_ = 0.0;
  std::vector<Piece> pieces_;
  std::size_t n_cov_ = 0;
};

Trial generate_trial(const ScenarioConfig& cfg, const Stream& stream, long n_patients);

// Snapshot of the first n patients at a calendar day.
interim::InterimSnapshot snapshot_of(const Trial& trial, long n, double day, const interim::Lags& lags);
// Snapshot of the first n patients with follow-up complete.
interim::InterimSnapshot complete_snapshot(const Trial& trial, long n);

struct Look {
  double day = 0.0;
  bool ok = false;
  std::string error;
  interim::EffectEstimate estimate;
  double t = 0.0;
  long n_recruited = 0;
};

// Evaluates the estimate and unblinded information fraction at a day for the planned trial.
Look evaluate_look(const ScenarioConfig& cfg, const Trial& trial, interim::Method method, double day);

// Earliest integer day whose fraction reaches each level (ascending). Scans on a
// 16-day grid, then bisects the last window. Unreached levels give std::nullopt.
std::vector<std::optional<Look>> scan_information(const ScenarioConfig& cfg, const Trial& trial,
                                                  interim::Method method, const std::vector<double>& levels);

struct PlotPoint {
  int method = 0;  // index into plot_methods()
  double level = 0.0;
  bool ok = false;
  bool stopped = false;
  double day = 0.0;
  double pct_recruited = 0.0;
};

struct ReplicationRecord {
  long rep = 0;
  bool ok = false;
  std::string status = "ok";
  double day = 0.0, pct_recruited = 0.0;
  long n_prime = 0;
  double t = 0.0, z_t = 0.0, b_t = 0.0, cp = 0.0;
  bool stopped = false;
  long n_new = 0;
  std::string rationale;
  double z_final_no_ssr = 0.0;
  bool reject_one_stage = false, reject_no_ssr = false;
  double z_final_ssr = 0.0, t_tilde = 0.0, z2 = 0.0, p_combined = 1.0;
  bool reject_ssr = false;
  long ss_no_ssr = 0, ss_ssr = 0;
  double diff = 0.0, s2 = 0.0;
  std::vector<PlotPoint> plot;
};

std::vector<interim::Method> plot_methods(const ScenarioConfig& cfg);

ReplicationRecord run_replication(const ScenarioConfig& cfg, long rep);

struct Rate {
  double value = 0.0, se = 0.0;
};

struct Quantiles {
  double q[5] = {0, 0, 0, 0, 0};
};

struct OperatingCharacteristics {
  long reps = 0, failures = 0;
  Rate stop_futility;
  Rate reject_one_stage, reject_no_ssr, reject_ssr;
  Rate power_loss;  // paired: one-stage minus no-SSR
  double mean_t = 0.0, mean_days_to_interim = 0.0, mean_pct_recruited = 0.0;
  double se_t = 0.0, se_days_to_interim = 0.0, se_pct_recruited = 0.0;
  Quantiles ss_quantiles_no_ssr, ss_quantiles_ssr;
  double mean_ss_no_ssr = 0.0, sd_ss_no_ssr = 0.0, mean_ss = 0.0, sd_ss = 0.0;
  // P(reject with SSR | continued, not rejected without) and P(not rejected with SSR | rejected without).
  Rate rejected_with_ssr_not_without, not_rejected_with_ssr_rejected_without;
  long n_continue_not_rejected = 0, n_gain = 0, n_rejected_without = 0, n_loss = 0;
};

struct PlotRow {
  std::string method;
  double level = 0.0;
  long n = 0;
  Rate stop;
  double mean_day = 0.0, mean_pct_recruited = 0.0;
};

struct MonteCarloResult {
  std::vector<ReplicationRecord> records;
  OperatingCharacteristics oc;
  std::vector<PlotRow> plot;
};

OperatingCharacteristics summarize(const std::vector<ReplicationRecord>& records);

// Replications run on `threads` workers; the result does not depend on the thread count.
MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg, long reps, int threads);

struct RSquared {
  double r2_total = 0.0, r2_x = 0.0, r2_z = 0.0, cross = 0.0;
};

enum class ProjectionKind { LeastSquares, Logistic };

// rows must hold "y" and, when full_spec uses it, "x". z_only_spec (response
// ignored) projects X on the covariates.
RSquared compute_r_squared(const Table& rows, const glm::DesignSpec& full_spec, const glm::DesignSpec& z_only_spec,
                           ProjectionKind projection = ProjectionKind::LeastSquares);

}  // namespace adaptrial::sim
