#include "adaptrial/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "adaptrial/error.hpp"
#include "adaptrial/normal.hpp"

namespace adaptrial::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json rate_json(const sim::Rate& r) { return {{"value", r.value}, {"mc_se", r.se}}; }

json model_json(const std::optional<interim::ModelFit>& m) {
  if (!m) return nullptr;
  json coefs = json::object();
  const auto names = m->model.design.term_names();
  for (std::size_t j = 0; j < names.size(); ++j) coefs[names[j]] = m->model.coefficients(static_cast<Eigen::Index>(j));
  json j = {{"formula", m->model.design.formula()},
            {"fallback_level", m->fallback_level},
            {"n_obs", m->model.n_obs},
            {"deviance", m->model.deviance},
            {"coefficients", coefs}};
  if (!m->failure.empty()) j["fallback_reason"] = m->failure;
  return j;
}

std::string comment_header(const json& resolved, std::uint64_t seed) {
  return "# seed=" + std::to_string(seed) + "\n# config=" + resolved.dump() + "\n";
}

int threads_from(std::optional<int> flag) {
  if (flag) return std::max(1, *flag);
  if (const char* env = std::getenv("ADAPTRIAL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int exit_for(const Error& e) { return is_estimation_error(e.code()) ? kEstimationError : kInputError; }

struct Common {
  std::string config;
  std::string data;
  std::string out_dir = ".";
  std::optional<long> reps;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> method;
};

json load_with_overrides(const Common& c) {
  json raw = load_config_json(c.config);
  if (c.reps) raw["simulation"]["reps"] = *c.reps;
  if (c.seed) raw["simulation"]["seed"] = *c.seed;
  if (c.method) raw["interim"]["method"] = *c.method;
  return raw;
}

fs::path base_dir_of(const std::string& config) {
  auto p = fs::path(config).parent_path();
  return p.empty() ? fs::path(".") : p;
}

bool over_budget(const sim::OperatingCharacteristics& oc) {
  return static_cast<double>(oc.failures) > 0.001 * static_cast<double>(oc.reps);
}

int cmd_analysis(const Common& c, bool with_ssr, std::ostream& out) {
  const auto data = read_dataset(c.data);
  const auto cfg = resolve_config(load_with_overrides(c), base_dir_of(c.config),
                                  DatasetShape{data.covariate_names, data.has_short_term});
  const auto report = interim_report(data, cfg, with_ssr);
  const std::string text = report.dump(2) + "\n";
  if (c.out_dir != ".") {
    fs::create_directories(c.out_dir);
    write_atomic(fs::path(c.out_dir) / (with_ssr ? "ssr_report.json" : "interim_report.json"), text);
  }
  out << text;
  return kOk;
}

int cmd_simulate(const Common& c, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(load_with_overrides(c), base_dir_of(c.config));
  const auto res = sim::run_monte_carlo(cfg.scenario, cfg.reps, threads_from(c.threads));
  const std::uint64_t seed = cfg.scenario.seed;

  json doc = {{"seed", seed},
              {"reps", cfg.reps},
              {"method", interim::to_string(cfg.scenario.method)},
              {"config", cfg.resolved},
              {"operating_characteristics", characteristics_json(res.oc)}};
  json plot = json::array();
  for (const auto& p : res.plot)
    plot.push_back({{"method", p.method},
                    {"information_fraction", p.level},
                    {"n", p.n},
                    {"stop_probability", rate_json(p.stop)},
                    {"mean_day", p.mean_day},
                    {"mean_pct_recruited", p.mean_pct_recruited}});
  doc["plot_data"] = plot;

  fs::create_directories(c.out_dir);
  const fs::path dir = c.out_dir;
  const std::string hdr = comment_header(cfg.resolved, seed);
  write_atomic(dir / "characteristics.json", doc.dump(2) + "\n");
  write_atomic(dir / "replications.csv", hdr + replications_csv(res.records));
  write_atomic(dir / "plot_data.csv", hdr + plot_csv(res.plot));
  out << summary_table(res.oc, interim::to_string(cfg.scenario.method));
  if (over_budget(res.oc)) {
    err << "error: " << res.oc.failures << " of " << res.oc.reps << " replications failed (budget 0.1%)\n";
    return kFailureBudget;
  }
  return kOk;
}

int cmd_power_tables(const Common& c, std::ostream& out, std::ostream& err) {
  const auto cfg = resolve_config(load_with_overrides(c), base_dir_of(c.config));
  const int threads = threads_from(c.threads);
  const std::uint64_t seed = cfg.scenario.seed;
  json cells = json::array();
  std::ostringstream csv;
  csv << "scale,method,reps,failures,stop_futility,stop_futility_se,reject_one_stage,reject_one_stage_se,"
         "reject_no_ssr,reject_no_ssr_se,reject_ssr,reject_ssr_se,power_loss,power_loss_se,mean_t,"
         "mean_days_to_interim,mean_pct_recruited,mean_ss,sd_ss\n";
  char line[256];
  std::snprintf(line, sizeof line, "%8s %-9s %16s %16s %16s %16s %7s %8s\n", "scale", "method", "stop (se)",
                "reject-1st (se)", "reject-noSSR (se)", "reject-SSR (se)", "mean t", "%recr");
  out << line;
  bool budget = false;
  for (double scale : cfg.sweep_scales) {
    for (auto method : cfg.sweep_methods) {
      auto sc = cfg.scenario;
      sc.y_model.scale = scale;
      sc.method = method;
      sc.plot_fractions.clear();
      const auto res = sim::run_monte_carlo(sc, cfg.reps, threads);
      const auto& oc = res.oc;
      budget = budget || over_budget(oc);
      cells.push_back({{"scale", scale},
                       {"method", interim::to_string(method)},
                       {"operating_characteristics", characteristics_json(oc)}});
      csv << fmt(scale) << ',' << interim::to_string(method) << ',' << oc.reps << ',' << oc.failures << ','
          << fmt(oc.stop_futility.value) << ',' << fmt(oc.stop_futility.se) << ',' << fmt(oc.reject_one_stage.value)
          << ',' << fmt(oc.reject_one_stage.se) << ',' << fmt(oc.reject_no_ssr.value) << ','
          << fmt(oc.reject_no_ssr.se) << ',' << fmt(oc.reject_ssr.value) << ',' << fmt(oc.reject_ssr.se) << ','
          << fmt(oc.power_loss.value) << ',' << fmt(oc.power_loss.se) << ',' << fmt(oc.mean_t) << ','
          << fmt(oc.mean_days_to_interim) << ',' << fmt(oc.mean_pct_recruited) << ',' << fmt(oc.mean_ss) << ','
          << fmt(oc.sd_ss) << '\n';
      auto cell = [](const sim::Rate& r) {
        char b[32];
        std::snprintf(b, sizeof b, "%.4f (%.4f)", r.value, r.se);
        return std::string(b);
      };
      std::snprintf(line, sizeof line, "%8.3g %-9s %16s %16s %16s %16s %7.3f %8.1f\n", scale,
                    interim::to_string(method).c_str(), cell(oc.stop_futility).c_str(),
                    cell(oc.reject_one_stage).c_str(), cell(oc.reject_no_ssr).c_str(), cell(oc.reject_ssr).c_str(),
                    oc.mean_t, oc.mean_pct_recruited);
      out << line;
    }
  }
  fs::create_directories(c.out_dir);
  const fs::path dir = c.out_dir;
  json doc = {{"seed", seed}, {"reps", cfg.reps}, {"config", cfg.resolved}, {"cells", cells}};
  write_atomic(dir / "power_tables.json", doc.dump(2) + "\n");
  write_atomic(dir / "power_tables.csv", comment_header(cfg.resolved, seed) + csv.str());
  if (budget) {
    err << "error: replication failures exceeded the 0.1% budget in at least one cell\n";
    return kFailureBudget;
  }
  return kOk;
}

}  // namespace

json interim_report(const Dataset& data, const ResolvedConfig& cfg, bool with_ssr) {
  const auto& sc = cfg.scenario;
  const auto snap = interim::snapshot_from_observed(data.patients, data.covariate_names, data.has_short_term);
  const auto cohorts = interim::partition_cohorts(snap);
  const auto n_planned = static_cast<double>(sc.n_total());
  const auto est = interim::analyze(snap, sc.method, sc.working);
  const double fv = monitoring::final_variance_unblinded(snap, n_planned);
  const double t = monitoring::information_fraction(est.s2, fv);
  const auto mon = monitoring::monitor(est, t, sc.boundary);
  const double tc = monitoring::cp_fraction(t);

  json rep;
  rep["method"] = interim::to_string(sc.method);
  rep["n_prime"] = snap.n_recruited();
  rep["n_planned"] = sc.n_total();
  rep["cohort_sizes"] = {cohorts[0].size(), cohorts[1].size(), cohorts[2].size()};
  rep["pi_hat"] = snap.pi_hat;
  rep["pi_x_hat"] = snap.pix_hat;
  rep["pi_y_hat"] = snap.piy_hat;
  rep["mu1"] = est.mu1;
  rep["mu0"] = est.mu0;
  rep["diff"] = est.diff;
  rep["s2"] = est.s2;
  rep["final_variance"] = fv;
  rep["t_unblinded"] = t;
  try {
    rep["t_blinded"] = monitoring::blinded_information_fraction(snap, n_planned, cfg.h_pooled, cfg.f_pooled);
  } catch (const Error& e) {
    rep["t_blinded"] = nullptr;
    rep["t_blinded_error"] = std::string(to_string(e.code())) + ": " + e.what();
  }
  rep["Z_t"] = mon.z;
  rep["B_t"] = mon.b;
  rep["theta_design"] = mon.theta;
  rep["cp_design"] = mon.cp;
  rep["cp_observed"] = monitoring::conditional_power(mon.z, tc, mon.z / std::sqrt(tc), sc.alpha);
  rep["futility_threshold"] = sc.boundary.threshold_at(t);
  rep["decision"] = mon.decision == monitoring::Decision::StopFutility ? "stop_futility" : "continue";
  rep["models"] = {{"h1", model_json(est.h1)}, {"h0", model_json(est.h0)}, {"f1", model_json(est.f1)},
                   {"f0", model_json(est.f0)}};

  if (with_ssr || sc.ssr.enabled) {
    adaptive::CombinationPlan plan;
    plan.alpha = sc.alpha;
    plan.beta = sc.beta;
    plan.w = sc.ssr.combination_weight.value_or(tc);
    const double theta = sc.ssr.theta_mode == sim::ThetaMode::Design ? mon.theta : adaptive::observed_theta(mon.z, tc);
    auto cap = static_cast<long>(std::floor(sc.ssr.cap_multiplier * n_planned + 1e-9));
    const auto res = adaptive::reassess_sample_size(mon.z, tc, sc.n_total(), static_cast<long>(snap.n_recruited()),
                                                    theta, plan, cap, sc.ssr.allow_decrease);
    rep["ssr"] = {{"n_new", res.n_new},
                  {"n_new_per_arm", res.n_new / 2},
                  {"n_second_stage", res.n_second_stage},
                  {"capped", res.capped},
                  {"rationale", adaptive::to_string(res.rationale)},
                  {"theta", theta},
                  {"theta_mode", sc.ssr.theta_mode == sim::ThetaMode::Design ? "design" : "observed"},
                  {"combination_weight", plan.w},
                  {"cap", cap - cap % 2}};
  }
  rep["config"] = cfg.resolved;
  return rep;
}

json characteristics_json(const sim::OperatingCharacteristics& oc) {
  auto q = [](const sim::Quantiles& x) { return json::array({x.q[0], x.q[1], x.q[2], x.q[3], x.q[4]}); };
  return {{"reps", oc.reps},
          {"failures", oc.failures},
          {"stop_futility_rate", rate_json(oc.stop_futility)},
          {"reject_rate_one_stage", rate_json(oc.reject_one_stage)},
          {"reject_rate_no_ssr", rate_json(oc.reject_no_ssr)},
          {"reject_rate_ssr", rate_json(oc.reject_ssr)},
          {"power_loss", rate_json(oc.power_loss)},
          {"mean_t", {{"value", oc.mean_t}, {"mc_se", oc.se_t}}},
          {"mean_days_to_interim", {{"value", oc.mean_days_to_interim}, {"mc_se", oc.se_days_to_interim}}},
          {"mean_pct_recruited", {{"value", oc.mean_pct_recruited}, {"mc_se", oc.se_pct_recruited}}},
          {"sample_size_quantiles_no_ssr", q(oc.ss_quantiles_no_ssr)},
          {"sample_size_quantiles_ssr", q(oc.ss_quantiles_ssr)},
          {"mean_ss_no_ssr", oc.mean_ss_no_ssr},
          {"sd_ss_no_ssr", oc.sd_ss_no_ssr},
          {"mean_ss", oc.mean_ss},
          {"sd_ss", oc.sd_ss},
          {"switch_rates",
           {{"rejected_with_ssr_not_without", rate_json(oc.rejected_with_ssr_not_without)},
            {"not_rejected_with_ssr_rejected_without", rate_json(oc.not_rejected_with_ssr_rejected_without)},
            {"n_continued_not_rejected_without", oc.n_continue_not_rejected},
            {"n_rejected_with_ssr_not_without", oc.n_gain},
            {"n_rejected_without", oc.n_rejected_without},
            {"n_not_rejected_with_ssr_rejected_without", oc.n_loss}}}};
}

std::string replications_csv(const std::vector<sim::ReplicationRecord>& records) {
  std::ostringstream os;
  os << "rep,status,day,pct_recruited,n_prime,t,z_t,b_t,cp,stopped,n_new,rationale,z_final_no_ssr,"
        "reject_one_stage,reject_no_ssr,z_final_ssr,t_tilde,z2,p_combined,reject_ssr,ss_no_ssr,ss_ssr,diff,s2\n";
  for (const auto& r : records) {
    os << r.rep << ',' << r.status;
    if (!r.ok) {
      os << std::string(22, ',') << '\n';
      continue;
    }
    os << ',' << fmt(r.day) << ',' << fmt(r.pct_recruited) << ',' << r.n_prime << ',' << fmt(r.t) << ','
       << fmt(r.z_t) << ',' << fmt(r.b_t) << ',' << fmt(r.cp) << ',' << r.stopped << ',' << r.n_new << ','
       << r.rationale << ',' << fmt(r.z_final_no_ssr) << ',' << r.reject_one_stage << ',' << r.reject_no_ssr << ','
       << fmt(r.z_final_ssr) << ',' << fmt(r.t_tilde) << ',' << fmt(r.z2) << ',' << fmt(r.p_combined) << ','
       << r.reject_ssr << ',' << r.ss_no_ssr << ',' << r.ss_ssr << ',' << fmt(r.diff) << ',' << fmt(r.s2) << '\n';
  }
  return os.str();
}

std::string plot_csv(const std::vector<sim::PlotRow>& rows) {
  std::ostringstream os;
  os << "method,information_fraction,n,stop_probability,stop_probability_se,mean_day,mean_pct_recruited\n";
  for (const auto& p : rows)
    os << p.method << ',' << fmt(p.level) << ',' << p.n << ',' << fmt(p.stop.value) << ',' << fmt(p.stop.se) << ','
       << fmt(p.mean_day) << ',' << fmt(p.mean_pct_recruited) << '\n';
  return os.str();
}

std::string summary_table(const sim::OperatingCharacteristics& oc, const std::string& method) {
  std::ostringstream os;
  char line[160];
  auto row = [&](const char* name, double v, double se) {
    std::snprintf(line, sizeof line, "%-44s %12.4f %12.4f\n", name, v, se);
    os << line;
  };
  std::snprintf(line, sizeof line, "%-44s %12s %12s\n", ("method: " + method).c_str(), "value", "MC-SE");
  os << line;
  std::snprintf(line, sizeof line, "%-44s %12ld %12ld\n", "replications / failures", oc.reps, oc.failures);
  os << line;
  row("probability to stop for futility", oc.stop_futility.value, oc.stop_futility.se);
  row("power, one-stage trial", oc.reject_one_stage.value, oc.reject_one_stage.se);
  row("power, interim without SSR", oc.reject_no_ssr.value, oc.reject_no_ssr.se);
  row("power, interim with SSR", oc.reject_ssr.value, oc.reject_ssr.se);
  row("power loss (one-stage minus no SSR)", oc.power_loss.value, oc.power_loss.se);
  row("mean % recruited at interim", oc.mean_pct_recruited, oc.se_pct_recruited);
  const double n = static_cast<double>(std::max(1L, oc.reps - oc.failures));
  row("mean information fraction", oc.mean_t, oc.se_t);
  row("mean days to interim", oc.mean_days_to_interim, oc.se_days_to_interim);
  row("mean sample size, no SSR", oc.mean_ss_no_ssr, oc.sd_ss_no_ssr / std::sqrt(n));
  row("mean sample size, SSR", oc.mean_ss, oc.sd_ss / std::sqrt(n));
  row("rejected with SSR, not without", oc.rejected_with_ssr_not_without.value, oc.rejected_with_ssr_not_without.se);
  row("not rejected with SSR, rejected without", oc.not_rejected_with_ssr_rejected_without.value,
      oc.not_rejected_with_ssr_rejected_without.se);
  std::snprintf(line, sizeof line, "%-44s %6.0f %6.0f %6.0f %6.0f %6.0f\n", "sample size Q0..Q4, SSR",
                oc.ss_quantiles_ssr.q[0], oc.ss_quantiles_ssr.q[1], oc.ss_quantiles_ssr.q[2], oc.ss_quantiles_ssr.q[3],
                oc.ss_quantiles_ssr.q[4]);
  os << line;
  return os.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
    if (!o) throw Error(ErrorCode::InvalidArgument, "cannot write '" + tmp.string() + "'");
    o << content;
    if (!o) throw Error(ErrorCode::InvalidArgument, "write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariate-adjusted interim analysis and adaptive trial simulation", "adaptrial"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool needs_data) {
    sub->add_option("--config", c.config, "Scenario or analysis config (TOML or JSON)")->required();
    if (needs_data) sub->add_option("--data", c.data, "Patient-level CSV dataset")->required();
    sub->add_option("--out", c.out_dir, "Output directory");
    sub->add_option("--reps", c.reps, "Monte Carlo replications (overrides config)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "Master seed (overrides config)");
    sub->add_option("--threads", c.threads, "Worker threads (fallback: ADAPTRIAL_THREADS)")->check(CLI::PositiveNumber);
    sub->add_option("--method", c.method, "Interim estimator")
        ->check(CLI::IsMember({"proposal", "standard", "x-only"}));
  };
  auto* interim_cmd = app.add_subcommand("interim", "Interim analysis of a dataset");
  auto* ssr_cmd = app.add_subcommand("ssr", "Interim analysis plus sample size reassessment");
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
  auto* pt_cmd = app.add_subcommand("power-tables", "Operating characteristics over a scale/method sweep");
  add_common(interim_cmd, true);
  add_common(ssr_cmd, true);
  add_common(sim_cmd, false);
  add_common(pt_cmd, false);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (interim_cmd->parsed()) return cmd_analysis(c, false, out);
    if (ssr_cmd->parsed()) return cmd_analysis(c, true, out);
    if (sim_cmd->parsed()) return cmd_simulate(c, out, err);
    if (pt_cmd->parsed()) return cmd_power_tables(c, out, err);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace adaptrial::cli
