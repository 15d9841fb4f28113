#include "adaptrial/trial_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <thread>

#include "adaptrial/error.hpp"
#include "adaptrial/normal.hpp"

namespace adaptrial::sim {
namespace {

constexpr long kCoarseStep = 16;

bool is_intercept_key(const std::string& k) { return k == "intercept" || k == "(Intercept)" || k == "1"; }

long cap_total(const ScenarioConfig& cfg) {
  auto cap = static_cast<long>(std::floor(cfg.ssr.cap_multiplier * static_cast<double>(cfg.n_total()) + 1e-9));
  cap -= cap % 2;
  return std::max(cap, cfg.n_total());
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double var_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

Rate rate_of(long hits, long n) {
  Rate r;
  if (n <= 0) return r;
  r.value = static_cast<double>(hits) / static_cast<double>(n);
  r.se = std::sqrt(r.value * (1.0 - r.value) / static_cast<double>(n));
  return r;
}

// Type-7 sample quantiles.
Quantiles quantiles_of(std::vector<double> v) {
  Quantiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  for (int k = 0; k < 5; ++k) {
    const double h = (static_cast<double>(v.size()) - 1.0) * k / 4.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    q.q[k] = v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  }
  return q;
}

}  // namespace

std::vector<std::string> CovariateSource::names() const {
  if (bootstrap()) return table.names();
  std::vector<std::string> out;
  for (const auto& s : parametric) {
    if (s.kind == CovariateSpec::Kind::Categorical) {
      for (std::size_t l = 1; l < s.probs.size(); ++l) out.push_back(s.name + "_" + std::to_string(l));
    } else {
      out.push_back(s.name);
    }
  }
  return out;
}

long ScenarioConfig::n_max() const { return ssr.enabled ? cap_total(*this) : n_total(); }

CompiledModel::CompiledModel(const OutcomeModel& m, const std::vector<std::string>& covariate_names)
    : n_cov_(covariate_names.size()) {
  std::map<std::string, std::string> scaled;  // canonical key -> name as written
  for (const auto& s : m.scaled_terms) {
    if (is_intercept_key(s)) scaled.emplace("intercept", s);
    else scaled.emplace(glm::Term::parse(s).key(), s);
  }
  std::set<std::string> known;
  for (const auto& [key, coef] : m.coefficients) {
    if (is_intercept_key(key)) {
      intercept_ += coef * (scaled.count("intercept") ? m.scale : 1.0);
      known.insert("intercept");
      continue;
    }
    const auto term = glm::Term::parse(key);
    Piece piece;
    piece.coef = coef * (scaled.count(term.key()) ? m.scale : 1.0);
    for (const auto& f : term.factors) {
      int idx = -1;
      if (f.column == "a") idx = static_cast<int>(n_cov_);
      else if (f.column == "x") idx = static_cast<int>(n_cov_) + 1;
      else {
        auto it = std::find(covariate_names.begin(), covariate_names.end(), f.column);
        if (it == covariate_names.end())
          throw Error(ErrorCode::BadConfig, "outcome model term '" + key + "' uses unknown column '" + f.column + "'");
        idx = static_cast<int>(it - covariate_names.begin());
      }
      piece.factors.emplace_back(idx, f.absolute);
    }
    known.insert(term.key());
    pieces_.push_back(std::move(piece));
  }
  for (const auto& [key, name] : scaled)
    if (!known.count(key)) throw Error(ErrorCode::BadConfig, "scaled term '" + name + "' has no coefficient");
}

double CompiledModel::linear_predictor(const std::vector<double>& z, int arm, int x) const {
  double eta = intercept_;
  for (const auto& p : pieces_) {
    double v = p.coef;
    for (const auto& [idx, absolute] : p.factors) {
      double u;
      if (static_cast<std::size_t>(idx) < n_cov_) u = z[static_cast<std::size_t>(idx)];
      else if (static_cast<std::size_t>(idx) == n_cov_) u = arm;
      else u = x;
      v *= absolute ? std::fabs(u) : u;
    }
    eta += v;
  }
  return eta;
}

void ScenarioConfig::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::BadConfig, m); };
  if (n_per_arm <= 0) bad("design.n_per_arm must be positive");
  if (!(alpha > 0.0 && alpha < 0.5)) bad("design.alpha must lie in (0, 0.5)");
  if (!(beta > 0.0 && beta < 0.5)) bad("design.beta must lie in (0, 0.5)");
  if (!(rate_per_month > 0.0)) bad("recruitment.rate_per_month must be positive");
  if (!(lags.x >= 0.0 && lags.x < lags.y)) bad("recruitment lags must satisfy 0 <= lag_x_days < lag_y_days");
  if (!(ssr.cap_multiplier >= 1.0)) bad("ssr.cap_multiplier must be at least 1");
  if (ssr.combination_weight && !(*ssr.combination_weight > 0.0 && *ssr.combination_weight < 1.0))
    bad("ssr.combination_weight must lie in (0, 1)");
  if (trigger.kind == TriggerKind::InformationFraction && !(trigger.value > 0.0 && trigger.value < 1.0))
    bad("interim.target must lie in (0, 1) for an information-fraction trigger");
  if (trigger.kind == TriggerKind::RecruitedFraction && !(trigger.value > 0.0 && trigger.value <= 1.0))
    bad("interim.target must lie in (0, 1] for a recruited-fraction trigger");
  if (trigger.kind == TriggerKind::CalendarDay && !(trigger.value > 0.0)) bad("interim.target day must be positive");
  for (double f : plot_fractions)
    if (!(f > 0.0 && f < 1.0)) bad("output.plot_fractions must lie in (0, 1)");
  const auto names = covariates.names();
  if (names.empty()) bad("no covariates configured");
  for (const auto& s : covariates.parametric) {
    if (s.kind == CovariateSpec::Kind::Normal && !(s.sd >= 0.0)) bad("covariate '" + s.name + "' needs sd >= 0");
    if (s.kind == CovariateSpec::Kind::Bernoulli && !(s.p >= 0.0 && s.p <= 1.0))
      bad("covariate '" + s.name + "' needs p in [0, 1]");
    if (s.kind == CovariateSpec::Kind::Categorical) {
      double tot = 0;
      for (double p : s.probs) {
        if (!(p >= 0.0)) bad("covariate '" + s.name + "' has a negative probability");
        tot += p;
      }
      if (s.probs.size() < 2 || std::fabs(tot - 1.0) > 1e-9) bad("covariate '" + s.name + "' probabilities must sum to 1");
    }
  }
  if (x_model) {
    for (const auto& [k, c] : x_model->coefficients)
      if (!is_intercept_key(k))
        for (const auto& f : glm::Term::parse(k).factors)
          if (f.column == "x") bad("x_model must not depend on x");
    CompiledModel(*x_model, names);
  } else {
    for (const auto& [k, c] : y_model.coefficients)
      if (!is_intercept_key(k))
        for (const auto& f : glm::Term::parse(k).factors)
          if (f.column == "x") bad("y_model uses x but no x_model is configured");
  }
  CompiledModel(y_model, names);
  for (const auto* spec : {&working.h1, &working.h0, &working.f1, &working.f0}) {
    for (const auto& c : spec->columns()) {
      if (c == "x" && !x_model) bad("working model '" + spec->formula() + "' uses x but the trial has no short-term endpoint");
      if (c != "x" && c != "a" && std::find(names.begin(), names.end(), c) == names.end())
        bad("working model '" + spec->formula() + "' uses unknown column '" + c + "'");
    }
  }
  for (const auto* spec : {&working.f1, &working.f0})
    if (spec->references("x")) bad("working model f must not use x");
}

Trial generate_trial(const ScenarioConfig& cfg, const Stream& stream, long n_patients) {
  Trial trial;
  trial.covariate_names = cfg.covariates.names();
  trial.has_short_term = cfg.has_short_term();
  const std::size_t p = trial.covariate_names.size();
  const CompiledModel ymod(cfg.y_model, trial.covariate_names);
  std::optional<CompiledModel> xmod;
  if (cfg.x_model) xmod.emplace(*cfg.x_model, trial.covariate_names);
  const double per_day = cfg.rate_per_month / kDaysPerMonth;

  trial.patients.resize(static_cast<std::size_t>(n_patients));
  double clock = 0.0;
  for (long li = 0; li < n_patients; ++li) {
    const auto i = static_cast<std::uint32_t>(li);
    auto& pt = trial.patients[static_cast<std::size_t>(li)];
    clock += -std::log1p(-stream.uniform(i, Purpose::Arrival)) / per_day;
    pt.arrival = clock;
    pt.z.resize(p);
    if (cfg.covariates.bootstrap()) {
      const auto rows = cfg.covariates.table.rows();
      auto r = static_cast<std::size_t>(stream.uniform(i, Purpose::Covariate) * static_cast<double>(rows));
      r = std::min(r, rows - 1);
      for (std::size_t j = 0; j < p; ++j) pt.z[j] = cfg.covariates.table.col(trial.covariate_names[j])[r];
    } else {
      std::size_t j = 0;
      std::uint32_t draw = 0;
      for (const auto& s : cfg.covariates.parametric) {
        const double u = stream.uniform_open(i, Purpose::Covariate, draw++);
        switch (s.kind) {
          case CovariateSpec::Kind::Normal: pt.z[j++] = s.mean + s.sd * norm_quantile(u); break;
          case CovariateSpec::Kind::Bernoulli: pt.z[j++] = u < s.p ? 1.0 : 0.0; break;
          case CovariateSpec::Kind::Categorical: {
            std::size_t level = 0;
            double acc = s.probs[0];
            while (level + 1 < s.probs.size() && u >= acc) acc += s.probs[++level];
            for (std::size_t l = 1; l < s.probs.size(); ++l) pt.z[j++] = level == l ? 1.0 : 0.0;
            break;
          }
        }
      }
    }
    pt.arm = stream.uniform(i, Purpose::Arm) < 0.5 ? 1 : 0;
    int x = 0;
    if (xmod) {
      x = stream.uniform(i, Purpose::ShortTerm) < expit(xmod->linear_predictor(pt.z, pt.arm, 0)) ? 1 : 0;
      pt.x = x;
    }
    pt.y = stream.uniform(i, Purpose::Primary) < expit(ymod.linear_predictor(pt.z, pt.arm, x)) ? 1 : 0;
  }
  return trial;
}

interim::InterimSnapshot snapshot_of(const Trial& trial, long n, double day, const interim::Lags& lags) {
  std::vector<interim::PatientRecord> pts(trial.patients.begin(), trial.patients.begin() + n);
  return interim::snapshot_at_day(std::move(pts), trial.covariate_names, day, lags, trial.has_short_term);
}

interim::InterimSnapshot complete_snapshot(const Trial& trial, long n) {
  interim::Lags lags{0.0, 1.0};
  return snapshot_of(trial, n, std::numeric_limits<double>::infinity(), lags);
}

Look evaluate_look(const ScenarioConfig& cfg, const Trial& trial, interim::Method method, double day) {
  Look look;
  look.day = day;
  const auto snap = snapshot_of(trial, cfg.n_total(), day, cfg.lags);
  look.n_recruited = static_cast<long>(snap.n_recruited());
  try {
    look.estimate = interim::analyze(snap, method, cfg.working);
    const double fv = monitoring::final_variance_unblinded(snap, static_cast<double>(cfg.n_total()));
    look.t = monitoring::information_fraction(look.estimate.s2, fv);
    look.ok = true;
  } catch (const Error& e) {
    look.error = std::string(to_string(e.code())) + ": " + e.what();
  }
  return look;
}

std::vector<std::optional<Look>> scan_information(const ScenarioConfig& cfg, const Trial& trial,
                                                  interim::Method method, const std::vector<double>& levels) {
  std::vector<std::optional<Look>> out(levels.size());
  if (levels.empty()) return out;
  const auto& pts = trial.patients;
  const long d_start = static_cast<long>(std::ceil(pts.front().arrival + cfg.lags.y));
  const long d_end = static_cast<long>(std::ceil(pts[static_cast<std::size_t>(cfg.n_total() - 1)].arrival + cfg.lags.y));
  std::map<long, Look> cache;
  auto at = [&](long d) -> const Look& {
    auto it = cache.find(d);
    if (it == cache.end()) it = cache.emplace(d, evaluate_look(cfg, trial, method, static_cast<double>(d))).first;
    return it->second;
  };
  auto reached = [&](long d, double level) {
    const auto& l = at(d);
    return l.ok && l.t >= level;
  };

  long prev = d_start - 1, cur = d_start;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double level = levels[k];
    while (!reached(cur, level)) {
      if (cur >= d_end) return out;
      prev = cur;
      cur = std::min(cur + kCoarseStep, d_end);
    }
    long lo = prev, hi = cur;
    while (hi - lo > 1) {
      const long mid = lo + (hi - lo) / 2;
      if (reached(mid, level)) hi = mid;
      else lo = mid;
    }
    out[k] = at(hi);
  }
  return out;
}

std::vector<interim::Method> plot_methods(const ScenarioConfig& cfg) {
  std::vector<interim::Method> m{cfg.method};
  if (cfg.method != interim::Method::Standard) m.push_back(interim::Method::Standard);
  return m;
}

ReplicationRecord run_replication(const ScenarioConfig& cfg, long rep) {
  ReplicationRecord rec;
  rec.rep = rep;
  const Stream stream(cfg.seed, static_cast<std::uint64_t>(rep));
  const Trial trial = generate_trial(cfg, stream, cfg.n_max());
  const long n = cfg.n_total();

  Look look;
  switch (cfg.trigger.kind) {
    case TriggerKind::InformationFraction: {
      auto r = scan_information(cfg, trial, cfg.method, {cfg.trigger.value});
      if (!r[0]) throw Error(ErrorCode::TriggerUnreachable, "information fraction never reached the target");
      look = std::move(*r[0]);
      break;
    }
    case TriggerKind::CalendarDay:
    case TriggerKind::RecruitedFraction: {
      const double day = cfg.trigger.kind == TriggerKind::CalendarDay
                             ? cfg.trigger.value
                             : cfg.trigger.value * static_cast<double>(n) * kDaysPerMonth / cfg.rate_per_month;
      look = evaluate_look(cfg, trial, cfg.method, day);
      if (!look.ok) throw Error(ErrorCode::TriggerUnreachable, "interim analysis failed: " + look.error);
      break;
    }
  }

  const auto& est = look.estimate;
  rec.day = look.day;
  rec.n_prime = look.n_recruited;
  rec.pct_recruited = 100.0 * static_cast<double>(rec.n_prime) / static_cast<double>(n);
  rec.diff = est.diff;
  rec.s2 = est.s2;
  const auto mon = monitoring::monitor(est, look.t, cfg.boundary);
  rec.t = mon.t;
  rec.z_t = mon.z;
  rec.b_t = mon.b;
  rec.cp = mon.cp;
  rec.stopped = mon.decision == monitoring::Decision::StopFutility;

  const double crit = norm_quantile(1.0 - cfg.alpha);
  rec.z_final_no_ssr = monitoring::final_z(complete_snapshot(trial, n));
  rec.reject_one_stage = rec.z_final_no_ssr > crit;
  rec.reject_no_ssr = !rec.stopped && rec.reject_one_stage;
  rec.ss_no_ssr = rec.stopped ? rec.n_prime : n;

  const double tc = std::max(monitoring::cp_fraction(rec.t), 1e-9);
  adaptive::CombinationPlan plan;
  plan.alpha = cfg.alpha;
  plan.beta = cfg.beta;
  plan.w = cfg.ssr.combination_weight.value_or(
      cfg.trigger.kind == TriggerKind::InformationFraction ? cfg.trigger.value : tc);

  rec.n_new = n;
  rec.rationale = "none";
  if (cfg.ssr.enabled) {
    std::optional<double> theta;
    if (cfg.ssr.theta_mode == ThetaMode::Design) {
      theta = monitoring::design_theta(cfg.alpha, cfg.beta);
    } else if (rec.z_t > 0.0) {
      theta = adaptive::observed_theta(rec.z_t, tc);
    }
    if (theta) {
      const auto res = adaptive::reassess_sample_size(rec.z_t, tc, n, std::max(rec.n_prime, 1L), *theta, plan,
                                                      cap_total(cfg), cfg.ssr.allow_decrease);
      rec.n_new = res.n_new;
      rec.rationale = adaptive::to_string(res.rationale);
    } else {
      rec.rationale = "NonPositiveTheta";
    }
  }

  const auto fin = complete_snapshot(trial, rec.n_new);
  rec.z_final_ssr = monitoring::final_z(fin);
  const double fv = monitoring::final_variance_unblinded(fin, static_cast<double>(rec.n_new));
  rec.t_tilde = std::clamp(fv / est.s2, 1e-6, 1.0 - 1e-6);
  rec.z2 = adaptive::second_stage_statistic(rec.z_final_ssr, rec.z_t, rec.t_tilde);
  const auto comb = adaptive::combination_test(rec.z_t, rec.z2, plan);
  rec.p_combined = comb.p;
  rec.reject_ssr = cfg.ssr.enabled ? (!rec.stopped && comb.reject) : rec.reject_no_ssr;
  rec.ss_ssr = rec.stopped ? rec.n_prime : (cfg.ssr.enabled ? rec.n_new : n);

  if (!cfg.plot_fractions.empty()) {
    auto levels = cfg.plot_fractions;
    std::sort(levels.begin(), levels.end());
    const auto methods = plot_methods(cfg);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto looks = scan_information(cfg, trial, methods[m], levels);
      for (std::size_t k = 0; k < levels.size(); ++k) {
        PlotPoint pp;
        pp.method = static_cast<int>(m);
        pp.level = levels[k];
        if (looks[k]) {
          pp.ok = true;
          pp.day = looks[k]->day;
          pp.pct_recruited = 100.0 * static_cast<double>(looks[k]->n_recruited) / static_cast<double>(n);
          pp.stopped = monitoring::monitor(looks[k]->estimate, looks[k]->t, cfg.boundary).decision ==
                       monitoring::Decision::StopFutility;
        }
        rec.plot.push_back(pp);
      }
    }
  }
  rec.ok = true;
  return rec;
}

OperatingCharacteristics summarize(const std::vector<ReplicationRecord>& records) {
  OperatingCharacteristics oc;
  oc.reps = static_cast<long>(records.size());
  std::vector<double> t, day, pct, ss_no, ss, loss;
  long stop = 0, one = 0, no = 0, yes = 0;
  for (const auto& r : records) {
    if (!r.ok) {
      ++oc.failures;
      continue;
    }
    t.push_back(r.t);
    day.push_back(r.day);
    pct.push_back(r.pct_recruited);
    ss_no.push_back(static_cast<double>(r.ss_no_ssr));
    ss.push_back(static_cast<double>(r.ss_ssr));
    loss.push_back(static_cast<double>(r.reject_one_stage) - static_cast<double>(r.reject_no_ssr));
    stop += r.stopped;
    one += r.reject_one_stage;
    no += r.reject_no_ssr;
    yes += r.reject_ssr;
    if (!r.stopped && !r.reject_no_ssr) {
      ++oc.n_continue_not_rejected;
      oc.n_gain += r.reject_ssr;
    }
    if (r.reject_no_ssr) {
      ++oc.n_rejected_without;
      oc.n_loss += !r.reject_ssr;
    }
  }
  const long n = static_cast<long>(t.size());
  const auto se = [n](const std::vector<double>& v) {
    return n > 0 ? std::sqrt(var_of(v) / static_cast<double>(n)) : 0.0;
  };
  oc.stop_futility = rate_of(stop, n);
  oc.reject_one_stage = rate_of(one, n);
  oc.reject_no_ssr = rate_of(no, n);
  oc.reject_ssr = rate_of(yes, n);
  oc.power_loss.value = mean_of(loss);
    oc.power_loss.se = se(loss);
  oc.mean_t = mean_of(t);
  oc.mean_days_to_interim = mean_of(day);
  oc.mean_pct_recruited = mean_of(pct);
  oc.se_t = se(t);
  oc.se_days_to_interim = se(day);
  oc.se_pct_recruited = se(pct);
  oc.ss_quantiles_no_ssr = quantiles_of(ss_no);
  oc.ss_quantiles_ssr = quantiles_of(ss);
  oc.mean_ss_no_ssr = mean_of(ss_no);
  oc.sd_ss_no_ssr = std::sqrt(var_of(ss_no));
  oc.mean_ss = mean_of(ss);
  oc.sd_ss = std::sqrt(var_of(ss));
  oc.rejected_with_ssr_not_without = rate_of(oc.n_gain, oc.n_continue_not_rejected);
  oc.not_rejected_with_ssr_rejected_without = rate_of(oc.n_loss, oc.n_rejected_without);
  return oc;
}

MonteCarloResult run_monte_carlo(const ScenarioConfig& cfg, long reps, int threads) {
  if (reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be at least 1");
  cfg.validate();
  MonteCarloResult res;
  res.records.resize(static_cast<std::size_t>(reps));
  std::atomic<long> next{0};
  auto worker = [&] {
    for (long i = next++; i < reps; i = next++) {
      auto& slot = res.records[static_cast<std::size_t>(i)];
      try {
        slot = run_replication(cfg, i);
      } catch (const Error& e) {
        slot = ReplicationRecord{};
        slot.rep = i;
        slot.status = std::string(to_string(e.code()));
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, static_cast<int>(reps)));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  res.oc = summarize(res.records);

  if (!cfg.plot_fractions.empty()) {
    auto levels = cfg.plot_fractions;
    std::sort(levels.begin(), levels.end());
    const auto methods = plot_methods(cfg);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      for (double level : levels) {
        PlotRow row;
        row.method = interim::to_string(methods[m]);
        row.level = level;
        long stops = 0;
        std::vector<double> days, pcts;
        for (const auto& r : res.records) {
          if (!r.ok) continue;
          for (const auto& pp : r.plot) {
            if (pp.method != static_cast<int>(m) || pp.level != level || !pp.ok) continue;
            stops += pp.stopped;
            days.push_back(pp.day);
            pcts.push_back(pp.pct_recruited);
          }
        }
        row.n = static_cast<long>(days.size());
        row.stop = rate_of(stops, row.n);
        row.mean_day = mean_of(days);
        row.mean_pct_recruited = mean_of(pcts);
        res.plot.push_back(row);
      }
    }
  }
  return res;
}

RSquared compute_r_squared(const Table& rows, const glm::DesignSpec& full_spec, const glm::DesignSpec& z_only_spec,
                           ProjectionKind projection) {
  const auto& y = rows.col(full_spec.response);
  const auto fit = glm::fit(full_spec, rows, y, glm::Family::BinomialLogit);
  const Eigen::VectorXd lp = glm::linear_predictor(fit, rows);
  std::vector<double> lpv(lp.data(), lp.data() + lp.size());
  const double v = var_of(lpv);
  const double den = v + std::numbers::pi * std::numbers::pi / 4.0;
  RSquared r;
  r.r2_total = v / den;

  std::optional<std::size_t> xi;
  for (std::size_t j = 0; j < full_spec.terms.size(); ++j) {
    const auto& t = full_spec.terms[j];
    if (t.factors.size() == 1 && t.factors[0].column == "x" && !t.factors[0].absolute) xi = j;
  }
  if (!xi) {
    r.r2_z = r.r2_total;
    return r;
  }
  const double b1 = fit.coefficients(static_cast<Eigen::Index>(*xi));
  const auto& x = rows.col("x");
  glm::DesignSpec zspec = z_only_spec;
  zspec.response = "x";
  const auto qfit = glm::fit(zspec, rows, x, projection == ProjectionKind::LeastSquares ? glm::Family::GaussianIdentity
                                                                                        : glm::Family::BinomialLogit);
  const auto q = glm::predict_mean(qfit, rows);
  std::vector<double> resid(x.size()), rest(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    resid[i] = x[i] - q[i];
    rest[i] = lpv[i] - b1 * resid[i];
  }
  r.r2_x = b1 * b1 * var_of(resid) / den;
  r.r2_z = var_of(rest) / den;
  r.cross = r.r2_total - r.r2_x - r.r2_z;
  return r;
}

}  // namespace adaptrial::sim
