#include "adaptrial/interim.hpp"

#include <cmath>
#include <limits>

#include "adaptrial/error.hpp"

namespace adaptrial::interim {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_fit_failure(ErrorCode c) {
  return c == ErrorCode::NonConvergence || c == ErrorCode::CompleteSeparation || c == ErrorCode::RankDeficient;
}

std::vector<glm::DesignSpec> fallback_ladder(const glm::DesignSpec& spec) {
  std::vector<glm::DesignSpec> out{spec};
  glm::DesignSpec cur = spec;
  std::erase_if(cur.terms, [](const glm::Term& t) { return t.is_interaction(); });
  if (cur.terms.size() != spec.terms.size()) out.push_back(cur);
  while (!cur.terms.empty() && !cur.terms.back().is_intercept()) {
    cur.terms.pop_back();
    if (!cur.terms.empty() && !(cur.terms.size() == 1 && cur.terms[0].is_intercept())) out.push_back(cur);
  }
  auto last = glm::DesignSpec::intercept_only(spec.response);
  out.push_back(last);
  return out;
}

double variance(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (n - 1.0);
}

}  // namespace

std::size_t InterimSnapshot::n_recruited() const {
  std::size_t n = 0;
  for (const auto& c : ind) n += c.cz;
  return n;
}

void update_proportions(InterimSnapshot& snap) {
  double nz = 0, nx = 0, ny = 0, na = 0;
  for (std::size_t i = 0; i < snap.patients.size(); ++i) {
    const auto& c = snap.ind[i];
    nz += c.cz;
    nx += c.cx;
    ny += c.cy;
    na += c.cz && snap.patients[i].arm == 1;
  }
  snap.pi_hat = nz > 0 ? na / nz : 0.0;
  snap.pix_hat = nz > 0 ? nx / nz : 0.0;
  snap.piy_hat = nx > 0 ? ny / nx : 0.0;
}

InterimSnapshot snapshot_at_day(std::vector<PatientRecord> patients, std::vector<std::string> covariate_names,
                                double calendar_time, Lags lags, bool has_short_term) {
  if (!(lags.x < lags.y)) throw Error(ErrorCode::InvalidArgument, "short-term lag must be below the primary lag");
  InterimSnapshot s;
  s.calendar_time = calendar_time;
  s.lags = lags;
  s.covariate_names = std::move(covariate_names);
  s.patients = std::move(patients);
  s.has_short_term = has_short_term;
  s.ind.resize(s.patients.size());
  for (std::size_t i = 0; i < s.patients.size(); ++i) {
    const double elapsed = calendar_time - s.patients[i].arrival;
    auto& c = s.ind[i];
    c.cz = elapsed >= 0.0;
    c.cy = elapsed >= lags.y;
    c.cx = has_short_term ? elapsed >= lags.x : c.cy;
  }
  update_proportions(s);
  return s;
}

InterimSnapshot snapshot_from_observed(std::vector<PatientRecord> patients,
                                       std::vector<std::string> covariate_names, bool has_short_term) {
  InterimSnapshot s;
  s.covariate_names = std::move(covariate_names);
  s.patients = std::move(patients);
  s.has_short_term = has_short_term;
  s.ind.resize(s.patients.size());
  for (std::size_t i = 0; i < s.patients.size(); ++i) {
    const auto& p = s.patients[i];
    auto& c = s.ind[i];
    c.cz = true;
    c.cy = p.y.has_value();
    c.cx = has_short_term ? p.x.has_value() : c.cy;
    if (c.cy && !c.cx)
      throw Error(ErrorCode::InconsistentIndicators, "patient '" + p.id + "' has Y observed but X missing");
  }
  update_proportions(s);
  return s;
}

std::array<std::vector<std::size_t>, 4> partition_cohorts(const InterimSnapshot& snap) {
  std::array<std::vector<std::size_t>, 4> out;
  for (std::size_t i = 0; i < snap.ind.size(); ++i) {
    const auto& c = snap.ind[i];
    int k;
    if (c.cz && c.cx && c.cy) k = 0;
    else if (c.cz && c.cx && !c.cy) k = 1;
    else if (c.cz && !c.cx && !c.cy) k = 2;
    else if (!c.cz && !c.cx && !c.cy) k = 3;
    else
      throw Error(ErrorCode::InconsistentIndicators,
                  "patient '" + snap.patients[i].id + "' has an impossible observation pattern");
    out[static_cast<std::size_t>(k)].push_back(i);
  }
  return out;
}

Table covariate_table(const InterimSnapshot& snap, const std::vector<std::size_t>& rows) {
  Table t(rows.size());
  for (std::size_t j = 0; j < snap.covariate_names.size(); ++j) {
    std::vector<double> v(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) v[r] = snap.patients[rows[r]].z[j];
    t.set(snap.covariate_names[j], std::move(v));
  }
  std::vector<double> x(rows.size()), a(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& p = snap.patients[rows[r]];
    x[r] = snap.ind[rows[r]].cx && p.x ? static_cast<double>(*p.x) : kNaN;
    a[r] = p.arm;
  }
  t.set("x", std::move(x));
  t.set("a", std::move(a));
  return t;
}

ModelFit fit_with_fallback(const glm::DesignSpec& spec, const Table& rows, const std::vector<double>& response) {
  ModelFit out;
  const auto ladder = fallback_ladder(spec);
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const auto& cand = ladder[k];
    const bool last = k + 1 == ladder.size();
    if (!last && rows.rows() < cand.terms.size() + 5) {
      out.failure = "too few rows (" + std::to_string(rows.rows()) + ") for " + cand.formula();
      continue;
    }
    try {
      out.model = glm::fit(cand, rows, response, glm::Family::BinomialLogit);
      out.fallback_level = static_cast<int>(k);
      return out;
    } catch (const Error& e) {
      if (last || !is_fit_failure(e.code())) throw;
      out.failure = std::string(to_string(e.code())) + " for " + cand.formula();
    }
  }
  throw Error(ErrorCode::NonConvergence, "fallback ladder exhausted");  // unreachable
}

ArmEstimate estimate_arm_mean(const InterimSnapshot& snap, int arm, const glm::DesignSpec& h_spec,
                              const glm::DesignSpec& f_spec) {
  if (f_spec.references("x"))
    throw Error(ErrorCode::InvalidArgument, "the second-layer model must not use the short-term endpoint");
  const auto cohorts = partition_cohorts(snap);
  auto in_arm = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> out;
    for (auto i : idx)
      if (arm < 0 || snap.patients[i].arm == arm) out.push_back(i);
    return out;
  };
  const auto c1 = in_arm(cohorts[0]), c2 = in_arm(cohorts[1]), c3 = in_arm(cohorts[2]);
  const std::string which = arm < 0 ? "pooled data" : "arm " + std::to_string(arm);
  if (c1.empty()) throw Error(ErrorCode::EmptyCohort1, "no patients with observed Y in " + which);

  ArmEstimate est;
  const auto n = snap.patients.size();
  est.yhat.assign(n, kNaN);
  est.yhat2.assign(n, kNaN);
  auto y_of = [&](std::size_t i) { return static_cast<double>(*snap.patients[i].y); };

  std::vector<std::size_t> c12 = c1;
  c12.insert(c12.end(), c2.begin(), c2.end());

  if (snap.has_short_term && !c2.empty()) {
    std::vector<double> resp;
    resp.reserve(c1.size());
    for (auto i : c1) resp.push_back(y_of(i));
    try {
      est.h = fit_with_fallback(h_spec, covariate_table(snap, c1), resp);
    } catch (const Error& e) {
      throw Error(e.code(), "first-layer model (" + which + "): " + e.what());
    }
    const auto pred = glm::predict_mean(est.h->model, covariate_table(snap, c12));
    for (std::size_t r = 0; r < c12.size(); ++r) est.yhat[c12[r]] = pred[r];
  } else {
    for (auto i : c1) est.yhat[i] = y_of(i);
  }

  std::vector<double> ystar(c12.size());
  for (std::size_t r = 0; r < c12.size(); ++r) {
    const auto i = c12[r];
    ystar[r] = snap.ind[i].cy ? y_of(i) : est.yhat[i];
  }

  if (!c3.empty()) {
    try {
      est.f = fit_with_fallback(f_spec, covariate_table(snap, c12), ystar);
    } catch (const Error& e) {
      throw Error(e.code(), "second-layer model (" + which + "): " + e.what());
    }
    std::vector<std::size_t> all = c12;
    all.insert(all.end(), c3.begin(), c3.end());
    const auto pred = glm::predict_mean(est.f->model, covariate_table(snap, all));
    for (std::size_t r = 0; r < all.size(); ++r) est.yhat2[all[r]] = pred[r];
  } else {
    for (std::size_t r = 0; r < c12.size(); ++r) est.yhat2[c12[r]] = ystar[r];
  }

  double sum = 0.0;
  for (std::size_t r = 0; r < c12.size(); ++r) sum += ystar[r];
  for (auto i : c3) sum += est.yhat2[i];
  est.mu = sum / static_cast<double>(c12.size() + c3.size());
  return est;
}

double influence_bracket(const InterimSnapshot& snap, const ArmEstimate& est, std::size_t i) {
  const auto& c = snap.ind[i];
  double v = est.yhat2[i] - est.mu;
  if (c.cx) v += (est.yhat[i] - est.yhat2[i]) / snap.pix_hat;
  if (c.cx && c.cy) v += (*snap.patients[i].y - est.yhat[i]) / (snap.piy_hat * snap.pix_hat);
  return v;
}

EffectEstimate estimate_effect(const InterimSnapshot& snap, const WorkingModels& specs) {
  const ArmEstimate a1 = estimate_arm_mean(snap, 1, specs.h1, specs.f1);
  const ArmEstimate a0 = estimate_arm_mean(snap, 0, specs.h0, specs.f0);
  EffectEstimate e;
  e.mu1 = a1.mu;
  e.mu0 = a0.mu;
  e.diff = e.mu1 - e.mu0;
  e.h1 = a1.h;
  e.h0 = a0.h;
  e.f1 = a1.f;
  e.f0 = a0.f;
  const double pi = snap.pi_hat;
  for (std::size_t i = 0; i < snap.patients.size(); ++i) {
    if (!snap.ind[i].cz) continue;
    const bool treated = snap.patients[i].arm == 1;
    const double b = influence_bracket(snap, treated ? a1 : a0, i);
    e.influence.push_back(treated ? b / pi : -b / (1.0 - pi));
    e.recruited.push_back(i);
  }
  e.n_prime = e.influence.size();
  e.s2 = variance(e.influence) / static_cast<double>(e.n_prime);
  if (!(e.s2 > 0.0)) throw Error(ErrorCode::ZeroVariance, "interim variance estimate is zero");
  return e;
}

EffectEstimate complete_case_effect(const InterimSnapshot& snap) {
  double n1 = 0, n0 = 0, s1 = 0, s0 = 0;
  for (std::size_t i = 0; i < snap.patients.size(); ++i) {
    if (!snap.ind[i].cy) continue;
    const auto& p = snap.patients[i];
    (p.arm == 1 ? n1 : n0) += 1;
    (p.arm == 1 ? s1 : s0) += *p.y;
  }
  if (n1 == 0 || n0 == 0)
    throw Error(ErrorCode::EmptyCohort1, std::string("no patients with observed Y in arm ") + (n1 == 0 ? "1" : "0"));
  EffectEstimate e;
  e.mu1 = s1 / n1;
  e.mu0 = s0 / n0;
  e.diff = e.mu1 - e.mu0;
  e.s2 = e.mu1 * (1 - e.mu1) / n1 + e.mu0 * (1 - e.mu0) / n0;
  const double pi = n1 / (n1 + n0);
  for (std::size_t i = 0; i < snap.patients.size(); ++i) {
    if (!snap.ind[i].cy) continue;
    const auto& p = snap.patients[i];
    e.influence.push_back(p.arm == 1 ? (*p.y - e.mu1) / pi : -(*p.y - e.mu0) / (1 - pi));
    e.recruited.push_back(i);
  }
  e.n_prime = snap.n_recruited();
  if (!(e.s2 > 0.0)) throw Error(ErrorCode::ZeroVariance, "complete-case variance estimate is zero");
  return e;
}

Method parse_method(const std::string& s) {
  if (s == "proposal") return Method::Proposal;
  if (s == "standard") return Method::Standard;
  if (s == "x-only") return Method::XOnly;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + s + "' (expected proposal, standard or x-only)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Proposal: return "proposal";
    case Method::Standard: return "standard";
    case Method::XOnly: return "x-only";
  }
  return "?";
}

EffectEstimate analyze(const InterimSnapshot& snap, Method method, const WorkingModels& specs) {
  switch (method) {
    case Method::Standard: return complete_case_effect(snap);
    case Method::XOnly: {
      const auto h = glm::DesignSpec::parse(snap.has_short_term ? "y ~ x" : "y ~ 1");
      const auto f = glm::DesignSpec::intercept_only();
      return estimate_effect(snap, WorkingModels::shared(h, f));
    }
    case Method::Proposal: break;
  }
  return estimate_effect(snap, specs);
}

}  // namespace adaptrial::interim
