#include "adaptrial/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "adaptrial/dataset.hpp"
#include "adaptrial/error.hpp"

namespace adaptrial::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::BadConfig, msg); }

json to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json o = json::object();
    for (const auto& [k, v] : *t) o[std::string(k.str())] = to_json(v);
    return o;
  }
  if (const auto* a = node.as_array()) {
    json arr = json::array();
    for (const auto& v : *a) arr.push_back(to_json(v));
    return arr;
  }
  if (const auto* s = node.as_string()) return s->get();
  if (const auto* i = node.as_integer()) return i->get();
  if (const auto* f = node.as_floating_point()) return f->get();
  if (const auto* b = node.as_boolean()) return b->get();
  std::ostringstream os;
  node.visit([&os](const auto& v) { os << v; });
  return os.str();
}

// Typed access to one config section; every read key is recorded so leftovers
// can be reported as unknown fields.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (root.contains(name_)) {
      if (!root.at(name_).is_object()) bad("field '" + name_ + "' must be a table");
      obj_ = root.at(name_);
      present_ = true;
    } else {
      obj_ = json::object();
    }
  }

  bool present() const { return present_; }
  bool has(const std::string& key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
  std::string path(const std::string& key) const { return name_ + "." + key; }

  const json& raw(const std::string& key) {
    allowed_.insert(key);
    return obj_.at(key);
  }
  void allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) allowed_.insert(k);
  }

  double number(const std::string& key, double def) {
    allowed_.insert(key);
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_number()) bad("field '" + path(key) + "' must be a number");
    return v.get<double>();
  }
  long integer(const std::string& key, long def) {
    allowed_.insert(key);
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer()) bad("field '" + path(key) + "' must be an integer");
    return v.get<long>();
  }
  std::uint64_t uinteger(const std::string& key, std::uint64_t def) {
    allowed_.insert(key);
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
      bad("field '" + path(key) + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool def) {
    allowed_.insert(key);
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) bad("field '" + path(key) + "' must be true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key, const std::string& def) {
    allowed_.insert(key);
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_string()) bad("field '" + path(key) + "' must be a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    allowed_.insert(key);
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_array()) bad("field '" + path(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) bad("field '" + path(key) + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& key, std::vector<std::string> def) {
    allowed_.insert(key);
    if (!has(key)) return def;
    const auto& v = obj_.at(key);
    if (!v.is_array()) bad("field '" + path(key) + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) bad("field '" + path(key) + "' must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void check_unknown() const {
    for (const auto& [k, v] : obj_.items())
      if (!allowed_.count(k)) bad("unknown field '" + path(k) + "'");
  }

 private:
  std::string name_;
  json obj_;
  bool present_ = false;
  std::set<std::string> allowed_;
};

sim::OutcomeModel read_outcome_model(const json& root, const std::string& name, json& resolved) {
  Section s(root, name);
  sim::OutcomeModel m;
  s.allow({"coefficients"});
  if (!s.has("coefficients")) bad("field '" + name + ".coefficients' is required");
  const auto& coefs = s.raw("coefficients");
  if (!coefs.is_object()) bad("field '" + name + ".coefficients' must be a table of term = coefficient");
  for (const auto& [k, v] : coefs.items()) {
    if (!v.is_number()) bad("field '" + name + ".coefficients." + k + "' must be a number");
    try {
      if (k != "intercept" && k != "(Intercept)" && k != "1") glm::Term::parse(k);
    } catch (const Error& e) {
      bad("field '" + name + ".coefficients." + k + "': " + e.what());
    }
    m.coefficients[k] = v.get<double>();
  }
  m.scale = s.number("scale", 1.0);
  m.scaled_terms = s.strings("scaled_terms", {});
  s.check_unknown();
  json r;
  r["coefficients"] = json::object();
  for (const auto& [k, v] : m.coefficients) r["coefficients"][k] = v;
  r["scale"] = m.scale;
  r["scaled_terms"] = m.scaled_terms;
  resolved[name] = r;
  return m;
}

glm::DesignSpec parse_formula(const std::string& field, const std::string& text) {
  try {
    return glm::DesignSpec::parse(text);
  } catch (const Error& e) {
    bad("field '" + field + "': " + e.what());
  }
}

std::string join_terms(const std::vector<std::string>& names, bool with_x) {
  std::string s = "y ~ ";
  bool first = true;
  if (with_x) {
    s += "x";
    first = false;
  }
  for (const auto& n : names) {
    s += first ? n : " + " + n;
    first = false;
  }
  if (first) s += "1";
  return s;
}

}  // namespace

json load_config_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.extension() == ".json") {
    try {
      auto j = json::parse(text);
      if (!j.is_object()) bad("config '" + path.string() + "' must be a JSON object");
      return j;
    } catch (const json::parse_error& e) {
      bad("config '" + path.string() + "': " + e.what());
    }
  }
  try {
    const auto tbl = toml::parse(text, path.string());
    return to_json(tbl);
  } catch (const toml::parse_error& e) {
    const auto& src = e.source();
    bad("config '" + path.string() + "' line " + std::to_string(src.begin.line) + ", column " +
        std::to_string(src.begin.column) + ": " + std::string(e.description()));
  }
}

Table read_covariate_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open covariate table '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) bad("covariate table '" + path.string() + "' is empty");
  const auto header = split_csv_line(line);
  std::vector<std::vector<double>> cols(header.size());
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) bad("covariate table '" + path.string() + "' has a ragged row");
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (header[j] == "id") continue;
      try {
        std::size_t used = 0;
        cols[j].push_back(std::stod(f[j], &used));
        if (used != f[j].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        bad("covariate table '" + path.string() + "': '" + f[j] + "' in column '" + header[j] + "' is not a number");
      }
    }
    ++rows;
  }
  if (rows == 0) bad("covariate table '" + path.string() + "' has no rows");
  Table t(rows);
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] != "id") t.set(header[j], std::move(cols[j]));
  return t;
}

ResolvedConfig resolve_config(const json& raw, const fs::path& base_dir, const std::optional<DatasetShape>& data) {
  static const std::set<std::string> kSections = {"design", "recruitment", "covariates", "x_model", "y_model",
                                                  "working_models", "interim", "futility", "ssr", "simulation",
                                                  "output", "sweep"};
  if (!raw.is_object()) bad("config must be a table");
  for (const auto& [k, v] : raw.items())
    if (!kSections.count(k)) bad("unknown field '" + k + "'");

  ResolvedConfig rc;
  auto& sc = rc.scenario;
  json& out = rc.resolved;

  {
    Section s(raw, "design");
    if (!s.has("n_per_arm")) bad("field 'design.n_per_arm' is required");
    sc.n_per_arm = s.integer("n_per_arm", 0);
    sc.alpha = s.number("alpha", 0.025);
    sc.beta = s.number("beta", 0.10);
    s.check_unknown();
    if (sc.n_per_arm <= 0) bad("field 'design.n_per_arm' must be positive");
    if (!(sc.alpha > 0 && sc.alpha < 0.5)) bad("field 'design.alpha' must lie in (0, 0.5)");
    if (!(sc.beta > 0 && sc.beta < 0.5)) bad("field 'design.beta' must lie in (0, 0.5)");
    out["design"] = {{"n_per_arm", sc.n_per_arm}, {"alpha", sc.alpha}, {"beta", sc.beta}};
  }
  {
    Section s(raw, "recruitment");
    sc.rate_per_month = s.number("rate_per_month", 8.0);
    sc.lags.x = s.number("lag_x_days", 121.75);
    sc.lags.y = s.number("lag_y_days", 456.6);
    s.check_unknown();
    if (!(sc.rate_per_month > 0)) bad("field 'recruitment.rate_per_month' must be positive");
    if (!(sc.lags.x >= 0 && sc.lags.x < sc.lags.y))
      bad("fields 'recruitment.lag_x_days' and 'recruitment.lag_y_days' must satisfy 0 <= lag_x < lag_y");
    out["recruitment"] = {{"rate_per_month", sc.rate_per_month}, {"lag_x_days", sc.lags.x}, {"lag_y_days", sc.lags.y}};
  }

  std::vector<std::string> names;
  bool has_x = false;
  {
    Section s(raw, "covariates");
    s.allow({"parametric"});
    const std::string source = s.string("source", "");
    if (!source.empty() && s.has("parametric")) bad("fields 'covariates.source' and 'covariates.parametric' are exclusive");
    if (!data) {
      if (!source.empty()) {
        fs::path p = source;
        if (p.is_relative()) p = base_dir / p;
        p = fs::weakly_canonical(p);
        sc.covariates.table = read_covariate_table(p);
        out["covariates"] = {{"source", p.string()}};
      } else {
        json arr = json::array();
        if (s.has("parametric")) {
          const auto& list = s.raw("parametric");
          if (!list.is_array()) bad("field 'covariates.parametric' must be an array of tables");
          for (std::size_t k = 0; k < list.size(); ++k) {
            const std::string field = "covariates.parametric[" + std::to_string(k) + "]";
            json wrap = {{field, list[k]}};
            Section e(wrap, field);
            sim::CovariateSpec spec;
            spec.name = e.string("name", "");
            if (spec.name.empty()) bad("field '" + field + ".name' is required");
            const std::string kind = e.string("kind", "normal");
            json r = {{"name", spec.name}, {"kind", kind}};
            if (kind == "normal") {
              spec.kind = sim::CovariateSpec::Kind::Normal;
              spec.mean = e.number("mean", 0.0);
              spec.sd = e.number("sd", 1.0);
              r["mean"] = spec.mean;
              r["sd"] = spec.sd;
            } else if (kind == "bernoulli") {
              spec.kind = sim::CovariateSpec::Kind::Bernoulli;
              spec.p = e.number("p", 0.5);
              r["p"] = spec.p;
            } else if (kind == "categorical") {
              spec.kind = sim::CovariateSpec::Kind::Categorical;
              spec.probs = e.numbers("probs", {});
              r["probs"] = spec.probs;
            } else {
              bad("field '" + field + ".kind' must be normal, bernoulli or categorical");
            }
            e.check_unknown();
            sc.covariates.parametric.push_back(spec);
            arr.push_back(r);
          }
        } else {
          sc.covariates.parametric.push_back({"z1", sim::CovariateSpec::Kind::Normal, 0.0, 1.0, 0.5, {}});
          arr.push_back({{"name", "z1"}, {"kind", "normal"}, {"mean", 0.0}, {"sd", 1.0}});
        }
        out["covariates"] = {{"parametric", arr}};
      }
      names = sc.covariates.names();
    }
    s.check_unknown();
  }

  if (data) {
    names = data->covariate_names;
    has_x = data->has_short_term;
    if (raw.contains("x_model")) Section(raw, "x_model");
  } else {
    if (raw.contains("x_model")) sc.x_model = read_outcome_model(raw, "x_model", out);
    if (!raw.contains("y_model")) bad("field 'y_model' is required");
    sc.y_model = read_outcome_model(raw, "y_model", out);
    has_x = sc.x_model.has_value();
  }

  {
    Section s(raw, "working_models");
    const std::string h = s.string("h", join_terms(names, has_x));
    const std::string f = s.string("f", join_terms(names, false));
    const std::string h1 = s.string("h1", h), h0 = s.string("h0", h);
    const std::string f1 = s.string("f1", f), f0 = s.string("f0", f);
    s.check_unknown();
    sc.working.h1 = parse_formula("working_models.h1", h1);
    sc.working.h0 = parse_formula("working_models.h0", h0);
    sc.working.f1 = parse_formula("working_models.f1", f1);
    sc.working.f0 = parse_formula("working_models.f0", f0);
    rc.h_pooled = parse_formula("working_models.h", h);
    rc.f_pooled = parse_formula("working_models.f", f);
    for (const auto& [field, spec] : {std::pair{"h1", &sc.working.h1}, {"h0", &sc.working.h0}, {"f1", &sc.working.f1},
                                      {"f0", &sc.working.f0}, {"h", &rc.h_pooled}, {"f", &rc.f_pooled}}) {
      if (spec->response != "y") bad("field 'working_models." + std::string(field) + "' must model y");
      for (const auto& c : spec->columns()) {
        const bool known = c == "x" ? has_x : std::find(names.begin(), names.end(), c) != names.end();
        if (!known) bad("field 'working_models." + std::string(field) + "' uses unknown column '" + c + "'");
      }
      if (field[0] == 'f' && spec->references("x"))
        bad("field 'working_models." + std::string(field) + "' must not use x");
    }
    out["working_models"] = {{"h", rc.h_pooled.formula()},    {"f", rc.f_pooled.formula()},
                             {"h1", sc.working.h1.formula()}, {"h0", sc.working.h0.formula()},
                             {"f1", sc.working.f1.formula()}, {"f0", sc.working.f0.formula()}};
  }

  {
    Section s(raw, "interim");
    const std::string trig = s.string("trigger", "information_fraction");
    if (trig == "information_fraction") {
      sc.trigger = {sim::TriggerKind::InformationFraction, s.number("target", 0.5)};
      if (!(sc.trigger.value > 0 && sc.trigger.value < 1)) bad("field 'interim.target' must lie in (0, 1)");
    } else if (trig == "recruited_fraction") {
      sc.trigger = {sim::TriggerKind::RecruitedFraction, s.number("target", 0.75)};
      if (!(sc.trigger.value > 0 && sc.trigger.value <= 1)) bad("field 'interim.target' must lie in (0, 1]");
    } else if (trig == "calendar_day") {
      if (!s.has("target")) bad("field 'interim.target' (the day) is required for a calendar_day trigger");
      sc.trigger = {sim::TriggerKind::CalendarDay, s.number("target", 0.0)};
      if (!(sc.trigger.value > 0)) bad("field 'interim.target' must be a positive day");
    } else {
      bad("field 'interim.trigger' must be information_fraction, recruited_fraction or calendar_day");
    }
    const std::string method = s.string("method", "proposal");
    try {
      sc.method = interim::parse_method(method);
    } catch (const Error& e) {
      bad("field 'interim.method': " + std::string(e.what()));
    }
    s.check_unknown();
    out["interim"] = {{"trigger", trig}, {"target", sc.trigger.value}, {"method", method}};
  }

  {
    Section s(raw, "futility");
    const std::string kind = s.string("boundary", "obrien_fleming");
    json r = {{"boundary", kind}};
    if (kind == "obrien_fleming") {
      sc.boundary = monitoring::FutilityBoundary::obrien_fleming(sc.alpha, sc.beta);
    } else if (kind == "fixed_cp") {
      if (!s.has("threshold")) bad("field 'futility.threshold' is required for a fixed_cp boundary");
      const double th = s.number("threshold", 0.0);
      if (!(th >= 0 && th <= 1)) bad("field 'futility.threshold' must lie in [0, 1]");
      sc.boundary = monitoring::FutilityBoundary::fixed(th, sc.alpha, sc.beta);
      r["threshold"] = th;
    } else if (kind == "none") {
      sc.boundary = monitoring::FutilityBoundary::fixed(0.0, sc.alpha, sc.beta);
    } else {
      bad("field 'futility.boundary' must be obrien_fleming, fixed_cp or none");
    }
    s.check_unknown();
    out["futility"] = r;
  }

  {
    Section s(raw, "ssr");
    sc.ssr.enabled = s.boolean("enabled", false);
    sc.ssr.cap_multiplier = s.number("cap_multiplier", 2.0);
    sc.ssr.allow_decrease = s.boolean("allow_decrease", false);
    const std::string mode = s.string("theta_mode", "design");
    if (mode == "design") sc.ssr.theta_mode = sim::ThetaMode::Design;
    else if (mode == "observed") sc.ssr.theta_mode = sim::ThetaMode::Observed;
    else bad("field 'ssr.theta_mode' must be design or observed");
    if (s.has("combination_weight")) sc.ssr.combination_weight = s.number("combination_weight", 0.5);
    else s.allow({"combination_weight"});
    s.check_unknown();
    if (!(sc.ssr.cap_multiplier >= 1.0)) bad("field 'ssr.cap_multiplier' must be at least 1");
    if (sc.ssr.combination_weight && !(*sc.ssr.combination_weight > 0 && *sc.ssr.combination_weight < 1))
      bad("field 'ssr.combination_weight' must lie in (0, 1)");
    json w = nullptr;
    if (sc.ssr.combination_weight) w = *sc.ssr.combination_weight;
    else if (sc.trigger.kind == sim::TriggerKind::InformationFraction) w = sc.trigger.value;
    if (!w.is_null()) sc.ssr.combination_weight = w.get<double>();
    out["ssr"] = {{"enabled", sc.ssr.enabled},
                  {"cap_multiplier", sc.ssr.cap_multiplier},
                  {"allow_decrease", sc.ssr.allow_decrease},
                  {"theta_mode", mode},
                  {"combination_weight", w}};
  }

  {
    Section s(raw, "simulation");
    sc.seed = s.uinteger("seed", 1);
    rc.reps = s.integer("reps", 1000);
    s.check_unknown();
    if (rc.reps < 1) bad("field 'simulation.reps' must be positive");
    out["simulation"] = {{"seed", sc.seed}, {"reps", rc.reps}};
  }

  {
    Section s(raw, "output");
    const std::vector<double> def = sc.trigger.kind == sim::TriggerKind::InformationFraction
                                        ? std::vector<double>{0.3, 0.4, 0.5, 0.6, 0.7}
                                        : std::vector<double>{};
    sc.plot_fractions = s.numbers("plot_fractions", def);
    s.check_unknown();
    for (double f : sc.plot_fractions)
      if (!(f > 0 && f < 1)) bad("field 'output.plot_fractions' entries must lie in (0, 1)");
    out["output"] = {{"plot_fractions", sc.plot_fractions}};
  }

  {
    Section s(raw, "sweep");
    rc.sweep_scales = s.numbers("scales", {sc.y_model.scale});
    const auto methods = s.strings("methods", {interim::to_string(sc.method)});
    s.check_unknown();
    for (const auto& m : methods) {
      try {
        rc.sweep_methods.push_back(interim::parse_method(m));
      } catch (const Error& e) {
        bad("field 'sweep.methods': " + std::string(e.what()));
      }
    }
    out["sweep"] = {{"scales", rc.sweep_scales}, {"methods", methods}};
  }

  if (!data) {
    try {
      sc.validate();
    } catch (const Error& e) {
      bad(e.what());
    }
  }
  return rc;
}

}  // namespace adaptrial::cli
