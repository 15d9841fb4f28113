#include <doctest.h>

#include <cmath>
#include <set>

#include "adaptrial/error.hpp"
#include "adaptrial/monitoring.hpp"
#include "adaptrial/rng.hpp"
#include "adaptrial/trial_sim.hpp"
#include "support.hpp"

using namespace adaptrial;
using namespace adaptrial::sim;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  Stream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  CHECK(a.uniform(5, Purpose::Primary) == b.uniform(5, Purpose::Primary));
  CHECK(a.uniform(5, Purpose::Primary) != c.uniform(5, Purpose::Primary));
  CHECK(a.uniform(5, Purpose::Primary) != d.uniform(5, Purpose::Primary));
  CHECK(a.uniform(5, Purpose::Primary) != a.uniform(5, Purpose::ShortTerm));
  CHECK(a.uniform(5, Purpose::Covariate, 0) != a.uniform(5, Purpose::Covariate, 1));
  double m = 0.0;
  for (std::uint32_t i = 0; i < 20000; ++i) {
    const double u = a.uniform_open(i, Purpose::Arm);
    CHECK((u > 0.0 && u < 1.0));
    m += u;
  }
  CHECK(m / 20000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("trial generation is deterministic and prefix stable") {
  const auto cfg = testing::load_scenario("ssr_h1.toml").scenario;
  const Stream s(cfg.seed, 3);
  const auto a = generate_trial(cfg, s, 600);
  const auto b = generate_trial(cfg, s, 900);
  for (std::size_t i = 0; i < 600; ++i) {
    CHECK(a.patients[i].arrival == b.patients[i].arrival);
    CHECK(a.patients[i].y == b.patients[i].y);
    CHECK(a.patients[i].x == b.patients[i].x);
    CHECK(a.patients[i].z == b.patients[i].z);
  }
  for (std::size_t i = 1; i < b.patients.size(); ++i) CHECK(b.patients[i].arrival >= b.patients[i - 1].arrival);
}

TEST_CASE("an outcome model at logit -30 never produces an event") {
  auto cfg = testing::load_scenario("c2_futility.toml").scenario;
  cfg.y_model.coefficients = {{"intercept", -30.0}};
  cfg.y_model.scaled_terms.clear();
  const auto t = generate_trial(cfg, Stream(1, 0), 2000);
  for (const auto& p : t.patients) CHECK(*p.y == 0);
}

TEST_CASE("snapshots at extreme days") {
  const auto cfg = testing::load_scenario("ssr_h0.toml").scenario;
  const auto t = generate_trial(cfg, Stream(cfg.seed, 0), cfg.n_total());
  const double last = t.patients.back().arrival;
  const auto full = snapshot_of(t, cfg.n_total(), last + cfg.lags.y, cfg.lags);
  CHECK(interim::partition_cohorts(full)[0].size() == static_cast<std::size_t>(cfg.n_total()));
  const auto early = evaluate_look(cfg, t, cfg.method, t.patients.front().arrival + cfg.lags.x);
  CHECK(!early.ok);
}

TEST_CASE("degenerate futility boundaries") {
  auto cfg = testing::load_scenario("ssr_h1.toml").scenario;
  cfg.ssr.enabled = false;
  cfg.boundary = monitoring::FutilityBoundary::fixed(0.0, cfg.alpha, cfg.beta);
  const auto never = run_monte_carlo(cfg, 60, 1);
  CHECK(never.oc.stop_futility.value == 0.0);
  CHECK(never.oc.reject_no_ssr.value == never.oc.reject_one_stage.value);
  cfg.boundary = monitoring::FutilityBoundary::fixed(1.0, cfg.alpha, cfg.beta);
  const auto always = run_monte_carlo(cfg, 60, 1);
  CHECK(always.oc.stop_futility.value == 1.0);
  CHECK(always.oc.reject_no_ssr.value == 0.0);
  CHECK(always.oc.reject_ssr.value == 0.0);
}

TEST_CASE("one replication: quantiles collapse") {
  const auto cfg = testing::load_scenario("ssr_h1.toml").scenario;
  const auto r = run_monte_carlo(cfg, 1, 1);
  CHECK(r.records.size() == 1);
  for (double q : r.oc.ss_quantiles_ssr.q) CHECK(q == r.oc.ss_quantiles_ssr.q[0]);
}

TEST_CASE("results do not depend on the thread count") {
  const auto cfg = testing::load_scenario("c2_futility.toml").scenario;
  const auto a = run_monte_carlo(cfg, 24, 1);
  const auto b = run_monte_carlo(cfg, 24, 4);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].diff == b.records[i].diff);
    CHECK(a.records[i].day == b.records[i].day);
    CHECK(a.records[i].ss_ssr == b.records[i].ss_ssr);
  }
  CHECK(a.oc.stop_futility.value == b.oc.stop_futility.value);
}

TEST_CASE("paired switch counts reconcile the two rejection rates") {
  for (const char* name : {"ssr_h0.toml", "ssr_h1.toml"}) {
    const auto cfg = testing::load_scenario(name).scenario;
    const auto r = run_monte_carlo(cfg, 200, 2);
    const auto& oc = r.oc;
    const double n = static_cast<double>(oc.reps - oc.failures);
    CHECK(std::abs((oc.reject_ssr.value - oc.reject_no_ssr.value) - (oc.n_gain - oc.n_loss) / n) < 1e-12);
    for (int k = 1; k < 5; ++k) CHECK(oc.ss_quantiles_ssr.q[k] >= oc.ss_quantiles_ssr.q[k - 1]);
    for (const auto& rec : r.records) {
      CHECK(rec.ss_ssr <= 2 * cfg.n_total());
      if (rec.stopped) CHECK(!rec.reject_ssr);
    }
  }
}

TEST_CASE("information-fraction trigger lands on the target") {
  const auto cfg = testing::load_scenario("c2_futility.toml").scenario;
  for (long rep = 0; rep < 5; ++rep) {
    const auto r = run_replication(cfg, rep);
    REQUIRE(r.ok);
    CHECK(r.t >= 0.5);
    CHECK(r.t < 0.52);
  }
}

TEST_CASE("information fraction grows with calendar time") {
  const auto cfg = testing::load_scenario("shortterm_correct.toml").scenario;
  for (long rep = 0; rep < 4; ++rep) {
    const auto trial = generate_trial(cfg, Stream(cfg.seed, static_cast<std::uint64_t>(rep)), cfg.n_total());
    double prev = 0.0;
    for (double day = 900; day < 2400; day += 60) {
      const auto look = evaluate_look(cfg, trial, interim::Method::Standard, day);
      if (!look.ok) continue;
      CHECK(look.t >= prev - 1e-6);
      prev = look.t;
    }
  }
}

TEST_CASE("R squared") {
  const auto cfg = testing::load_scenario("shortterm_correct.toml").scenario;
  const auto trial = generate_trial(cfg, Stream(5, 0), 4000);
  Table t(trial.patients.size());
  std::vector<double> y, x;
  std::vector<std::vector<double>> z(trial.covariate_names.size());
  for (const auto& p : trial.patients) {
    y.push_back(*p.y);
    x.push_back(*p.x);
    for (std::size_t j = 0; j < z.size(); ++j) z[j].push_back(p.z[j]);
  }
  t.set("y", y);
  t.set("x", x);
  for (std::size_t j = 0; j < z.size(); ++j) t.set(trial.covariate_names[j], z[j]);
  const auto full = cfg.working.h0;
  const auto zonly = cfg.working.f0;
  const auto r = compute_r_squared(t, full, zonly);
  CHECK(std::abs(r.r2_total - r.r2_x - r.r2_z) < 1e-10);
  CHECK(r.r2_x > 0.0);
  CHECK(r.r2_z > 0.0);
  const auto lr = compute_r_squared(t, full, zonly, ProjectionKind::Logistic);
  CHECK(std::abs(lr.r2_total - r.r2_total) < 1e-12);

  // response unrelated to the regressors: slopes are essentially zero
  Table u(4);
  u.set("y", {0, 1, 0, 1});
  u.set("w", {0, 0, 1, 1});
  CHECK(compute_r_squared(u, glm::DesignSpec::parse("y ~ w"), glm::DesignSpec::intercept_only()).r2_total < 1e-20);
}

TEST_CASE("invalid scenarios are rejected") {
  auto cfg = testing::load_scenario("c2_futility.toml").scenario;
  cfg.lags = {500, 400};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = testing::load_scenario("c2_futility.toml").scenario;
  cfg.ssr.cap_multiplier = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = testing::load_scenario("c2_futility.toml").scenario;
  cfg.y_model.coefficients["nonexistent"] = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
