#include <doctest.h>

#include <cmath>
#include <random>

#include "adaptrial/adaptive.hpp"
#include "adaptrial/error.hpp"
#include "adaptrial/monitoring.hpp"
#include "adaptrial/normal.hpp"

using namespace adaptrial;
using namespace adaptrial::adaptive;

namespace {
const double kTheta = monitoring::design_theta(0.025, 0.10);
}

TEST_CASE("second-stage statistic") {
  CHECK(std::abs(second_stage_statistic(std::sqrt(0.3) * 1.7, 1.7, 0.3)) < 1e-15);
  CHECK(std::abs(second_stage_statistic(2.0, 1.0, 0.5) - (2.0 - std::sqrt(0.5)) / std::sqrt(0.5)) < 1e-15);
  CHECK(std::abs(second_stage_statistic(2.0, 1.0, 0.5) - 1.8284271247461903) < 1e-12);
  CHECK_THROWS_AS(second_stage_statistic(1.0, 1.0, 1.0), Error);
  CHECK_THROWS_AS(second_stage_statistic(1.0, 1.0, 0.0), Error);
}

TEST_CASE("no-adaptation identity") {
  for (double t : {0.2, 0.5, 0.77}) {
    for (double zt : {-1.0, 0.3, 2.5}) {
      const double z1 = 1.9;
      const double z2 = second_stage_statistic(z1, zt, t);
      CHECK(std::abs(std::sqrt(t) * zt + std::sqrt(1 - t) * z2 - z1) < 1e-12);
      CombinationPlan plan;
      plan.w = t;
      CHECK(combination_test(zt, z2, plan).reject == (z1 > norm_quantile(0.975)));
    }
  }
}

TEST_CASE("combination test") {
  CombinationPlan plan;
  auto r = combination_test(0.0, 0.0, plan);
  CHECK(r.p == 0.5);
  CHECK(!r.reject);
  plan.w = 1 - 1e-9;
  CHECK(std::abs(combination_test(1.3, -5.0, plan).p - norm_sf(1.3)) < 1e-4);
  plan.w = 1.0;
  CHECK_THROWS_AS(plan.validate(), Error);
  plan.w = 0.5;
  plan.alpha = 0.6;
  CHECK_THROWS_AS(plan.validate(), Error);
}

TEST_CASE("combination test holds its level under the null") {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> nd;
  for (double w : {0.3, 0.5, 0.8}) {
    CombinationPlan plan;
    plan.w = w;
    const int reps = 100000;
    int rej = 0;
    for (int i = 0; i < reps; ++i) rej += combination_test(nd(gen), nd(gen), plan).reject;
    const double rate = static_cast<double>(rej) / reps;
    CHECK(std::abs(rate - 0.025) <= 3 * std::sqrt(0.025 * 0.975 / reps));
  }
}

TEST_CASE("sample size reassessment: zero branch") {
  CombinationPlan plan;
  const auto r = reassess_sample_size(10.0, 0.5, 400, 300, kTheta, plan, 800, true);
  CHECK(r.n_second_stage == 0.0);
  CHECK(r.n_new == 300);
  CHECK(r.rationale == SsrRationale::NoFurtherRecruitment);
  CHECK(!r.capped);
}

TEST_CASE("sample size reassessment: on-track interior value") {
  CombinationPlan plan;
  const long n = 1000;
  const auto r = reassess_sample_size(kTheta * std::sqrt(0.5), 0.5, n, 500, kTheta, plan, 2 * n, true);
  CHECK(std::abs(r.n_second_stage / n - 0.2952238966028506) < 1e-10);
  CHECK(r.rationale == SsrRationale::Interior);
  CHECK(r.n_new == 796);  // ceil(795.22) rounded up to even
  const auto floored = reassess_sample_size(kTheta * std::sqrt(0.5), 0.5, n, 500, kTheta, plan, 2 * n, false);
  CHECK(floored.n_new == n);
  CHECK(floored.rationale == SsrRationale::BelowFloor);
}

TEST_CASE("sample size reassessment: cap branch") {
  CombinationPlan plan;
  const long n = 638;
  const auto r = reassess_sample_size(0.0, 0.5, n, 478, kTheta, plan, 2 * n, false);
  CHECK((r.n_second_stage + 0.5 * n) / n == doctest::Approx(2.063629904651787).epsilon(1e-10));
  CHECK(r.n_new == 2 * n);
  CHECK(r.capped);
  CHECK(r.rationale == SsrRationale::AtCap);
  // odd cap is rounded down to even
  CHECK(reassess_sample_size(0.0, 0.5, n, 478, kTheta, plan, 1001, false).n_new == 1000);
}

TEST_CASE("sample size reassessment properties") {
  CombinationPlan plan;
  for (bool allow : {false, true}) {
    long prev = 1L << 40;
    for (double z = -2; z <= 6; z += 0.05) {
      const auto r = reassess_sample_size(z, 0.45, 600, 430, kTheta, plan, 1200, allow);
      CHECK(r.n_new <= prev);
      CHECK(r.n_new % 2 == 0);
      CHECK(r.n_new >= 430);
      CHECK(r.n_new <= 1200);
      if (!allow) CHECK(r.n_new >= 600);
      prev = r.n_new;
    }
  }
  CHECK_THROWS_AS(reassess_sample_size(1.0, 0.5, 600, 400, 0.0, plan, 1200, true), Error);
  CHECK_THROWS_AS(reassess_sample_size(1.0, 1.0, 600, 400, kTheta, plan, 1200, true), Error);
}

TEST_CASE("observed drift") {
  CHECK(std::abs(observed_theta(2.0, 0.25) - 4.0) < 1e-15);
  try {
    observed_theta(-0.1, 0.5);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveTheta);
  }
}
