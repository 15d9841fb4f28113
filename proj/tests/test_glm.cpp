#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "adaptrial/design.hpp"
#include "adaptrial/error.hpp"
#include "adaptrial/glm.hpp"
#include "adaptrial/normal.hpp"
#include "support.hpp"

using namespace adaptrial;
using glm::DesignSpec;
using glm::Family;

namespace {

Table oracle_table(const nlohmann::json& o) {
  Table t(o["y"].size());
  t.set("x1", o["x1"].get<std::vector<double>>());
  t.set("x2", o["x2"].get<std::vector<double>>());
  return t;
}

std::vector<double> oracle_y(const nlohmann::json& o) { return o["y"].get<std::vector<double>>(); }

nlohmann::json oracle() { return testing::load_json(testing::source_dir() / "tests/oracles/glm_20row.json"); }

}  // namespace

TEST_CASE("normal cdf and quantile against reference values") {
  CHECK(norm_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-14));
  CHECK(std::abs(norm_cdf(-1.0) - 0.15865525393145707) < 1e-15);
  CHECK(norm_cdf(0.0) == 0.5);
  CHECK(std::abs(norm_cdf(-8.5) - 9.47953482220325e-18) < 1e-30);
  CHECK(std::abs(norm_sf(5.0) - 2.866515718791933e-07) < 1e-20);
  CHECK(std::abs(norm_quantile(0.975) - 1.959963984540054) < 1e-12);
  CHECK(std::abs(norm_quantile(0.9) - 1.2815515655446004) < 1e-12);
  CHECK(norm_quantile(0.5) == 0.0);
  CHECK(std::abs(norm_quantile(1e-10) - -6.361340902404056) < 1e-10);
  CHECK(std::abs(norm_quantile(0.02) - -2.053748910631823) < 1e-12);
  CHECK(std::abs(norm_quantile(1 - 1e-12) - 7.0344869100478356) < 1e-6);
  CHECK(std::isinf(norm_quantile(0.0)));
  CHECK(std::isnan(norm_quantile(1.5)));
}

TEST_CASE("quantile inverts the cdf") {
  for (double p = 0.0005; p < 1.0; p += 0.0125) CHECK(std::abs(norm_cdf(norm_quantile(p)) - p) < 1e-14);
}

TEST_CASE("expit is overflow safe") {
  CHECK(expit(0.0) == 0.5);
  CHECK(expit(800.0) == 1.0);
  CHECK(expit(-800.0) == 0.0);
  CHECK(std::abs(expit(logit(0.8)) - 0.8) < 1e-15);
}

TEST_CASE("formula parsing") {
  auto s = DesignSpec::parse("y ~ x + z1 + z1:z2 + abs(z1)");
  CHECK(s.terms.size() == 5);
  CHECK(s.has_intercept());
  CHECK(s.references("z2"));
  CHECK(!s.references("a"));
  CHECK(s.formula() == "y ~ 1 + x + z1 + z1:z2 + abs(z1)");
  CHECK(DesignSpec::parse("y ~ 1").terms.size() == 1);
  CHECK(!DesignSpec::parse("y ~ 0 + x").has_intercept());
  CHECK_THROWS_AS(DesignSpec::parse("y ~ x + x"), Error);
  CHECK_THROWS_AS(DesignSpec::parse("y ~ z1:z2 + z2:z1"), Error);
  CHECK_THROWS_AS(DesignSpec::parse("y ~ a:b:c:d"), Error);
  CHECK_THROWS_AS(DesignSpec::parse("y ~ x +"), Error);
}

TEST_CASE("abs and product terms evaluate on the table") {
  Table t(2);
  t.set("z1", {-2.0, 3.0});
  t.set("z2", {0.5, -1.0});
  auto X = glm::model_matrix(DesignSpec::parse("y ~ abs(z1) + z1:z2"), t);
  CHECK(X(0, 0) == 1.0);
  CHECK(X(0, 1) == 2.0);
  CHECK(X(1, 2) == -3.0);
  CHECK_THROWS_AS(glm::model_matrix(DesignSpec::parse("y ~ w"), t), Error);
}

TEST_CASE("intercept-only logistic on a symmetric response") {
  Table t(4);
  auto m = glm::fit(DesignSpec::intercept_only(), t, {1, 1, 0, 0}, Family::BinomialLogit);
  CHECK(std::abs(m.coefficients[0]) < 1e-12);
  CHECK(m.converged);
}

TEST_CASE("separated data raises CompleteSeparation") {
  Table t(2);
  t.set("x", {0, 1});
  try {
    glm::fit(DesignSpec::parse("y ~ x"), t, {0, 1}, Family::BinomialLogit);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CompleteSeparation);
  }
}

TEST_CASE("collinear design raises RankDeficient") {
  Table t(6);
  t.set("u", {1, 2, 3, 4, 5, 6});
  t.set("v", {2, 4, 6, 8, 10, 12});
  try {
    glm::fit(DesignSpec::parse("y ~ u + v"), t, {0, 1, 0, 1, 1, 0}, Family::BinomialLogit);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
}

TEST_CASE("logistic fit matches the likelihood-maximization oracle") {
  const auto o = oracle();
  const auto t = oracle_table(o);
  const auto m = glm::fit(DesignSpec::parse("y ~ x1 + x2"), t, oracle_y(o), Family::BinomialLogit);
  const auto ref = o["logit_coefficients"].get<std::vector<double>>();
  for (int j = 0; j < 3; ++j) CHECK(std::abs(m.coefficients[j] - ref[j]) < 1e-6);
  CHECK(std::abs(m.deviance - o["logit_deviance"].get<double>()) < 1e-8);
  CHECK(m.n_obs == 20);
}

TEST_CASE("gaussian identity equals the normal equations") {
  const auto o = oracle();
  const auto m = glm::fit(DesignSpec::parse("y ~ x1 + x2"), oracle_table(o), oracle_y(o), Family::GaussianIdentity);
  const auto ref = o["gaussian_coefficients"].get<std::vector<double>>();
  for (int j = 0; j < 3; ++j) CHECK(std::abs(m.coefficients[j] - ref[j]) < 1e-10);
}

TEST_CASE("predictions on held-out rows match hand evaluation") {
  const auto o = oracle();
  const auto m = glm::fit(DesignSpec::parse("y ~ x1 + x2"), oracle_table(o), oracle_y(o), Family::BinomialLogit);
  const auto held = o["held_out"];
  Table h(held.size());
  std::vector<double> a, b;
  for (const auto& r : held) {
    a.push_back(r[0].get<double>());
    b.push_back(r[1].get<double>());
  }
  h.set("x1", a);
  h.set("x2", b);
  const auto pred = glm::predict_mean(m, h);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double eta = m.coefficients[0] + m.coefficients[1] * a[i] + m.coefficients[2] * b[i];
    CHECK(std::abs(pred[i] - 1.0 / (1.0 + std::exp(-eta))) < 1e-12);
    CHECK(std::abs(pred[i] - o["held_out_mean"][i].get<double>()) < 1e-6);
  }
}

TEST_CASE("predict_mean with fixed coefficients") {
  Table t(3);
  t.set("x", {-1, 0, 4});
  glm::FittedGlm m;
  m.design = DesignSpec::parse("y ~ x");
  m.coefficients = Eigen::VectorXd::Zero(2);
  for (double p : glm::predict_mean(m, t)) CHECK(p == 0.5);
  m.design = DesignSpec::intercept_only();
  m.coefficients = Eigen::VectorXd::Constant(1, logit(0.8));
  for (double p : glm::predict_mean(m, t)) CHECK(std::abs(p - 0.8) < 1e-15);
  m.design = DesignSpec::parse("y ~ w");
  m.coefficients = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(glm::predict_mean(m, t), Error);
}

TEST_CASE("score equations hold after convergence, including fractional responses") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  const std::size_t n = 200;
  std::vector<double> z(n), x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = nd(gen);
    x[i] = ud(gen) < 0.5;
    y[i] = ud(gen) < 0.3 ? ud(gen) : static_cast<double>(ud(gen) < expit(0.3 + z[i] - x[i]));
  }
  Table t(n);
  t.set("z", z);
  t.set("x", x);
  const auto spec = DesignSpec::parse("y ~ x + z + x:z + abs(z)");
  const auto m = glm::fit(spec, t, y, Family::BinomialLogit);
  const auto X = glm::model_matrix(spec, t);
  const auto mu = glm::predict_mean(m, t);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += X(static_cast<Eigen::Index>(i), j) * (y[i] - mu[i]);
    CHECK(std::abs(s) <= 1e-8 * static_cast<double>(n));
  }
  for (double p : mu) CHECK((p > 0.0 && p < 1.0));
  CHECK(m.deviance >= 0.0);
}

TEST_CASE("row order does not change the fit") {
  const auto o = oracle();
  const auto t = oracle_table(o);
  const auto y = oracle_y(o);
  std::vector<std::size_t> perm(y.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 gen(3);
  std::shuffle(perm.begin(), perm.end(), gen);
  std::vector<double> yp;
  for (auto i : perm) yp.push_back(y[i]);
  const auto spec = DesignSpec::parse("y ~ x1 + x2");
  const auto a = glm::fit(spec, t, y, Family::BinomialLogit);
  const auto b = glm::fit(spec, t.subset(perm), yp, Family::BinomialLogit);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(a.coefficients[j] - b.coefficients[j]) < 1e-10);
}
