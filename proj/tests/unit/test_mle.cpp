#include "nexica/error.hpp"
#include "nexica/mle.hpp"
#include "oracles/mle_oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nexica;

namespace {

CorrespondenceCounts table(std::int64_t a00, std::int64_t a01, std::int64_t a10, std::int64_t a11) {
  CorrespondenceCounts c;
  c.a00 = a00;
  c.a01 = a01;
  c.a10 = a10;
  c.a11 = a11;
  c.lag = 1;
  c.window = a00 + a01 + a10 + a11;
  return c;
}

oracle::Table as_oracle(const CorrespondenceCounts& c) { return {c.a00, c.a01, c.a10, c.a11}; }

} // namespace

TEST_CASE("pair probabilities") {
  auto f = pair_probabilities(0.0, 0.3);
  CHECK(f.f00 == 1.0);
  CHECK(f.f01 == 0.0);
  CHECK(f.f10 == 0.0);
  CHECK(f.f11 == 0.0);
  f = pair_probabilities(1.0, 0.0);
  CHECK(f.f11 == 1.0);
  CHECK(f.f00 + f.f01 + f.f10 == 0.0);
  f = pair_probabilities(0.5, 0.5);
  CHECK(f.f00 == 0.25);
  CHECK(f.f01 == 0.25);
  CHECK(f.f10 == 0.125);
  CHECK(f.f11 == 0.375);
  CHECK_THROWS_AS(pair_probabilities(-0.1, 0.5), DomainError);
  CHECK_THROWS_AS(pair_probabilities(0.5, 1.1), DomainError);
}

TEST_CASE("probabilities sum to one over the unit square") {
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      const auto f = pair_probabilities(i / 100.0, j / 100.0);
      CHECK(std::abs(f.f00 + f.f01 + f.f10 + f.f11 - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("log likelihood values and sentinels") {
  CHECK(log_likelihood(table(1, 1, 1, 1), 0.5, 0.5) == doctest::Approx(-5.832859516931343).epsilon(1e-14));
  CHECK(log_likelihood(table(7, 0, 0, 0), 0.0, 0.4) == 0.0);
  CHECK(std::isinf(log_likelihood(table(5, 0, 0, 1), 0.0, 0.4)));
}

TEST_CASE("closed-form examples") {
  auto u = estimate_unconstrained(table(90, 0, 0, 10));
  REQUIRE(u);
  CHECK(u->p_s == doctest::Approx(10.0 / 190.0));
  CHECK(u->p_c == doctest::Approx(1.0));

  u = estimate_unconstrained(table(81, 9, 9, 1));
  REQUIRE(u);
  CHECK(u->p_s == doctest::Approx(0.1));
  CHECK(u->p_c == doctest::Approx(0.0).epsilon(1e-15));

  u = estimate_unconstrained(table(85, 5, 5, 5));
  REQUIRE(u);
  CHECK(u->p_s == doctest::Approx(15.0 / 190.0));
  CHECK(u->p_c == doctest::Approx(800.0 / 1750.0));

  CHECK_FALSE(estimate_unconstrained(table(10, 3, 0, 0)));
  CHECK_FALSE(estimate_unconstrained(table(0, 0, 2, 3)));
}

TEST_CASE("estimate cases") {
  auto e = estimate(table(90, 0, 0, 10));
  CHECK(e.kind == EstimateCase::Interior);
  CHECK(e.p_c == doctest::Approx(1.0));

  e = estimate(table(0, 0, 0, 12));
  CHECK(e.kind == EstimateCase::Undefined);

  e = estimate(table(50, 0, 50, 0));
  CHECK(e.kind == EstimateCase::BoundaryPc0);
  CHECK(e.p_c == 0.0);
  CHECK(e.p_s == doctest::Approx(0.25));
  CHECK(e.p_c_raw < 0.0);

  e = estimate(table(40, 4, 0, 0));
  CHECK(e.kind == EstimateCase::Undefined);
  CHECK(e.p_c == 0.0);
  CHECK(e.p_s == doctest::Approx(4.0 / 88.0));
  CHECK(std::isnan(e.p_c_raw));

  CHECK_THROWS_AS(estimate(CorrespondenceCounts{}), ParameterError);
}

TEST_CASE("edge maxima agree with a one-dimensional search") {
  const auto c = table(50, 0, 50, 0);
  const double ps = static_cast<double>(oracle::maximize_ps(as_oracle(c), 0.0L));
  CHECK(edge_ps_no_causation(c) == doctest::Approx(ps).epsilon(1e-9));
  const auto d = table(70, 8, 0, 9);
  CHECK(edge_ps_full_causation(d) ==
        doctest::Approx(static_cast<double>(oracle::maximize_ps(as_oracle(d), 1.0L))).epsilon(1e-9));
}

TEST_CASE("scaling every count leaves the estimate unchanged") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = table(1 + rng() % 500, rng() % 50, rng() % 50, rng() % 50);
    const std::int64_t k = 2 + static_cast<std::int64_t>(rng() % 9);
    const auto s = table(c.a00 * k, c.a01 * k, c.a10 * k, c.a11 * k);
    const auto a = estimate(c), b = estimate(s);
    CHECK(a.kind == b.kind);
    CHECK(a.p_s == doctest::Approx(b.p_s).epsilon(1e-12));
    CHECK(a.p_c == doctest::Approx(b.p_c).epsilon(1e-12));
  }
}

TEST_CASE("estimates agree with grid maximisation") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = table(1 + rng() % 2000, rng() % 200, rng() % 200, rng() % 200);
    const auto e = estimate(c);
    if (e.kind == EstimateCase::Undefined) continue;
    const auto best = oracle::grid_maximize(as_oracle(c));
    CHECK(std::abs(e.p_s - static_cast<double>(best.ps)) <= 1e-6);
    CHECK(std::abs(e.p_c - static_cast<double>(best.pc)) <= 1e-6);
  }
}

TEST_CASE("interior estimates are stationary with negative-definite curvature") {
  std::mt19937_64 rng(4);
  int seen = 0;
  for (int trial = 0; trial < 400 && seen < 100; ++trial) {
    const auto c = table(200 + rng() % 5000, 1 + rng() % 300, 1 + rng() % 300, 1 + rng() % 300);
    const auto e = estimate(c);
    if (e.kind != EstimateCase::Interior || e.p_c <= 0.0 || e.p_c >= 1.0) continue;
    ++seen;
    const auto g = log_likelihood_gradient(c, e.p_s, e.p_c);
    const double n = static_cast<double>(c.window);
    CHECK(std::abs(g.d_ps) / n <= 1e-8);
    CHECK(std::abs(g.d_pc) / n <= 1e-8);

    const auto t = as_oracle(c);
    const oracle::Real ps = e.p_s, pc = e.p_c, h = 1e-4L;
    auto L = [&](oracle::Real a, oracle::Real b) { return oracle::loglik(t, a, b); };
    const auto hss = (L(ps + h, pc) - 2 * L(ps, pc) + L(ps - h, pc)) / (h * h);
    const auto hcc = (L(ps, pc + h) - 2 * L(ps, pc) + L(ps, pc - h)) / (h * h);
    const auto hsc = (L(ps + h, pc + h) - L(ps + h, pc - h) - L(ps - h, pc + h) + L(ps - h, pc - h)) / (4 * h * h);
    CHECK(hcc < 0);
    CHECK(hss * hcc - hsc * hsc > 0);
  }
  CHECK(seen >= 50);
}

TEST_CASE("analytic gradient matches finite differences away from the optimum") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = table(1 + rng() % 3000, 1 + rng() % 200, 1 + rng() % 200, 1 + rng() % 200);
    const double ps = 0.05 + 0.9 * std::uniform_real_distribution<double>()(rng);
    const double pc = 0.05 + 0.9 * std::uniform_real_distribution<double>()(rng);
    const auto g = log_likelihood_gradient(c, ps, pc);
    const auto t = as_oracle(c);
    const auto ds = oracle::derivative([&](oracle::Real x) { return oracle::loglik(t, x, pc); }, ps, 1e-5L);
    const auto dc = oracle::derivative([&](oracle::Real x) { return oracle::loglik(t, ps, x); }, pc, 1e-5L);
    CHECK(std::abs(g.d_ps - static_cast<double>(ds)) <= 1e-5 * std::max(1.0, std::abs(g.d_ps)));
    CHECK(std::abs(g.d_pc - static_cast<double>(dc)) <= 1e-5 * std::max(1.0, std::abs(g.d_pc)));
  }
}

TEST_CASE("case names round-trip") {
  for (auto c : {EstimateCase::Interior, EstimateCase::BoundaryPc0, EstimateCase::BoundaryPc1, EstimateCase::Undefined}) {
    CHECK(parse_estimate_case(to_string(c)) == c);
  }
  CHECK_FALSE(parse_estimate_case("sideways"));
}
