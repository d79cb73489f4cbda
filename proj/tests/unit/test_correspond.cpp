#include "nexica/correspond.hpp"
#include "nexica/error.hpp"
#include "nexica/events.hpp"
#include "oracles/correspondence_oracle.hpp"

#include <doctest.h>

#include <random>

using namespace nexica;

namespace {

CorrespondenceCounts count(const Mask& c, const Mask& e, int lag, int tau = 0) {
  return count_correspondences(EventIndex(c), EventIndex(e), lag, tau);
}

Mask random_mask(std::mt19937_64& rng, std::size_t n, double p) {
  Mask m(n);
  for (auto& b : m) b = std::bernoulli_distribution(p)(rng);
  return m;
}

} // namespace

TEST_CASE("worked examples") {
  auto c = count({1, 0, 1, 0}, {0, 1, 0, 0}, 1);
  CHECK(c.a00 == 1);
  CHECK(c.a01 == 0);
  CHECK(c.a10 == 1);
  CHECK(c.a11 == 1);
  CHECK(c.window == 3);

  c = count({1, 0, 0}, {0, 1, 0}, 1);
  CHECK(c.a11 == 1);
  CHECK(c.a10 == 0);
  CHECK(c.a01 == 0);
  CHECK(c.a00 == 1);

  c = count(Mask(20, 0), Mask(20, 0), 5);
  CHECK(c.a00 == c.window);
  CHECK(c.window == 15);
}

TEST_CASE("tolerance matches each cause event at most once") {
  // Two causes compete for one effect inside both bands.
  const Mask cause{1, 1, 0, 0, 0, 0};
  const Mask effect{0, 0, 1, 0, 0, 0};
  const auto c = count(cause, effect, 1, 1);
  CHECK(c.a11 == 1);
  CHECK(c.a10 == 1);
  CHECK(c.window == 4);
  CHECK(c.a00 + c.a01 + c.a10 + c.a11 == c.window);
}

TEST_CASE("argument errors") {
  const Mask a(10, 0), b(11, 0);
  CHECK_THROWS_AS(count(a, b, 1), ConsistencyError);
  CHECK_THROWS_AS(count(a, a, 0), ParameterError);
  CHECK_THROWS_AS(count(a, a, 9), ParameterError);
  CHECK_THROWS_AS(count(a, a, 2, -1), ParameterError);
  CHECK_THROWS_AS(count(Mask(5, 0), Mask(5, 0), 3, 2), ParameterError);
  CHECK_NOTHROW(count_correspondences(EventIndex(a), EventIndex(a), 9, 0, 9));
}

TEST_CASE("EventIndex range counts") {
  const EventIndex idx(Mask{1, 0, 1, 1, 0, 1});
  CHECK(idx.count_in(0, 6) == 4);
  CHECK(idx.count_in(1, 3) == 1);
  CHECK(idx.count_in(3, 3) == 0);
  CHECK(idx.test(2));
  CHECK_FALSE(idx.test(4));
}

TEST_CASE("random inputs agree with slot enumeration") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t m = 12 + rng() % 53;
    const double p = (1 + rng() % 60) / 100.0;
    const auto c = random_mask(rng, m, p);
    const auto e = random_mask(rng, m, p);
    const int lag = 1 + static_cast<int>(rng() % 8);
    const int tau = static_cast<int>(rng() % 3);
    const auto got = count(c, e, lag, tau);
    const auto want = oracle::correspondences(c, e, lag, tau);
    CHECK(got.a00 == want.a00);
    CHECK(got.a01 == want.a01);
    CHECK(got.a10 == want.a10);
    CHECK(got.a11 == want.a11);
    CHECK(got.window == want.window);
    if (tau == 0) {
      const auto pairs = oracle::aligned_pairs(c, e, lag);
      CHECK(got.a11 == pairs.a11);
      CHECK(got.a01 == pairs.a01);
    }
  }
}

TEST_CASE("a11 never decreases as tolerance grows") {
  // The window shrinks by one slot per unit of tau, so a cause event in the
  // last slots can leave it; keep the cause quiet there.
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 30 + rng() % 200;
    auto c = random_mask(rng, m, 0.2);
    const auto e = random_mask(rng, m, 0.2);
    std::fill(c.end() - 16, c.end(), 0);
    const int lag = 1 + static_cast<int>(rng() % 8);
    std::int64_t prev = -1;
    for (int tau = 0; tau <= 6; ++tau) {
      const auto a11 = count(c, e, lag, tau).a11;
      CHECK(a11 >= prev);
      prev = a11;
    }
  }
}

TEST_CASE("trailing quiet slots only grow a00") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 20 + rng() % 40;
    auto c = random_mask(rng, m, 0.3);
    auto e = random_mask(rng, m, 0.3);
    const int lag = 1 + static_cast<int>(rng() % 8);
    const int tau = static_cast<int>(rng() % 3);
    const auto before = count(c, e, lag, tau);
    const std::size_t extra = 1 + rng() % 10;
    c.resize(m + extra, 0);
    e.resize(m + extra, 0);
    const auto after = count(c, e, lag, tau);
    CHECK(after.window == before.window + static_cast<std::int64_t>(extra));
    CHECK(after.a11 >= before.a11);
    CHECK(after.a00 + after.a01 + after.a10 + after.a11 == after.window);
  }
  // With a quiet tail longer than lag + tau on both sides, appending more
  // quiet slots changes a00 alone.
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 20 + rng() % 40;
    auto c = random_mask(rng, m, 0.3);
    auto e = random_mask(rng, m, 0.3);
    c.resize(m + 12, 0);
    e.resize(m + 12, 0);
    const int lag = 1 + static_cast<int>(rng() % 8);
    const int tau = static_cast<int>(rng() % 3);
    const auto before = count(c, e, lag, tau);
    c.resize(c.size() + 7, 0);
    e.resize(e.size() + 7, 0);
    const auto after = count(c, e, lag, tau);
    CHECK(after.a00 == before.a00 + 7);
    CHECK(after.a01 == before.a01);
    CHECK(after.a10 == before.a10);
    CHECK(after.a11 == before.a11);
  }
}
