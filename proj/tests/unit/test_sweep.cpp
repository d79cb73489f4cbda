#include "nexica/error.hpp"
#include "nexica/sweep.hpp"
#include "unit/scratch.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nexica;

namespace {

std::vector<EventIndex> random_stations(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EventIndex> out;
  for (std::size_t k = 0; k < n; ++k) {
    Mask mask(m);
    const double p = 0.02 + 0.1 * static_cast<double>(k % 4);
    for (auto& b : mask) b = std::bernoulli_distribution(p)(rng);
    out.emplace_back(mask);
  }
  return out;
}

bool same(const CausalEstimate& a, const CausalEstimate& b) {
  auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  return a.kind == b.kind && eq(a.p_s, b.p_s) && eq(a.p_c, b.p_c) && eq(a.p_c_raw, b.p_c_raw) &&
         eq(a.log_likelihood, b.log_likelihood);
}

} // namespace

TEST_CASE("tuple bookkeeping") {
  CHECK(tuple_count(195, 8) == 302640);
  CHECK(tuple_offset(3, 2, 0, 1, 1) == 0);
  CHECK(tuple_offset(3, 2, 0, 2, 2) == 3);
  CHECK(tuple_offset(3, 2, 2, 1, 2) == 11);
}

TEST_CASE("parallel sweep equals the serial reference") {
  const auto st = random_stations(9, 700, 1);
  for (int tau : {0, 1, 2}) {
    SweepOptions o{8, tau};
    const auto ref = sweep_serial(st, o);
    REQUIRE(ref.size() == tuple_count(9, 8));
    for (int threads : {1, 2, 4}) {
      const auto par = sweep_parallel(st, o, threads);
      REQUIRE(par.size() == ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) {
        CHECK(par[k].cause == ref[k].cause);
        CHECK(par[k].effect == ref[k].effect);
        CHECK(par[k].counts == ref[k].counts);
        CHECK(same(par[k].estimate, ref[k].estimate));
      }
    }
  }
}

TEST_CASE("sweep order is cause-major, then effect, then lag") {
  const auto st = random_stations(4, 100, 2);
  const auto r = sweep_serial(st, {3, 0});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      for (int lag = 1; lag <= 3; ++lag) {
        const auto& t = r[tuple_offset(4, 3, i, j, lag)];
        CHECK(t.cause == i);
        CHECK(t.effect == j);
        CHECK(t.counts.lag == lag);
      }
    }
  }
}

TEST_CASE("sweep rejects bad options and mismatched stations") {
  const auto st = random_stations(3, 50, 3);
  CHECK_THROWS_AS(sweep_serial(st, {0, 0}), ParameterError);
  CHECK_THROWS_AS(sweep_parallel(st, {8, -1}), ParameterError);
  std::vector<EventIndex> uneven = {EventIndex(Mask(50, 0)), EventIndex(Mask(49, 0))};
  CHECK_THROWS_AS(sweep_serial(uneven, {2, 0}), ConsistencyError);
}

TEST_CASE("pairs and mle CSVs round-trip") {
  Scratch s("sweep");
  const auto st = random_stations(4, 300, 4);
  const auto recs = to_records(sweep_serial(st, {8, 1}), {"a", "b", "c", "d"});
  write_pairs_csv(s.path("pairs.csv"), recs);
  const auto pairs = load_pairs_csv(s.path("pairs.csv"));
  REQUIRE(pairs.size() == recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    CHECK(pairs[k].cause == recs[k].cause);
    CHECK(pairs[k].counts.a11 == recs[k].counts.a11);
    CHECK(pairs[k].counts.a00 == recs[k].counts.a00);
    CHECK_FALSE(pairs[k].estimate);
  }
  write_mle_csv(s.path("mle.csv"), recs);
  const auto mle = load_pairs_csv(s.path("mle.csv"));
  REQUIRE(mle.size() == recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    REQUIRE(mle[k].estimate);
    CHECK(same(*mle[k].estimate, *recs[k].estimate));
  }
  write_mle_csv(s.path("mle2.csv"), mle);
  CHECK(slurp(s.path("mle.csv")) == slurp(s.path("mle2.csv")));
}
