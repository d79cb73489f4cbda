#include "nexica/correspond.hpp"
#include "nexica/error.hpp"
#include "nexica/events.hpp"
#include "nexica/synth.hpp"
#include "unit/scratch.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace nexica;

namespace {

double rate(const Mask& m) { return static_cast<double>(std::count(m.begin(), m.end(), 1)) / static_cast<double>(m.size()); }

} // namespace

TEST_CASE("spontaneous rates sit within four standard errors") {
  const std::size_t n = 52416;
  for (double p : {0.01, 0.05, 0.1, 0.5}) {
    SynthSpec s;
    s.n_slots = n;
    s.p_s = p;
    s.n_stations = 4;
    s.seed = 42;
    const auto net = generate_network(s);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
    for (const auto& ev : net.events) CHECK(std::abs(rate(ev.events) - p) <= 4 * se);
  }
}

TEST_CASE("p_c = 0 leaves the effect independent of the cause") {
  const auto [c, e] = generate_event_pair(0.1, 0.0, 3, 52416, 5);
  const auto k = count_correspondences(EventIndex(c.events), EventIndex(e.events), 3, 0);
  const double n1 = static_cast<double>(k.a10 + k.a11);
  const double cond = static_cast<double>(k.a11) / n1;
  CHECK(std::abs(cond - 0.1) <= 4 * std::sqrt(0.09 / n1));
}

TEST_CASE("p_c = 1 fires the effect after every cause event") {
  const auto [c, e] = generate_event_pair(0.05, 1.0, 4, 20000, 6);
  for (std::size_t t = 0; t + 4 < c.events.size(); ++t) {
    if (c.events[t]) CHECK(e.events[t + 4] == 1);
  }
  const double expect = 0.05 + 0.95 * 0.05;
  CHECK(std::abs(rate(e.events) - expect) <= 4 * std::sqrt(expect * (1 - expect) / 20000.0));
}

TEST_CASE("a seed fixes the network") {
  SynthSpec s;
  s.n_slots = 5000;
  s.n_stations = 6;
  s.seed = 77;
  s.p_s_spread = 2.0;
  s.edges = random_edges(6, 8, 0.3, 0.9, 8, 77);
  const auto a = generate_network(s), b = generate_network(s);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(a.events[i].events == b.events[i].events);
    CHECK(a.station_p_s[i] == b.station_p_s[i]);
    CHECK(a.station_p_s[i] >= 0.025 - 1e-12);
    CHECK(a.station_p_s[i] <= 0.1 + 1e-12);
  }
  s.seed = 78;
  const auto c = generate_network(s);
  CHECK(c.events[0].events != a.events[0].events);
}

TEST_CASE("cyclic edge graphs are generated") {
  SynthSpec s;
  s.n_slots = 3000;
  s.n_stations = 3;
  s.edges = {{0, 1, 1, 1.0}, {1, 2, 2, 1.0}, {2, 0, 1, 0.0}};
  const auto net = generate_network(s);
  for (std::size_t t = 0; t + 3 < 3000; ++t) {
    if (net.events[0].events[t]) {
      CHECK(net.events[1].events[t + 1] == 1);
      CHECK(net.events[2].events[t + 3] == 1);
    }
  }
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec s;
  s.edges = {{0, 0, 1, 0.5}};
  CHECK_THROWS_AS(generate_network(s), ParameterError);
  s.edges = {{0, 1, 9, 0.5}};
  CHECK_THROWS_AS(generate_network(s), ParameterError);
  s.edges = {{0, 1, 1, 0.5}, {0, 1, 2, 0.5}};
  CHECK_THROWS_AS(generate_network(s), ParameterError);
  s.edges = {{0, 2, 1, 0.5}};
  CHECK_THROWS_AS(generate_network(s), ParameterError);
  s.edges = {{0, 1, 1, 1.5}};
  CHECK_THROWS_AS(generate_network(s), ParameterError);
  s.edges.clear();
  s.p_s = -0.1;
  CHECK_THROWS_AS(generate_network(s), ParameterError);
  CHECK_THROWS_AS(random_edges(3, 7, 0.1, 0.2, 8, 1), ParameterError);
}

TEST_CASE("random edges are distinct and in range") {
  const auto e = random_edges(5, 20, 0.3, 0.9, 4, 3);
  REQUIRE(e.size() == 20);
  for (const auto& x : e) {
    CHECK(x.cause != x.effect);
    CHECK(x.lag >= 1);
    CHECK(x.lag <= 4);
    CHECK(x.p_c >= 0.3);
    CHECK(x.p_c <= 0.9);
  }
}

TEST_CASE("rate error shrinks with the series length") {
  auto mean_abs_error = [](std::size_t n) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      SynthSpec s;
      s.n_slots = n;
      s.p_s = 0.1;
      s.n_stations = 1;
      s.seed = seed;
      sum += std::abs(rate(generate_network(s).events[0].events) - 0.1);
    }
    return sum / 40.0;
  };
  const double small = mean_abs_error(2000), large = mean_abs_error(32000);
  // Sixteen times the data: about a quarter of the error.
  CHECK(large < small / 2.0);
  CHECK(large > small / 8.0);
}

TEST_CASE("rendered speeds re-extract to the planted events") {
  SynthSpec s;
  s.n_slots = 16 * 2016;
  s.n_stations = 3;
  s.seed = 12;
  s.edges = {{0, 1, 2, 0.6}};
  const auto net = generate_network(s);
  const auto art = render_network(net, {}, 12);
  REQUIRE(art.speeds.series.size() == 3);
  CHECK(art.meta[1].road == "SR-2");
  CHECK(art.drive_times.size() == 3);

  Scratch dir("synth");
  write_synth_outputs(dir.path("out"), net, art);
  for (const char* f : {"speeds.csv", "meta.csv", "drive_times.csv", "events.csv", "truth.csv"}) {
    CHECK(std::filesystem::exists(dir.path("out/") + f));
  }
  const auto truth = load_truth_csv(dir.path("out/truth.csv"));
  REQUIRE(truth.size() == 1);
  CHECK(truth[0].cause_id == "S000");
  CHECK(truth[0].effect_id == "S001");
  CHECK(truth[0].lag == 2);

  const auto loaded = load_speed_csv(dir.path("out/speeds.csv"));
  const auto ev = extract_all_events(loaded, 0.25);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& got = ev.events[i].events;
    const auto& want = net.events[i].events;
    REQUIRE(got.size() == want.size());
    std::size_t hit = 0, planted = 0, spurious = 0;
    for (std::size_t t = 0; t < got.size(); ++t) {
      planted += want[t];
      hit += want[t] && got[t];
      spurious += got[t] && !want[t];
    }
    // Slowed samples can drag a week-slot median down, shifting a leading
    // edge by a slot; back-to-back events merge into one slowdown.
    CHECK(static_cast<double>(spurious) <= 0.01 * static_cast<double>(planted));
    CHECK(static_cast<double>(hit) >= 0.85 * static_cast<double>(planted));
  }
}

TEST_CASE("synth config files") {
  Scratch dir("synthcfg");
  dir.write("a.json", R"({"n_slots": 400, "n_stations": 4, "seed": 3, "edges": [{"cause": 0, "effect": 1, "lag": 2, "p_c": 0.5}],
                          "random_edges": {"count": 3}, "render": {"max_run": 2}})");
  const auto cfg = load_synth_config(dir.path("a.json"));
  CHECK(cfg.spec.n_slots == 400);
  CHECK(cfg.spec.edges.size() >= 3);
  CHECK(cfg.spec.edges[0].p_c == 0.5);
  CHECK(cfg.render.max_run == 2);
  dir.write("b.json", R"({"n_slots": 400, "edges": [{"cause": 1, "effect": 1, "lag": 2, "p_c": 0.5}]})");
  CHECK_THROWS_AS(load_synth_config(dir.path("b.json")), ParameterError);
  dir.write("c.json", "{not json");
  CHECK_THROWS_AS(load_synth_config(dir.path("c.json")), ParseError);
  dir.write("d.json", R"({"edges": [{"cause": 0}]})");
  CHECK_THROWS_AS(load_synth_config(dir.path("d.json")), FormatError);
}
