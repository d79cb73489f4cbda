#include "nexica/sweep.hpp"

#include "nexica/csv.hpp"
#include "nexica/error.hpp"

#include <cmath>

#include <omp.h>

namespace nexica {

std::size_t tuple_count(std::size_t stations, int max_lag) {
  if (stations < 2) return 0;
  return stations * (stations - 1) * static_cast<std::size_t>(max_lag);
}

std::size_t tuple_offset(std::size_t stations, int max_lag, std::size_t cause, std::size_t effect, int lag) {
  const std::size_t pair = cause * (stations - 1) + (effect < cause ? effect : effect - 1);
  return pair * static_cast<std::size_t>(max_lag) + static_cast<std::size_t>(lag - 1);
}

namespace {

void check(std::span<const EventIndex> stations, const SweepOptions& o) {
  if (o.max_lag < 1) throw ParameterError("max_lag must be >= 1");
  if (o.tau < 0) throw ParameterError("tau must be >= 0");
  for (const auto& s : stations) {
    if (s.length() != stations.front().length()) throw ConsistencyError("event series differ in length");
  }
}

TupleResult evaluate(std::span<const EventIndex> stations, std::size_t i, std::size_t j, int lag,
                     const SweepOptions& o) {
  TupleResult r;
  r.cause = static_cast<std::uint32_t>(i);
  r.effect = static_cast<std::uint32_t>(j);
  r.counts = count_correspondences(stations[i], stations[j], lag, o.tau, o.max_lag);
  r.estimate = estimate(r.counts);
  return r;
}

} // namespace

std::vector<TupleResult> sweep_serial(std::span<const EventIndex> stations, const SweepOptions& o) {
  check(stations, o);
  std::vector<TupleResult> out;
  out.reserve(tuple_count(stations.size(), o.max_lag));
  for (std::size_t i = 0; i < stations.size(); ++i) {
    for (std::size_t j = 0; j < stations.size(); ++j) {
      if (i == j) continue;
      for (int lag = 1; lag <= o.max_lag; ++lag) out.push_back(evaluate(stations, i, j, lag, o));
    }
  }
  return out;
}

std::vector<TupleResult> sweep_parallel(std::span<const EventIndex> stations, const SweepOptions& o, int threads) {
  check(stations, o);
  const std::size_t n = stations.size();
  std::vector<TupleResult> out(tuple_count(n, o.max_lag));
  if (out.empty()) return out;
  const auto pairs = static_cast<std::ptrdiff_t>(n * (n - 1));
  const int team = threads > 0 ? threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 16) num_threads(team)
  for (std::ptrdiff_t p = 0; p < pairs; ++p) {
    const std::size_t i = static_cast<std::size_t>(p) / (n - 1);
    const std::size_t r = static_cast<std::size_t>(p) % (n - 1);
    const std::size_t j = r < i ? r : r + 1;
    for (int lag = 1; lag <= o.max_lag; ++lag) {
      out[tuple_offset(n, o.max_lag, i, j, lag)] = evaluate(stations, i, j, lag, o);
    }
  }
  return out;
}

std::vector<PairRecord> to_records(const std::vector<TupleResult>& results, const std::vector<std::string>& ids) {
  std::vector<PairRecord> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back({ids.at(r.cause), ids.at(r.effect), r.counts, r.estimate});
  return out;
}

namespace {

void write_counts(std::ostream& out, const PairRecord& r) {
  out << r.cause << ',' << r.effect << ',' << r.counts.lag << ',' << r.counts.a00 << ',' << r.counts.a01 << ','
      << r.counts.a10 << ',' << r.counts.a11;
}

} // namespace

void write_pairs_csv(const std::string& path, const std::vector<PairRecord>& records) {
  auto out = csv::open_output(path);
  out << "cause,effect,lag,a00,a01,a10,a11\n";
  for (const auto& r : records) {
    write_counts(out, r);
    out << '\n';
  }
}

void write_mle_csv(const std::string& path, const std::vector<PairRecord>& records) {
  auto out = csv::open_output(path);
  out << "cause,effect,lag,a00,a01,a10,a11,p_s,p_c,loglik,case,p_c_raw\n";
  for (const auto& r : records) {
    const CausalEstimate e = r.estimate ? *r.estimate : estimate(r.counts);
    write_counts(out, r);
    out << ',' << csv::format_double(e.p_s) << ',' << csv::format_double(e.p_c) << ','
        << csv::format_double(e.log_likelihood) << ',' << to_string(e.kind) << ',';
    if (!std::isnan(e.p_c_raw)) out << csv::format_double(e.p_c_raw);
    out << '\n';
  }
}

std::vector<PairRecord> load_pairs_csv(const std::string& path) {
  csv::Reader reader(path);
  std::vector<PairRecord> out;
  bool first = true;
  while (reader.next()) {
    const auto& f = reader.fields();
    if (first && !f.empty() && f[0] == "cause") {
      first = false;
      continue;
    }
    first = false;
    if (f.size() != 7 && f.size() != 12) reader.fail("expected 7 or 12 columns");
    PairRecord r;
    r.cause = f[0];
    r.effect = f[1];
    r.counts.lag = static_cast<int>(reader.field_int(2));
    r.counts.a00 = reader.field_int(3);
    r.counts.a01 = reader.field_int(4);
    r.counts.a10 = reader.field_int(5);
    r.counts.a11 = reader.field_int(6);
    if (r.counts.a00 < 0 || r.counts.a01 < 0 || r.counts.a10 < 0 || r.counts.a11 < 0) {
      reader.fail("counts must be >= 0");
    }
    r.counts.window = r.counts.total();
    if (f.size() == 12) {
      CausalEstimate e;
      e.p_s = reader.field_double(7);
      e.p_c = reader.field_double(8);
      double ll = 0.0;
      if (f[9] == "-inf") {
        ll = -INFINITY;
      } else {
        ll = reader.field_double(9);
      }
      e.log_likelihood = ll;
      const auto kind = parse_estimate_case(f[10]);
      if (!kind) reader.fail("unknown estimate case '" + f[10] + "'");
      e.kind = *kind;
      e.p_c_raw = f[11].empty() ? std::nan("") : reader.field_double(11);
      r.estimate = e;
    }
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace nexica
