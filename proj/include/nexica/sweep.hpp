#pragma once

#include "nexica/correspond.hpp"
#include "nexica/mle.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nexica {

struct SweepOptions {
  int max_lag = kDefaultMaxLag;
  int tau = 0;
};

struct TupleResult {
  std::uint32_t cause = 0;
  std::uint32_t effect = 0;
  CorrespondenceCounts counts;
  CausalEstimate estimate;
};

// n (n - 1) max_lag
std::size_t tuple_count(std::size_t stations, int max_lag);

// Position of (cause, effect, lag) in sweep output; cause-major, then effect
// (skipping cause), then lag.
std::size_t tuple_offset(std::size_t stations, int max_lag, std::size_t cause, std::size_t effect, int lag);

// Reference implementation: one thread, straightforward loop nest.
std::vector<TupleResult> sweep_serial(std::span<const EventIndex> stations, const SweepOptions& options);

// OpenMP over (cause, effect) pairs. threads <= 0 uses the OpenMP default.
// Output is identical to sweep_serial.
std::vector<TupleResult> sweep_parallel(std::span<const EventIndex> stations, const SweepOptions& options,
                                        int threads = 0);

// A sweep row with station ids resolved, as stored in pairs/mle CSVs.
struct PairRecord {
  std::string cause;
  std::string effect;
  CorrespondenceCounts counts;
  std::optional<CausalEstimate> estimate;
};

std::vector<PairRecord> to_records(const std::vector<TupleResult>& results, const std::vector<std::string>& ids);

// "cause,effect,lag,a00,a01,a10,a11"
void write_pairs_csv(const std::string& path, const std::vector<PairRecord>& records);
// Pairs columns followed by "p_s,p_c,loglik,case,p_c_raw".
void write_mle_csv(const std::string& path, const std::vector<PairRecord>& records);
// Reads either layout; estimates are filled when present.
std::vector<PairRecord> load_pairs_csv(const std::string& path);

} // namespace nexica
