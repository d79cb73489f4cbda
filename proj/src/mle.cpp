#include "nexica/mle.hpp"

#include "nexica/error.hpp"

#include <cmath>
#include <limits>

namespace nexica {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double term(std::int64_t count, double f) {
  if (count == 0) return 0.0;
  if (f <= 0.0) return kNegInf;
  return static_cast<double>(count) * std::log(f);
}

void check_counts(const CorrespondenceCounts& c) {
  if (c.a00 < 0 || c.a01 < 0 || c.a10 < 0 || c.a11 < 0) throw ParameterError("correspondence counts must be >= 0");
}

} // namespace

PairProbabilities pair_probabilities(double p_s, double p_c) {
  if (!(p_s >= 0.0 && p_s <= 1.0) || !(p_c >= 0.0 && p_c <= 1.0)) {
    throw DomainError("p_s and p_c must lie in [0, 1]");
  }
  const double q = 1.0 - p_s;
  return {q * q, q * p_s, p_s * q * (1.0 - p_c), p_s * (p_s + p_c - p_s * p_c)};
}

double log_likelihood(const CorrespondenceCounts& c, double p_s, double p_c) {
  check_counts(c);
  const auto f = pair_probabilities(p_s, p_c);
  const double parts[] = {term(c.a00, f.f00), term(c.a01, f.f01), term(c.a10, f.f10), term(c.a11, f.f11)};
  double sum = 0.0;
  for (double p : parts) {
    if (p == kNegInf) return kNegInf;
    sum += p;
  }
  return sum;
}

LikelihoodGradient log_likelihood_gradient(const CorrespondenceCounts& c, double p_s, double p_c) {
  const double a00 = static_cast<double>(c.a00), a01 = static_cast<double>(c.a01);
  const double a10 = static_cast<double>(c.a10), a11 = static_cast<double>(c.a11);
  const double caused = p_s + p_c - p_s * p_c;
  const double mixed = (1.0 - 2.0 * p_s) / (p_s * (1.0 - p_s));

  LikelihoodGradient g;
  if (c.a00) g.d_ps += a00 * 2.0 / (p_s - 1.0);
  if (c.a01) g.d_ps += a01 * mixed;
  if (c.a10) {
    g.d_ps += a10 * mixed;
    g.d_pc += a10 / (p_c - 1.0);
  }
  if (c.a11) {
    g.d_ps += a11 * (-2.0 * p_s * (p_c - 1.0) + p_c) / (p_s * caused);
    g.d_pc += a11 * (1.0 - p_s) / caused;
  }
  return g;
}

std::optional<UnconstrainedEstimate> estimate_unconstrained(const CorrespondenceCounts& c) {
  check_counts(c);
  const std::int64_t ps_den = 2 * (c.a00 + c.a01) + c.a10 + c.a11;
  const std::int64_t pc_den = (2 * c.a00 + c.a01) * (c.a10 + c.a11);
  if (ps_den == 0 || pc_den == 0) return std::nullopt;
  const std::int64_t ps_num = c.a01 + c.a10 + c.a11;
  const std::int64_t pc_num = 2 * c.a00 * c.a11 + c.a01 * (c.a11 - c.a10) - c.a10 * c.a10 - c.a10 * c.a11;
  return UnconstrainedEstimate{static_cast<double>(ps_num) / static_cast<double>(ps_den),
                               static_cast<double>(pc_num) / static_cast<double>(pc_den)};
}

double edge_ps_no_causation(const CorrespondenceCounts& c) {
  const std::int64_t den = 2 * c.total();
  if (den == 0) throw ParameterError("empty correspondence table");
  return static_cast<double>(c.a01 + c.a10 + 2 * c.a11) / static_cast<double>(den);
}

double edge_ps_full_causation(const CorrespondenceCounts& c) {
  const std::int64_t den = 2 * (c.a00 + c.a01) + c.a11;
  if (den == 0) return 1.0;  // only a10 pairs remain; that edge is -inf anyway
  return static_cast<double>(c.a01 + c.a11) / static_cast<double>(den);
}

std::string to_string(EstimateCase c) {
  switch (c) {
    case EstimateCase::Interior: return "interior";
    case EstimateCase::BoundaryPc0: return "boundary_pc0";
    case EstimateCase::BoundaryPc1: return "boundary_pc1";
    case EstimateCase::Undefined: return "undefined";
  }
  return "undefined";
}

std::optional<EstimateCase> parse_estimate_case(const std::string& text) {
  for (auto c : {EstimateCase::Interior, EstimateCase::BoundaryPc0, EstimateCase::BoundaryPc1, EstimateCase::Undefined}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

CausalEstimate estimate(const CorrespondenceCounts& c) {
  check_counts(c);
  if (c.total() == 0) throw ParameterError("window must be > 0");

  CausalEstimate out;
  const bool no_cause_events = c.a10 + c.a11 == 0;
  const bool cause_always = c.a00 + c.a01 == 0;
  if (no_cause_events || cause_always) {
    out.kind = EstimateCase::Undefined;
    out.p_s = edge_ps_no_causation(c);
    out.p_c = 0.0;
    out.p_c_raw = std::nan("");
    out.log_likelihood = log_likelihood(c, out.p_s, 0.0);
    return out;
  }

  // Both denominators are positive here.
  const auto raw = *estimate_unconstrained(c);
  out.p_c_raw = raw.p_c;
  // Compare on the exact integer numerators so p_c = 0 and p_c = 1 tables
  // are classified without rounding.
  const std::int64_t pc_num = 2 * c.a00 * c.a11 + c.a01 * (c.a11 - c.a10) - c.a10 * c.a10 - c.a10 * c.a11;
  const std::int64_t pc_den = (2 * c.a00 + c.a01) * (c.a10 + c.a11);
  if (pc_num >= 0 && pc_num <= pc_den) {
    out.kind = EstimateCase::Interior;
    out.p_s = raw.p_s;
    out.p_c = raw.p_c;
    out.log_likelihood = log_likelihood(c, out.p_s, out.p_c);
    return out;
  }

  const double ps0 = edge_ps_no_causation(c);
  const double ps1 = edge_ps_full_causation(c);
  const double ll0 = log_likelihood(c, ps0, 0.0);
  const double ll1 = log_likelihood(c, ps1, 1.0);
  if (ll1 > ll0) {
    out.kind = EstimateCase::BoundaryPc1;
    out.p_s = ps1;
    out.p_c = 1.0;
    out.log_likelihood = ll1;
  } else {
    out.kind = EstimateCase::BoundaryPc0;
    out.p_s = ps0;
    out.p_c = 0.0;
    out.log_likelihood = ll0;
  }
  return out;
}

} // namespace nexica
