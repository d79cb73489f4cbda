#pragma once

#include "nexica/correspond.hpp"

#include <optional>
#include <string>

namespace nexica {

// Probabilities of the four (cause, effect) slot pairings under the
// spontaneous/caused event model.
struct PairProbabilities {
  double f00 = 0.0;
  double f01 = 0.0;
  double f10 = 0.0;
  double f11 = 0.0;
};

PairProbabilities pair_probabilities(double p_s, double p_c);

// Sum of A_ij * ln f_ij with 0 * ln 0 taken as 0. Returns -infinity when a
// pairing with a nonzero count has probability zero.
double log_likelihood(const CorrespondenceCounts& counts, double p_s, double p_c);

struct LikelihoodGradient {
  double d_ps = 0.0;
  double d_pc = 0.0;
};

// Analytic partial derivatives of the log likelihood, assembled term by term
// from d ln f_ij / dp. Only valid where every f_ij with nonzero count is > 0.
LikelihoodGradient log_likelihood_gradient(const CorrespondenceCounts& counts, double p_s, double p_c);

struct UnconstrainedEstimate {
  double p_s = 0.0;
  double p_c = 0.0;
};

// Stationary point of the log likelihood, which may fall outside [0,1].
// Empty when either closed-form denominator is zero.
std::optional<UnconstrainedEstimate> estimate_unconstrained(const CorrespondenceCounts& counts);

// Maximiser of p_s along the p_c = 0 and p_c = 1 edges.
double edge_ps_no_causation(const CorrespondenceCounts& counts);
double edge_ps_full_causation(const CorrespondenceCounts& counts);

enum class EstimateCase { Interior, BoundaryPc0, BoundaryPc1, Undefined };

std::string to_string(EstimateCase c);
std::optional<EstimateCase> parse_estimate_case(const std::string& text);

struct CausalEstimate {
  double p_s = 0.0;
  double p_c = 0.0;
  double p_c_raw = 0.0;  // unconstrained closed form; NaN when undefined
  double log_likelihood = 0.0;
  EstimateCase kind = EstimateCase::Undefined;
};

// Constrained maximum-likelihood (p_s, p_c):
//  1. take the closed-form stationary point if it lies in [0,1]^2;
//  2. otherwise take the better of the p_c = 0 and p_c = 1 edge maxima
//     (ties go to p_c = 0).
// Without cause events, or with a cause event in every compared slot, p_c is
// not identifiable: the result is Undefined with p_c = 0 and p_s from the
// p_c = 0 edge.
CausalEstimate estimate(const CorrespondenceCounts& counts);

} // namespace nexica
