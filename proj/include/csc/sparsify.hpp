#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "csc/tensor.hpp"

namespace csc {

/// lambda * ||gamma||_1 added to the loss; solved through its prox.
struct L1Penalty {
  double lambda = 0.0;
  bool operator==(const L1Penalty&) const = default;
};

/// At most k nonzeros in the whole representation.
struct L0Global {
  std::size_t k = 0;
  bool operator==(const L0Global&) const = default;
};

/// At most k nonzeros in every needle (the 1x1xC fiber at each position).
/// This is the per-needle relaxation of the l0,inf constraint, not its exact
/// projection.
struct L0InfNeedle {
  std::size_t k = 0;
  bool operator==(const L0InfNeedle&) const = default;
};

using SparsityRule = std::variant<L1Penalty, L0Global, L0InfNeedle>;

/// Throws DomainError for a negative or non-finite lambda.
void validate_rule(const SparsityRule& rule);
bool is_projection(const SparsityRule& rule);
/// "l1(lambda=0.1)", "l0(k=12)", "l0inf(k=4)".
std::string describe(const SparsityRule& rule);

/// Keep the k largest-magnitude entries; ties go to the lower linear index.
Tensor3 project_l0_global(const Tensor3& gamma, std::size_t k);
/// project_l0_global applied to each needle independently with budget k.
Tensor3 project_l0inf_needle(const Tensor3& gamma, std::size_t k);
/// sign(g) * max(|g| - tau, 0) elementwise.
Tensor3 soft_threshold(const Tensor3& gamma, double tau);
double l1_penalty(const Tensor3& gamma, double lambda);

/// Projection for L0 rules, soft threshold with tau = lambda * step for L1.
Tensor3 apply_rule(const Tensor3& gamma, const SparsityRule& rule, double step = 1.0);

struct SparsityReport {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t total_nnz = 0;
  double global_nnz_fraction = 0.0;
  /// Row-major H x W fractions of nonzero channels per needle.
  std::vector<double> needle_nnz_map;
  std::size_t max_needle_nnz = 0;

  double needle_fraction(std::size_t h, std::size_t w) const { return needle_nnz_map[h * width + w]; }
};

/// An entry counts as nonzero iff |value| > zero_tol.
SparsityReport sparsity_report(const Tensor3& gamma, double zero_tol = 0.0);

/// Whether `gamma` satisfies a projection rule exactly (L1 rules always pass).
bool satisfies(const Tensor3& gamma, const SparsityRule& rule);

}  // namespace csc
