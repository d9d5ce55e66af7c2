#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "csc/conv_dictionary.hpp"
#include "csc/mlcsc.hpp"
#include "csc/sparsify.hpp"
#include "csc/tensor.hpp"

namespace csc {

struct PursuitConfig {
  int max_iters = 100;
  /// Gradient step; empty means 0.99 / L with L from estimate_lipschitz().
  std::optional<double> step_size;
  SparsityRule rule = L1Penalty{0.1};
  /// Stop once an iteration lowers the objective by less than this. 0 disables.
  double objective_tol = 0.0;
  int power_iters = 50;
  /// Seeds the power iteration when the step is automatic.
  std::uint64_t seed = 0;
};

enum class StopReason { MaxIters, ObjectiveTol };

struct PursuitTrace {
  /// Objective after each iteration: 0.5 ||D g - x||^2, plus lambda ||g||_1
  /// for the l1 rule.
  std::vector<double> objective;
  /// Objective of the starting point (zero unless warm-started).
  double initial_objective = 0.0;
  Tensor3 gamma;
  int iterations_run = 0;
  double step = 0.0;
  /// Estimated largest eigenvalue of D^T D; 0 when the step was given.
  double lipschitz = 0.0;
  StopReason stop = StopReason::MaxIters;
};

/// Called after every iteration with the 1-based iteration number, the new
/// code and its synthesis D * gamma.
using IterateObserver = std::function<void(int iteration, const Tensor3& gamma, const Tensor3& synthesis)>;

/// Largest eigenvalue of D^T D over rep_height x rep_width codes, by power
/// iteration from a seeded Gaussian start. Returns ||D^T D v|| for the final
/// unit iterate v.
double estimate_lipschitz(const ConvDictionary& dict, std::size_t rep_height, std::size_t rep_width, int iters,
                          Rng& rng);

/// Proximal gradient on 0.5 ||D g - x||^2 + lambda ||g||_1. cfg.rule must be
/// L1Penalty.
PursuitTrace ista(const ConvDictionary& dict, const Tensor3& x, const PursuitConfig& cfg,
                  const IterateObserver& observer = {}, const Tensor3* warm_start = nullptr);

/// Projected gradient (iterative hard thresholding) under an L0Global or
/// L0InfNeedle rule. Every iterate satisfies the rule.
PursuitTrace iht(const ConvDictionary& dict, const Tensor3& x, const PursuitConfig& cfg,
                 const IterateObserver& observer = {}, const Tensor3* warm_start = nullptr);

/// ista() or iht() depending on the rule.
PursuitTrace pursue(const ConvDictionary& dict, const Tensor3& x, const PursuitConfig& cfg,
                    const IterateObserver& observer = {}, const Tensor3* warm_start = nullptr);

/// One-pass multi-layer encoder: g_1 = P_1(D_1^T x), g_i = P_i(D_i^T g_{i-1}).
/// L1 rules soft-threshold with their lambda directly. Returns g_1..g_L.
std::vector<Tensor3> layered_thresholding(const MlCscModel& model, const Tensor3& x);

}  // namespace csc
