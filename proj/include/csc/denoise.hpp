#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "csc/conv_dictionary.hpp"
#include "csc/errors.hpp"
#include "csc/pursuit.hpp"
#include "csc/sparsify.hpp"
#include "csc/tensor.hpp"

namespace csc {

/// Alternating minimization of 0.5 ||D g - x||^2 over codes and atoms.
struct LearnConfig {
  std::size_t atom_count = 64;
  std::size_t atom_size = 8;
  SparsityRule rule = L0InfNeedle{4};
  int epochs = 10;
  double learn_rate = 1e-3;
  /// Pursuit iterations per epoch (warm-started from the previous code).
  int sc_iters = 5;
  int power_iters = 20;
};

struct LearnResult {
  ConvDictionary dict;
  Tensor3 gamma;
  /// Pursuit objective after each epoch's atom update.
  std::vector<double> objective;
  /// Atom steps rejected after exhausting the backtracking budget.
  int rejected_updates = 0;
};

/// Starts from seeded random unit atoms (stride 1, padding (n-1)/2). Each
/// epoch runs cfg.sc_iters pursuit steps with the atoms fixed, then one
/// gradient step on the atoms followed by renormalization. The atom step is
/// halved up to 10 times until the objective does not rise by more than
/// 1e-5 relative; if it still rises the step is skipped.
LearnResult learn_dictionary(const Tensor3& x0, const LearnConfig& cfg, Rng& rng);

/// First `atom_count` separable 2-D DCT-II atoms of an n x n block in JPEG
/// zigzag order. Single channel, stride 1, padding (n-1)/2; orthonormal.
ConvDictionary dct_dictionary(std::size_t atom_count, std::size_t atom_size);

struct DenoiseConfig {
  double sigma = 25.0;
  SparsityRule rule = L0InfNeedle{4};
  int iters = 50;
  /// Weight of the previous average in the exponential moving average.
  double ema_decay = 0.99;
  std::optional<double> step_size;
  int power_iters = 50;
  std::uint64_t seed = 0;
};

struct BestImage {
  int iter = 0;
  double psnr = 0.0;
  Tensor3 image;
};

struct DenoiseRun {
  Tensor3 noisy;
  double noisy_psnr = 0.0;
  /// Entry t-1 belongs to iteration t.
  std::vector<double> psnr_single;
  std::vector<double> psnr_average;
  BestImage best_single;
  BestImage best_average;
  PursuitTrace pursuit;
  /// Iterates that broke a projection rule; 0 for a correct solver.
  std::size_t rule_violations = 0;
};

/// Seed split used for the noise stream and for learning.
enum class SeedStream : std::uint64_t { Noise = 1, Learning = 2, Pursuit = 3 };
Rng derive_rng(std::uint64_t seed, SeedStream stream);

/// x0 = clean + AWGN(sigma) drawn from the run seed's noise stream.
Tensor3 noisy_observation(const Tensor3& clean, const DenoiseConfig& cfg);

/// Fits codes over `dict` to the noisy observation with the configured
/// pursuit. After iteration t the single output is D g_t and the average is
///   avg_1 = D g_1,  avg_t = decay * avg_{t-1} + (1 - decay) * D g_t.
/// Both are scored against `clean`; the best of each (earliest on ties) is
/// kept.
DenoiseRun denoise(const Tensor3& clean, const DenoiseConfig& cfg, const ConvDictionary& dict);

/// Solver divergence during denoise(); carries everything recorded so far.
class DenoiseDivergenceError : public DivergenceError {
 public:
  DenoiseDivergenceError(const DivergenceError& cause, DenoiseRun partial)
      : DivergenceError(cause), partial_(std::move(partial)) {}
  const DenoiseRun& partial_run() const noexcept { return partial_; }

 private:
  DenoiseRun partial_;
};

}  // namespace csc
