#include "csc/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace csc {

namespace {

double data_objective(const ConvDictionary& dict, const Tensor3& gamma, const Tensor3& x, const SparsityRule& rule) {
  const Tensor3 residual = synthesize(dict, gamma) - x;
  double obj = 0.5 * squared_norm(residual);
  if (const auto* l1 = std::get_if<L1Penalty>(&rule)) obj += l1_penalty(gamma, l1->lambda);
  return obj;
}

void check_capacity(const SparsityRule& rule, std::size_t atom_count, std::size_t coefficients) {
  if (const auto* r = std::get_if<L0InfNeedle>(&rule); r != nullptr && r->k > atom_count) {
    throw DomainError("needle budget " + std::to_string(r->k) + " exceeds atom count " + std::to_string(atom_count));
  }
  if (const auto* r = std::get_if<L0Global>(&rule); r != nullptr && r->k > coefficients) {
    throw DomainError("budget " + std::to_string(r->k) + " exceeds the " + std::to_string(coefficients) +
                      " available coefficients");
  }
}

}  // namespace

Rng derive_rng(std::uint64_t seed, SeedStream stream) {
  return Rng(seed).split(static_cast<std::uint64_t>(stream));
}

LearnResult learn_dictionary(const Tensor3& x0, const LearnConfig& cfg, Rng& rng) {
  if (cfg.atom_count == 0 || cfg.atom_size == 0) throw DomainError("atom count and size must be positive");
  if (cfg.epochs < 0 || cfg.sc_iters <= 0) throw DomainError("epochs must be >= 0 and sc_iters positive");
  if (!(cfg.learn_rate > 0.0)) throw DomainError("learn_rate must be positive");
  validate_rule(cfg.rule);

  LearnResult result;
  result.dict = ConvDictionary::random(cfg.atom_count, cfg.atom_size, x0.channels(), 1, (cfg.atom_size - 1) / 2, rng);
  const DictGeometry geo = result.dict.geometry_for_output(x0.height(), x0.width());
  check_capacity(cfg.rule, cfg.atom_count, geo.rep_height * geo.rep_width * cfg.atom_count);
  result.gamma = Tensor3(geo.rep_height, geo.rep_width, cfg.atom_count);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    PursuitConfig pc;
    pc.max_iters = cfg.sc_iters;
    pc.rule = cfg.rule;
    pc.power_iters = cfg.power_iters;
    pc.seed = rng.next_u64();
    result.gamma = pursue(result.dict, x0, pc, {}, &result.gamma).gamma;

    const Tensor3 residual = synthesize(result.dict, result.gamma) - x0;
    const double before = data_objective(result.dict, result.gamma, x0, cfg.rule);
    if (!std::isfinite(before)) throw DivergenceError(epoch, result.objective);
    const std::vector<float> grad = atom_gradient(result.dict, result.gamma, residual);

    double rate = cfg.learn_rate;
    bool accepted = false;
    for (int halving = 0; halving <= 10 && !accepted; ++halving, rate *= 0.5) {
      ConvDictionary candidate = result.dict;
      auto atoms = candidate.data();
      for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i] -= static_cast<float>(rate * grad[i]);
      candidate = normalize_atoms(candidate, rng);
      const double after = data_objective(candidate, result.gamma, x0, cfg.rule);
      if (std::isfinite(after) && after <= before * (1.0 + 1e-5)) {
        result.dict = std::move(candidate);
        result.objective.push_back(after);
        accepted = true;
      }
    }
    if (!accepted) {
      ++result.rejected_updates;
      result.objective.push_back(before);
    }
  }
  return result;
}

ConvDictionary dct_dictionary(std::size_t atom_count, std::size_t atom_size) {
  const std::size_t n = atom_size;
  if (atom_count == 0 || n == 0) throw DomainError("dct_dictionary: atom count and size must be positive");
  if (atom_count > n * n) {
    throw DomainError("dct_dictionary: at most " + std::to_string(n * n) + " atoms for size " + std::to_string(n));
  }
  // JPEG zigzag over (row frequency u, column frequency v).
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t d = 0; d + 1 < 2 * n; ++d) {
    const std::size_t u_lo = d >= n ? d - n + 1 : 0;
    const std::size_t u_hi = std::min(d, n - 1);
    if (d % 2 == 1) {
      for (std::size_t u = u_lo; u <= u_hi; ++u) order.emplace_back(u, d - u);
    } else {
      for (std::size_t u = u_hi + 1; u-- > u_lo;) order.emplace_back(u, d - u);
    }
  }

  auto basis = [n](std::size_t freq, std::size_t pos) {
    const double scale = freq == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
    return scale * std::cos(std::numbers::pi * (2.0 * static_cast<double>(pos) + 1.0) * static_cast<double>(freq) /
                            (2.0 * static_cast<double>(n)));
  };

  std::vector<float> atoms(atom_count * n * n);
  for (std::size_t k = 0; k < atom_count; ++k) {
    const auto [u, v] = order[k];
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) atoms[(k * n + a) * n + b] = static_cast<float>(basis(u, a) * basis(v, b));
    }
  }
  return ConvDictionary(atom_count, n, 1, 1, (n - 1) / 2, std::move(atoms));
}

Tensor3 noisy_observation(const Tensor3& clean, const DenoiseConfig& cfg) {
  Rng rng = derive_rng(cfg.seed, SeedStream::Noise);
  return add_awgn(clean, cfg.sigma, rng);
}

DenoiseRun denoise(const Tensor3& clean, const DenoiseConfig& cfg, const ConvDictionary& dict) {
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) throw DomainError("denoise: sigma must be positive");
  if (!(cfg.ema_decay > 0.0 && cfg.ema_decay < 1.0)) throw DomainError("denoise: ema_decay must lie in (0, 1)");
  if (cfg.iters <= 0) throw DomainError("denoise: iters must be positive");

  DenoiseRun run;
  run.noisy = noisy_observation(clean, cfg);
  run.noisy_psnr = psnr(clean, run.noisy);

  PursuitConfig pc;
  pc.max_iters = cfg.iters;
  pc.step_size = cfg.step_size;
  pc.rule = cfg.rule;
  pc.power_iters = cfg.power_iters;
  pc.seed = derive_rng(cfg.seed, SeedStream::Pursuit).next_u64();

  const bool projection = is_projection(cfg.rule);
  Tensor3 average;
  auto observe = [&](int it, const Tensor3& gamma, const Tensor3& single) {
    if (it == 1) {
      average = single;
    } else {
      for (std::size_t i = 0; i < average.size(); ++i) {
        const double prev = average[i];
        average[i] = static_cast<float>(prev + (1.0 - cfg.ema_decay) * (static_cast<double>(single[i]) - prev));
      }
    }
    if (projection && !satisfies(gamma, cfg.rule)) ++run.rule_violations;
    const double ps = psnr(clean, single);
    const double pa = psnr(clean, average);
    run.psnr_single.push_back(ps);
    run.psnr_average.push_back(pa);
    if (it == 1 || ps > run.best_single.psnr) run.best_single = {it, ps, single};
    if (it == 1 || pa > run.best_average.psnr) run.best_average = {it, pa, average};
  };

  try {
    run.pursuit = pursue(dict, run.noisy, pc, observe);
  } catch (const DivergenceError& e) {
    run.pursuit.objective = e.partial_objective();
    run.pursuit.iterations_run = static_cast<int>(e.partial_objective().size());
    throw DenoiseDivergenceError(e, std::move(run));
  }
  return run;
}

}  // namespace csc
