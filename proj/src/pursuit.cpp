#include "csc/pursuit.hpp"

#include <cmath>

#include "csc/errors.hpp"
#include "csc/kernels.hpp"

namespace csc {

namespace {

// Writes D * gamma into `synthesis` and returns the objective. The data term
// comes from the kernel's double sums rather than the rounded synthesis, so
// it is not swamped by float rounding near convergence.
double synthesize_objective(const ConvDictionary& dict, const Tensor3& gamma, const Tensor3& x,
                            const SparsityRule& rule, Tensor3& synthesis) {
  double obj = parallel::synthesize_residual(dict, gamma, x, synthesis);
  if (const auto* l1 = std::get_if<L1Penalty>(&rule)) obj += l1_penalty(gamma, l1->lambda);
  return obj;
}

// Shared proximal/projected gradient loop:
//   g <- apply_rule(g - t * D^T (D g - x), rule, t)
PursuitTrace run(const ConvDictionary& dict, const Tensor3& x, const PursuitConfig& cfg,
                 const IterateObserver& observer, const Tensor3* warm_start) {
  validate_rule(cfg.rule);
  if (cfg.max_iters < 0) throw DomainError("max_iters must be >= 0");
  if (x.channels() != dict.channels()) {
    throw ShapeError("signal has " + std::to_string(x.channels()) + " channels, atoms have " +
                     std::to_string(dict.channels()));
  }
  const DictGeometry geo = dict.geometry_for_output(x.height(), x.width());

  PursuitTrace trace;
  if (cfg.step_size) {
    if (!(*cfg.step_size > 0.0) || !std::isfinite(*cfg.step_size)) throw DomainError("step size must be positive");
    trace.step = *cfg.step_size;
  } else {
    Rng rng = Rng(cfg.seed).split(0x5157);
    trace.lipschitz = estimate_lipschitz(dict, geo.rep_height, geo.rep_width, cfg.power_iters, rng);
    trace.step = 0.99 / trace.lipschitz;
  }

  Tensor3 gamma(geo.rep_height, geo.rep_width, dict.atom_count());
  if (warm_start != nullptr) {
    require_same_shape(gamma, *warm_start, "warm start");
    gamma = *warm_start;
  }
  Tensor3 synthesis(geo.out_height, geo.out_width, dict.channels());
  trace.initial_objective = synthesize_objective(dict, gamma, x, cfg.rule, synthesis);
  double previous = trace.initial_objective;

  const auto step = static_cast<float>(trace.step);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    Tensor3 grad = adjoint(dict, synthesis - x);
    grad *= -step;
    gamma += grad;
    gamma = apply_rule(gamma, cfg.rule, trace.step);
    const double obj = synthesize_objective(dict, gamma, x, cfg.rule, synthesis);
    if (!std::isfinite(obj)) throw DivergenceError(it, trace.objective);
    trace.objective.push_back(obj);
    trace.iterations_run = it;
    if (observer) observer(it, gamma, synthesis);

    if (cfg.objective_tol > 0.0 && previous - obj < cfg.objective_tol) {
      trace.stop = StopReason::ObjectiveTol;
      break;
    }
    previous = obj;
  }
  trace.gamma = std::move(gamma);
  return trace;
}

}  // namespace

double estimate_lipschitz(const ConvDictionary& dict, std::size_t rep_height, std::size_t rep_width, int iters,
                          Rng& rng) {
  if (iters <= 0) throw DomainError("power iteration count must be positive");
  dict.geometry_for_rep(rep_height, rep_width);
  Tensor3 v = random_gaussian(rep_height, rep_width, dict.atom_count(), rng);
  v *= static_cast<float>(1.0 / norm(v));
  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    Tensor3 w = adjoint(dict, synthesize(dict, v));
    estimate = norm(w);
    if (!(estimate > 0.0)) throw DomainError("dictionary operator is zero; no Lipschitz step exists");
    w *= static_cast<float>(1.0 / estimate);
    v = std::move(w);
  }
  return estimate;
}

PursuitTrace ista(const ConvDictionary& dict, const Tensor3& x, const PursuitConfig& cfg,
                  const IterateObserver& observer, const Tensor3* warm_start) {
  if (!std::holds_alternative<L1Penalty>(cfg.rule)) throw DomainError("ista needs an l1 rule");
  return run(dict, x, cfg, observer, warm_start);
}

PursuitTrace iht(const ConvDictionary& dict, const Tensor3& x, const PursuitConfig& cfg,
                 const IterateObserver& observer, const Tensor3* warm_start) {
  if (!is_projection(cfg.rule)) throw DomainError("iht needs an l0 or l0inf rule");
  return run(dict, x, cfg, observer, warm_start);
}

PursuitTrace pursue(const ConvDictionary& dict, const Tensor3& x, const PursuitConfig& cfg,
                    const IterateObserver& observer, const Tensor3* warm_start) {
  return run(dict, x, cfg, observer, warm_start);
}

std::vector<Tensor3> layered_thresholding(const MlCscModel& model, const Tensor3& x) {
  std::vector<Tensor3> codes;
  codes.reserve(model.depth());
  const Tensor3* input = &x;
  for (std::size_t i = 1; i <= model.depth(); ++i) {
    const auto& layer = model.layer(i);
    Tensor3 correlation;
    try {
      correlation = adjoint(layer.dict, *input);
    } catch (const std::invalid_argument& e) {
      throw CascadeGeometryError(i, e.what());
    }
    codes.push_back(apply_rule(correlation, layer.rule, 1.0));
    input = &codes.back();
  }
  return codes;
}

}  // namespace csc
