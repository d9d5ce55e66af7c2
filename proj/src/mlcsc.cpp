#include "csc/mlcsc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "csc/errors.hpp"

namespace csc {

MlCscModel::MlCscModel(std::vector<MlCscLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DomainError("a cascade needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    validate_rule(layers_[i].rule);
    if (i == 0) continue;
    const auto& shallow = layers_[i - 1].dict;
    const auto& deep = layers_[i].dict;
    if (deep.channels() != shallow.atom_count()) {
      throw CascadeGeometryError(i + 1, "atoms have " + std::to_string(deep.channels()) +
                                            " channels but layer " + std::to_string(i) + " has " +
                                            std::to_string(shallow.atom_count()) + " atoms");
    }
  }
}

CascadeOutput synthesize_cascade_all(const MlCscModel& model, const Tensor3& deepest) {
  const std::size_t depth = model.depth();
  CascadeOutput out;
  out.gammas.resize(depth);
  out.gammas[depth - 1] = deepest;
  for (std::size_t i = depth; i >= 1; --i) {
    const auto& dict = model.layer(i).dict;
    const Tensor3& code = out.gammas[i - 1];
    if (code.channels() != dict.atom_count()) {
      throw CascadeGeometryError(i, "code has " + std::to_string(code.channels()) + " channels, dictionary has " +
                                        std::to_string(dict.atom_count()) + " atoms");
    }
    Tensor3 next;
    try {
      next = synthesize(dict, code);
    } catch (const GeometryError& e) {
      throw CascadeGeometryError(i, e.what());
    }
    if (i == 1) {
      out.image = std::move(next);
    } else {
      out.gammas[i - 2] = std::move(next);
    }
  }
  return out;
}

Tensor3 synthesize_cascade(const MlCscModel& model, const Tensor3& deepest) {
  return synthesize_cascade_all(model, deepest).image;
}

ConvDictionary effective_dictionary(const MlCscModel& model, std::size_t depth) {
  if (depth < 1 || depth > model.depth()) {
    throw DomainError("effective_dictionary: depth " + std::to_string(depth) + " outside 1.." +
                      std::to_string(model.depth()));
  }
  if (depth == 1) return model.layer(1).dict;

  std::size_t n_eff = model.layer(1).dict.atom_size();
  std::size_t s_eff = model.layer(1).dict.stride();
  std::size_t p_eff = model.layer(1).dict.padding();
  std::vector<MlCscLayer> unpadded;
  unpadded.push_back({model.layer(1).dict.with_padding(0), model.layer(1).rule});
  for (std::size_t i = 2; i <= depth; ++i) {
    const auto& d = model.layer(i).dict;
    n_eff += (d.atom_size() - 1) * s_eff;
    p_eff += d.padding() * s_eff;
    s_eff *= d.stride();
    unpadded.push_back({d.with_padding(0), model.layer(i).rule});
  }
  const MlCscModel prefix(std::move(unpadded));

  const std::size_t m = model.layer(depth).dict.atom_count();
  const std::size_t c = model.layer(1).dict.channels();
  std::vector<float> atoms(m * n_eff * n_eff * c);
  for (std::size_t k = 0; k < m; ++k) {
    Tensor3 impulse(1, 1, m);
    impulse(0, 0, k) = 1.0f;
    const Tensor3 response = synthesize_cascade(prefix, impulse);
    if (response.height() != n_eff || response.width() != n_eff) {
      throw GeometryError("impulse response " + response.shape_string() + " disagrees with support law n_eff=" +
                          std::to_string(n_eff));
    }
    std::copy(response.values().begin(), response.values().end(),
              atoms.begin() + static_cast<std::ptrdiff_t>(k * n_eff * n_eff * c));
  }
  return ConvDictionary(m, n_eff, c, s_eff, p_eff, std::move(atoms));
}

bool ValidationReport::all_consistent() const {
  return std::all_of(layers.begin(), layers.end(), [](const LayerCheck& l) { return l.consistency_ok; });
}

bool ValidationReport::all_sparse() const {
  return std::all_of(layers.begin(), layers.end(), [](const LayerCheck& l) { return l.sparsity_ok; });
}

ValidationReport validate(const MlCscModel& model, const std::vector<Tensor3>& gammas) {
  if (gammas.size() != model.depth()) {
    throw ShapeError("validate: got " + std::to_string(gammas.size()) + " codes for a " +
                     std::to_string(model.depth()) + "-layer model");
  }
  ValidationReport report;
  for (std::size_t i = 1; i <= model.depth(); ++i) {
    const Tensor3& code = gammas[i - 1];
    const SparsityRule& rule = model.layer(i).rule;
    LayerCheck check;
    check.layer = i;
    check.rule = describe(rule);
    const SparsityReport sr = sparsity_report(code);
    check.nnz = sr.total_nnz;
    check.max_needle_nnz = sr.max_needle_nnz;
    check.l1_mass = l1_penalty(code, 1.0);
    if (is_projection(rule)) {
      check.sparsity_checked = true;
      check.sparsity_ok = satisfies(code, rule);
    }
    if (i < model.depth()) {
      check.consistency_checked = true;
      const Tensor3 expected = synthesize(model.layer(i + 1).dict, gammas[i]);
      if (!expected.same_shape(code)) {
        check.consistency_ok = false;
        check.consistency_rel_error = std::numeric_limits<double>::infinity();
      } else {
        const double scale = std::max(norm(expected), 1e-12);
        check.consistency_rel_error = norm(expected - code) / scale;
        check.consistency_ok = check.consistency_rel_error <= 1e-4;
      }
    }
    report.layers.push_back(check);
  }
  return report;
}

SparseSample sample_sparse(std::size_t height, std::size_t width, std::size_t channels, const SparsityRule& rule,
                           std::uint64_t seed) {
  if (!is_projection(rule)) throw DomainError("sample_sparse: an l1 penalty defines no support budget");
  Rng rng(seed);
  SparseSample sample{Tensor3(height, width, channels), 0, seed};

  auto draw = [&rng]() {
    double v = 0.0;
    while (v == 0.0 || static_cast<float>(v) == 0.0f) v = rng.gaussian();
    return static_cast<float>(v);
  };
  // Partial Fisher-Yates: the first k slots of `pool` become a uniform
  // k-subset.
  auto choose = [&rng](std::size_t population, std::size_t k) {
    std::vector<std::size_t> pool(population);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t pick = t + static_cast<std::size_t>(rng.below(population - t));
      std::swap(pool[t], pool[pick]);
    }
    pool.resize(k);
    return pool;
  };

  if (const auto* g = std::get_if<L0Global>(&rule)) {
    if (g->k > sample.gamma.size()) {
      throw DomainError("sample_sparse: budget " + std::to_string(g->k) + " exceeds " +
                        std::to_string(sample.gamma.size()) + " entries");
    }
    for (std::size_t idx : choose(sample.gamma.size(), g->k)) sample.gamma[idx] = draw();
    sample.support_size = g->k;
  } else {
    const std::size_t k = std::get<L0InfNeedle>(rule).k;
    if (k > channels) {
      throw DomainError("sample_sparse: needle budget " + std::to_string(k) + " exceeds " +
                        std::to_string(channels) + " channels");
    }
    for (std::size_t h = 0; h < height; ++h) {
      for (std::size_t w = 0; w < width; ++w) {
        auto needle = sample.gamma.needle(h, w);
        for (std::size_t ch : choose(channels, k)) needle[ch] = draw();
      }
    }
    sample.support_size = k * height * width;
  }
  return sample;
}

}  // namespace csc
