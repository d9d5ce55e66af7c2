#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "csc/conv_dictionary.hpp"
#include "csc/rng.hpp"
#include "csc/sparsify.hpp"
#include "csc/tensor.hpp"

namespace csc {

struct MlCscLayer {
  ConvDictionary dict;
  SparsityRule rule;
};

/// Cascade x = D_1 g_1, g_1 = D_2 g_2, ..., g_{L-1} = D_L g_L.
///
/// Layers are indexed from the image side: layers()[0] is D_1, which
/// synthesizes the image; layers().back() is D_L, which consumes the deepest
/// code g_L. Generator code usually counts the other way round.
class MlCscModel {
 public:
  /// Throws CascadeGeometryError if D_i's atom channels differ from
  /// D_{i-1}'s atom count, or DomainError if `layers` is empty.
  explicit MlCscModel(std::vector<MlCscLayer> layers);

  std::size_t depth() const noexcept { return layers_.size(); }
  const std::vector<MlCscLayer>& layers() const noexcept { return layers_; }
  /// 1-based.
  const MlCscLayer& layer(std::size_t i) const { return layers_.at(i - 1); }

 private:
  std::vector<MlCscLayer> layers_;
};

struct CascadeOutput {
  Tensor3 image;
  /// g_1 .. g_L; gammas.back() is the input code.
  std::vector<Tensor3> gammas;
};

/// Synthesizes from the deepest code down to the image. Intermediate codes
/// are exact synthesis results and are not re-projected.
Tensor3 synthesize_cascade(const MlCscModel& model, const Tensor3& deepest);
CascadeOutput synthesize_cascade_all(const MlCscModel& model, const Tensor3& deepest);

/// Flat dictionary equivalent to D_1 ... D_depth. Atom k is the cascade's
/// response to a unit impulse in channel k of g_depth, computed without
/// padding so nothing is cropped. Support, stride and padding compose as
///   n_eff = n_eff' + (n_i - 1) * s_eff',  s_eff = s_eff' * s_i,
///   p_eff = p_eff' + p_i * s_eff'.
/// Atoms are left unnormalized. synthesize(D_eff, g) equals the cascade
/// exactly when layers 2..depth have zero padding; otherwise the cascade
/// crops intermediate codes at their borders and the two differ there.
ConvDictionary effective_dictionary(const MlCscModel& model, std::size_t depth);

struct LayerCheck {
  std::size_t layer = 0;
  std::string rule;
  bool sparsity_checked = false;
  bool sparsity_ok = true;
  std::size_t nnz = 0;
  std::size_t max_needle_nnz = 0;
  double l1_mass = 0.0;
  /// g_layer == D_{layer+1} g_{layer+1}; not checked for the deepest layer.
  bool consistency_checked = false;
  bool consistency_ok = true;
  double consistency_rel_error = 0.0;
};

struct ValidationReport {
  std::vector<LayerCheck> layers;

  bool all_consistent() const;
  bool all_sparse() const;
  bool passed() const { return all_consistent() && all_sparse(); }
};

/// Checks each code against its layer's rule (L1 rules only report their
/// mass) and each adjacent pair for synthesis consistency within 1e-4
/// relative.
ValidationReport validate(const MlCscModel& model, const std::vector<Tensor3>& gammas);

struct SparseSample {
  Tensor3 gamma;
  std::size_t support_size = 0;
  std::uint64_t rng_seed = 0;
};

/// Random code with a uniformly chosen support: k entries overall for
/// L0Global, exactly k per needle for L0InfNeedle. Values are standard
/// Gaussian (never exactly zero). L1Penalty has no budget and is rejected.
SparseSample sample_sparse(std::size_t height, std::size_t width, std::size_t channels, const SparsityRule& rule,
                           std::uint64_t seed);

}  // namespace csc
