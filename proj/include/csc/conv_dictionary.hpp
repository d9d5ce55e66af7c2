#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csc/rng.hpp"
#include "csc/tensor.hpp"

namespace csc {

/// Spatial extents of a representation and of the image it synthesizes.
struct DictGeometry {
  std::size_t rep_height = 0;
  std::size_t rep_width = 0;
  std::size_t out_height = 0;
  std::size_t out_width = 0;
};

/// A convolutional dictionary: m square atoms of size n x n x c, applied as
/// a transposed convolution with stride s and zero padding p.
///
/// Atoms are stored contiguously, atom k occupying [k*n*n*c, (k+1)*n*n*c) in
/// row-major channel-last order (a, b, c). A needle (i, j) of a
/// representation places atom k with its top-left corner at
/// (i*s - p, j*s - p) in the output; parts falling outside are cropped.
///
/// Output extent along each axis: H_out = (H - 1) * s + n - 2p.
///
/// The constructor accepts arbitrary (finite) atom values. The factories and
/// normalize_atoms() produce unit-norm atoms; effective dictionaries and
/// user-supplied files may not be normalized.
class ConvDictionary {
 public:
  ConvDictionary() = default;
  ConvDictionary(std::size_t atom_count, std::size_t atom_size, std::size_t channels, std::size_t stride,
                 std::size_t padding, std::vector<float> atoms);

  /// m seeded random atoms, each i.i.d. Gaussian then scaled to unit norm.
  static ConvDictionary random(std::size_t atom_count, std::size_t atom_size, std::size_t channels,
                               std::size_t stride, std::size_t padding, Rng& rng);
  /// 1x1x1 atom equal to one: synthesize and adjoint are the identity.
  static ConvDictionary identity();

  std::size_t atom_count() const noexcept { return m_; }
  std::size_t atom_size() const noexcept { return n_; }
  std::size_t channels() const noexcept { return c_; }
  std::size_t stride() const noexcept { return s_; }
  std::size_t padding() const noexcept { return p_; }
  std::size_t atom_length() const noexcept { return n_ * n_ * c_; }

  std::span<const float> atom(std::size_t k) const;
  std::span<float> atom(std::size_t k);
  Tensor3 atom_tensor(std::size_t k) const;
  std::span<const float> data() const noexcept { return atoms_; }
  std::span<float> data() noexcept { return atoms_; }

  /// (H - 1) * s + n - 2p; throws GeometryError if not positive.
  std::size_t output_extent(std::size_t rep_extent) const;
  /// Inverse of output_extent; throws ShapeError if `out_extent` is not
  /// reachable from any positive representation extent.
  std::size_t rep_extent(std::size_t out_extent) const;

  DictGeometry geometry_for_rep(std::size_t rep_height, std::size_t rep_width) const;
  DictGeometry geometry_for_output(std::size_t out_height, std::size_t out_width) const;

  /// Same atoms with a different padding (must still satisfy 2p < n).
  ConvDictionary with_padding(std::size_t padding) const;

  bool operator==(const ConvDictionary&) const = default;

 private:
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::size_t c_ = 0;
  std::size_t s_ = 1;
  std::size_t p_ = 0;
  std::vector<float> atoms_;
};

/// x = D * gamma. gamma must have D.atom_count() channels.
Tensor3 synthesize(const ConvDictionary& dict, const Tensor3& gamma);

/// D^T x. x must be a valid output shape of D.
Tensor3 adjoint(const ConvDictionary& dict, const Tensor3& x);

/// Scales each atom to unit l2 norm. Atoms with norm below 1e-8 are replaced
/// by a fresh random unit atom drawn from `rng`.
ConvDictionary normalize_atoms(const ConvDictionary& dict, Rng& rng);
ConvDictionary normalize_atoms(const ConvDictionary& dict);

/// Tiles all atoms into one image, `cols` tiles per row, each atom affinely
/// mapped to [0, 255] (constant atoms map to 127.5), separated by one-pixel
/// zero borders. Requires 1 or 3 channels.
Tensor3 export_atom_grid(const ConvDictionary& dict, std::size_t cols);

/// Gradient of 0.5 * ||D gamma - x||^2 with respect to the atoms, laid out
/// like ConvDictionary::data().
std::vector<float> atom_gradient(const ConvDictionary& dict, const Tensor3& gamma, const Tensor3& residual);

}  // namespace csc
