#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "csc/rng.hpp"

namespace csc {

/// Dense H x W x C tensor of floats, row-major and channel-last:
/// index(h, w, c) = (h * W + w) * C + c.
///
/// A spatial position (h, w) addresses a contiguous "needle" of C values.
class Tensor3 {
 public:
  Tensor3() = default;
  /// Zero-filled tensor. All dimensions must be positive.
  Tensor3(std::size_t height, std::size_t width, std::size_t channels);
  /// Takes ownership of `data`; throws ShapeError on length mismatch and
  /// DomainError if any value is NaN or infinite.
  Tensor3(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data);

  static Tensor3 filled(std::size_t height, std::size_t width, std::size_t channels, float value);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t needle_count() const noexcept { return height_ * width_; }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t h, std::size_t w, std::size_t c) const noexcept {
    return (h * width_ + w) * channels_ + c;
  }
  float& operator()(std::size_t h, std::size_t w, std::size_t c) noexcept { return data_[index(h, w, c)]; }
  float operator()(std::size_t h, std::size_t w, std::size_t c) const noexcept { return data_[index(h, w, c)]; }
  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }
  std::span<float> needle(std::size_t h, std::size_t w) noexcept {
    return std::span<float>(data_).subspan(index(h, w, 0), channels_);
  }
  std::span<const float> needle(std::size_t h, std::size_t w) const noexcept {
    return std::span<const float>(data_).subspan(index(h, w, 0), channels_);
  }

  bool same_shape(const Tensor3& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  std::string shape_string() const;

  bool operator==(const Tensor3& other) const = default;

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(float scale);

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<float> data_;
};

Tensor3 operator+(Tensor3 a, const Tensor3& b);
Tensor3 operator-(Tensor3 a, const Tensor3& b);
Tensor3 operator*(float scale, Tensor3 a);

/// Throws ShapeError naming `context` unless a and b have identical shapes.
void require_same_shape(const Tensor3& a, const Tensor3& b, const char* context);

/// Sum of elementwise products, accumulated in double in index order.
double inner(const Tensor3& a, const Tensor3& b);
double squared_norm(const Tensor3& a);
double norm(const Tensor3& a);
double mse(const Tensor3& reference, const Tensor3& candidate);

/// Peak signal-to-noise ratio with peak 255. Returns +infinity when the
/// tensors are identical.
double psnr(const Tensor3& reference, const Tensor3& candidate);

/// x + n with n ~ N(0, sigma^2) i.i.d., drawn in index order from `rng`.
Tensor3 add_awgn(const Tensor3& x, double sigma, Rng& rng);

/// i.i.d. standard normal entries.
Tensor3 random_gaussian(std::size_t height, std::size_t width, std::size_t channels, Rng& rng);

}  // namespace csc
