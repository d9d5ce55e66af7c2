#include "csc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csc/errors.hpp"

namespace csc {

namespace {

void require_positive(std::size_t h, std::size_t w, std::size_t c) {
  if (h == 0 || w == 0 || c == 0) {
    throw ShapeError("tensor dimensions must be positive, got " + std::to_string(h) + "x" + std::to_string(w) +
                     "x" + std::to_string(c));
  }
}

}  // namespace

Tensor3::Tensor3(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels) {
  require_positive(height, width, channels);
  data_.assign(height * width * channels, 0.0f);
}

Tensor3::Tensor3(std::size_t height, std::size_t width, std::size_t channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  require_positive(height, width, channels);
  if (data_.size() != height * width * channels) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) throw DomainError("non-finite tensor value at index " + std::to_string(i));
  }
}

Tensor3 Tensor3::filled(std::size_t height, std::size_t width, std::size_t channels, float value) {
  Tensor3 t(height, width, channels);
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

std::string Tensor3::shape_string() const {
  return std::to_string(height_) + "x" + std::to_string(width_) + "x" + std::to_string(channels_);
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(float scale) {
  for (float& v : data_) v *= scale;
  return *this;
}

Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
Tensor3 operator*(float scale, Tensor3 a) { return a *= scale; }

void require_same_shape(const Tensor3& a, const Tensor3& b, const char* context) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(context) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

double inner(const Tensor3& a, const Tensor3& b) {
  require_same_shape(a, b, "inner");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double squared_norm(const Tensor3& a) {
  double acc = 0.0;
  for (float v : a.values()) acc += static_cast<double>(v) * v;
  return acc;
}

double norm(const Tensor3& a) { return std::sqrt(squared_norm(a)); }

double mse(const Tensor3& reference, const Tensor3& candidate) {
  require_same_shape(reference, candidate, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = static_cast<double>(reference[i]) - static_cast<double>(candidate[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(reference.size());
}

double psnr(const Tensor3& reference, const Tensor3& candidate) {
  const double err = mse(reference, candidate);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / err);
}

Tensor3 add_awgn(const Tensor3& x, double sigma, Rng& rng) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("add_awgn: sigma must be a finite value >= 0");
  Tensor3 out = x;
  if (sigma == 0.0) return out;
  for (float& v : out.values()) v = static_cast<float>(v + sigma * rng.gaussian());
  return out;
}

Tensor3 random_gaussian(std::size_t height, std::size_t width, std::size_t channels, Rng& rng) {
  Tensor3 out(height, width, channels);
  for (float& v : out.values()) v = static_cast<float>(rng.gaussian());
  return out;
}

}  // namespace csc
