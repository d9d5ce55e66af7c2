#include "csc/conv_dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "csc/errors.hpp"
#include "csc/kernels.hpp"

namespace csc {

namespace {

std::string dims(std::size_t h, std::size_t w) { return std::to_string(h) + "x" + std::to_string(w); }

double atom_norm(std::span<const float> atom) {
  double acc = 0.0;
  for (float v : atom) acc += static_cast<double>(v) * v;
  return std::sqrt(acc);
}

void fill_random_unit(std::span<float> atom, Rng& rng) {
  double nrm = 0.0;
  do {
    for (float& v : atom) v = static_cast<float>(rng.gaussian());
    nrm = atom_norm(atom);
  } while (nrm < 1e-8);
  for (float& v : atom) v = static_cast<float>(v / nrm);
}

}  // namespace

ConvDictionary::ConvDictionary(std::size_t atom_count, std::size_t atom_size, std::size_t channels,
                               std::size_t stride, std::size_t padding, std::vector<float> atoms)
    : m_(atom_count), n_(atom_size), c_(channels), s_(stride), p_(padding), atoms_(std::move(atoms)) {
  if (m_ == 0 || n_ == 0 || c_ == 0 || s_ == 0) {
    throw GeometryError("dictionary atom count, size, channels and stride must be positive");
  }
  if (2 * p_ >= n_) {
    throw GeometryError("padding " + std::to_string(p_) + " too large for atom size " + std::to_string(n_) +
                        " (need 2p < n)");
  }
  if (atoms_.size() != m_ * atom_length()) {
    throw ShapeError("dictionary holds " + std::to_string(atoms_.size()) + " values, expected " +
                     std::to_string(m_ * atom_length()));
  }
  for (float v : atoms_) {
    if (!std::isfinite(v)) throw DomainError("dictionary contains a non-finite value");
  }
}

ConvDictionary ConvDictionary::random(std::size_t atom_count, std::size_t atom_size, std::size_t channels,
                                      std::size_t stride, std::size_t padding, Rng& rng) {
  ConvDictionary dict(atom_count, atom_size, channels, stride, padding,
                      std::vector<float>(atom_count * atom_size * atom_size * channels));
  for (std::size_t k = 0; k < atom_count; ++k) fill_random_unit(dict.atom(k), rng);
  return dict;
}

ConvDictionary ConvDictionary::identity() { return ConvDictionary(1, 1, 1, 1, 0, {1.0f}); }

std::span<const float> ConvDictionary::atom(std::size_t k) const {
  return std::span<const float>(atoms_).subspan(k * atom_length(), atom_length());
}

std::span<float> ConvDictionary::atom(std::size_t k) {
  return std::span<float>(atoms_).subspan(k * atom_length(), atom_length());
}

Tensor3 ConvDictionary::atom_tensor(std::size_t k) const {
  const auto a = atom(k);
  return Tensor3(n_, n_, c_, std::vector<float>(a.begin(), a.end()));
}

std::size_t ConvDictionary::output_extent(std::size_t rep_extent) const {
  if (rep_extent == 0) throw GeometryError("representation extent must be positive");
  const long long out = static_cast<long long>((rep_extent - 1) * s_ + n_) - 2 * static_cast<long long>(p_);
  if (out <= 0) {
    throw GeometryError("derived output extent " + std::to_string(out) + " is not positive");
  }
  return static_cast<std::size_t>(out);
}

std::size_t ConvDictionary::rep_extent(std::size_t out_extent) const {
  const long long span = static_cast<long long>(out_extent + 2 * p_) - static_cast<long long>(n_);
  if (span < 0 || span % static_cast<long long>(s_) != 0) {
    throw ShapeError("extent " + std::to_string(out_extent) + " is not an output extent of a dictionary with n=" +
                     std::to_string(n_) + ", s=" + std::to_string(s_) + ", p=" + std::to_string(p_));
  }
  return static_cast<std::size_t>(span / static_cast<long long>(s_)) + 1;
}

DictGeometry ConvDictionary::geometry_for_rep(std::size_t rep_height, std::size_t rep_width) const {
  return {rep_height, rep_width, output_extent(rep_height), output_extent(rep_width)};
}

DictGeometry ConvDictionary::geometry_for_output(std::size_t out_height, std::size_t out_width) const {
  return {rep_extent(out_height), rep_extent(out_width), out_height, out_width};
}

ConvDictionary ConvDictionary::with_padding(std::size_t padding) const {
  return ConvDictionary(m_, n_, c_, s_, padding, atoms_);
}

Tensor3 synthesize(const ConvDictionary& dict, const Tensor3& gamma) {
  if (gamma.channels() != dict.atom_count()) {
    throw ShapeError("synthesize: representation has " + std::to_string(gamma.channels()) +
                     " channels but dictionary has " + std::to_string(dict.atom_count()) + " atoms");
  }
  const DictGeometry geo = dict.geometry_for_rep(gamma.height(), gamma.width());
  Tensor3 out(geo.out_height, geo.out_width, dict.channels());
  parallel::synthesize(dict, gamma, out);
  return out;
}

Tensor3 adjoint(const ConvDictionary& dict, const Tensor3& x) {
  if (x.channels() != dict.channels()) {
    throw ShapeError("adjoint: signal has " + std::to_string(x.channels()) + " channels but atoms have " +
                     std::to_string(dict.channels()));
  }
  const DictGeometry geo = dict.geometry_for_output(x.height(), x.width());
  Tensor3 out(geo.rep_height, geo.rep_width, dict.atom_count());
  parallel::adjoint(dict, x, out);
  return out;
}

ConvDictionary normalize_atoms(const ConvDictionary& dict, Rng& rng) {
  ConvDictionary out = dict;
  for (std::size_t k = 0; k < out.atom_count(); ++k) {
    auto atom = out.atom(k);
    const double nrm = atom_norm(atom);
    if (nrm < 1e-8) {
      fill_random_unit(atom, rng);
    } else {
      for (float& v : atom) v = static_cast<float>(v / nrm);
    }
  }
  return out;
}

ConvDictionary normalize_atoms(const ConvDictionary& dict) {
  Rng rng(0);
  return normalize_atoms(dict, rng);
}

Tensor3 export_atom_grid(const ConvDictionary& dict, std::size_t cols) {
  const std::size_t c = dict.channels();
  if (c != 1 && c != 3) throw DomainError("atom grid export needs 1 or 3 channels, got " + std::to_string(c));
  if (cols == 0) throw DomainError("atom grid needs at least one column");
  const std::size_t m = dict.atom_count();
  const std::size_t n = dict.atom_size();
  const std::size_t rows = (m + cols - 1) / cols;
  const std::size_t pitch = n + 1;
  Tensor3 grid(rows * pitch + 1, cols * pitch + 1, c);

  for (std::size_t k = 0; k < m; ++k) {
    const auto atom = dict.atom(k);
    const auto [lo_it, hi_it] = std::minmax_element(atom.begin(), atom.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const std::size_t top = (k / cols) * pitch + 1;
    const std::size_t left = (k % cols) * pitch + 1;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double v = atom[(a * n + b) * c + ch];
          grid(top + a, left + b, ch) = hi > lo ? static_cast<float>((v - lo) / (hi - lo) * 255.0) : 127.5f;
        }
      }
    }
  }
  return grid;
}

std::vector<float> atom_gradient(const ConvDictionary& dict, const Tensor3& gamma, const Tensor3& residual) {
  if (gamma.channels() != dict.atom_count()) throw ShapeError("atom_gradient: representation channel mismatch");
  const DictGeometry geo = dict.geometry_for_rep(gamma.height(), gamma.width());
  if (residual.height() != geo.out_height || residual.width() != geo.out_width ||
      residual.channels() != dict.channels()) {
    throw ShapeError("atom_gradient: residual shape " + residual.shape_string() + " does not match output " +
                     dims(geo.out_height, geo.out_width));
  }
  const std::size_t m = dict.atom_count();
  const auto n = static_cast<std::ptrdiff_t>(dict.atom_size());
  const auto s = static_cast<std::ptrdiff_t>(dict.stride());
  const auto p = static_cast<std::ptrdiff_t>(dict.padding());
  const std::size_t c = dict.channels();
  const auto out_h = static_cast<std::ptrdiff_t>(geo.out_height);
  const auto out_w = static_cast<std::ptrdiff_t>(geo.out_width);

  std::vector<double> acc(m * dict.atom_length(), 0.0);
  for (std::size_t i = 0; i < gamma.height(); ++i) {
    for (std::size_t j = 0; j < gamma.width(); ++j) {
      const auto needle = gamma.needle(i, j);
      for (std::size_t k = 0; k < m; ++k) {
        const double g = needle[k];
        if (g == 0.0) continue;
        double* grad = acc.data() + k * dict.atom_length();
        for (std::ptrdiff_t a = 0; a < n; ++a) {
          const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(i) * s - p + a;
          if (h < 0 || h >= out_h) continue;
          for (std::ptrdiff_t b = 0; b < n; ++b) {
            const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(j) * s - p + b;
            if (w < 0 || w >= out_w) continue;
            const auto r = residual.needle(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
            for (std::size_t ch = 0; ch < c; ++ch) grad[(a * n + b) * c + ch] += g * r[ch];
          }
        }
      }
    }
  }
  return std::vector<float>(acc.begin(), acc.end());
}

}  // namespace csc
