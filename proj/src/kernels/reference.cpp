#include <cstddef>
#include <vector>

#include "csc/kernels.hpp"

namespace csc::reference {

void synthesize(const ConvDictionary& dict, const Tensor3& gamma, Tensor3& out) {
  const auto n = static_cast<std::ptrdiff_t>(dict.atom_size());
  const auto s = static_cast<std::ptrdiff_t>(dict.stride());
  const auto p = static_cast<std::ptrdiff_t>(dict.padding());
  const auto out_h = static_cast<std::ptrdiff_t>(out.height());
  const auto out_w = static_cast<std::ptrdiff_t>(out.width());
  const std::size_t c = dict.channels();

  std::vector<double> acc(out.size(), 0.0);
  for (std::size_t i = 0; i < gamma.height(); ++i) {
    for (std::size_t j = 0; j < gamma.width(); ++j) {
      for (std::size_t k = 0; k < dict.atom_count(); ++k) {
        const double g = gamma(i, j, k);
        if (g == 0.0) continue;
        const auto atom = dict.atom(k);
        for (std::ptrdiff_t a = 0; a < n; ++a) {
          const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(i) * s - p + a;
          if (h < 0 || h >= out_h) continue;
          for (std::ptrdiff_t b = 0; b < n; ++b) {
            const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(j) * s - p + b;
            if (w < 0 || w >= out_w) continue;
            for (std::size_t ch = 0; ch < c; ++ch) {
              acc[out.index(h, w, ch)] += g * atom[(a * n + b) * c + ch];
            }
          }
        }
      }
    }
  }
  for (std::size_t idx = 0; idx < acc.size(); ++idx) out[idx] = static_cast<float>(acc[idx]);
}

void adjoint(const ConvDictionary& dict, const Tensor3& x, Tensor3& out) {
  const auto n = static_cast<std::ptrdiff_t>(dict.atom_size());
  const auto s = static_cast<std::ptrdiff_t>(dict.stride());
  const auto p = static_cast<std::ptrdiff_t>(dict.padding());
  const auto x_h = static_cast<std::ptrdiff_t>(x.height());
  const auto x_w = static_cast<std::ptrdiff_t>(x.width());
  const std::size_t c = dict.channels();

  for (std::size_t i = 0; i < out.height(); ++i) {
    for (std::size_t j = 0; j < out.width(); ++j) {
      for (std::size_t k = 0; k < dict.atom_count(); ++k) {
        const auto atom = dict.atom(k);
        double acc = 0.0;
        for (std::ptrdiff_t a = 0; a < n; ++a) {
          const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(i) * s - p + a;
          if (h < 0 || h >= x_h) continue;
          for (std::ptrdiff_t b = 0; b < n; ++b) {
            const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(j) * s - p + b;
            if (w < 0 || w >= x_w) continue;
            for (std::size_t ch = 0; ch < c; ++ch) {
              acc += static_cast<double>(x(h, w, ch)) * atom[(a * n + b) * c + ch];
            }
          }
        }
        out(i, j, k) = static_cast<float>(acc);
      }
    }
  }
}

double inner(const Tensor3& a, const Tensor3& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

}  // namespace csc::reference
