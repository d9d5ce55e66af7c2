#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "csc/kernels.hpp"

namespace csc {

namespace {

int g_threads = 1;

// Atoms re-laid out as [a][b][k][c] so the innermost loops over atoms and
// channels read contiguous memory.
std::vector<float> tap_major(const ConvDictionary& dict) {
  const std::size_t m = dict.atom_count();
  const std::size_t n = dict.atom_size();
  const std::size_t c = dict.channels();
  std::vector<float> taps(m * n * n * c);
  for (std::size_t k = 0; k < m; ++k) {
    const auto atom = dict.atom(k);
    for (std::size_t ab = 0; ab < n * n; ++ab) {
      for (std::size_t ch = 0; ch < c; ++ch) taps[(ab * m + k) * c + ch] = atom[ab * c + ch];
    }
  }
  return taps;
}

std::ptrdiff_t ceil_div(std::ptrdiff_t a, std::ptrdiff_t b) {
  return a >= 0 ? (a + b - 1) / b : -((-a) / b);
}

std::ptrdiff_t floor_div(std::ptrdiff_t a, std::ptrdiff_t b) {
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

// Gather-form synthesis. When `x` is given, also returns
// 0.5 * ||D gamma - x||^2 from the unrounded double sums; per-row partials are
// added in row order so the value does not depend on the thread count.
double synthesize_impl(const ConvDictionary& dict, const Tensor3& gamma, Tensor3& out, const Tensor3* x);

}  // namespace

void set_thread_count(int threads) {
  g_threads = std::max(1, threads);
#ifdef _OPENMP
  omp_set_num_threads(g_threads);
#endif
}

int thread_count() { return g_threads; }

bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

}  // namespace csc

namespace csc {

namespace {

double synthesize_impl(const ConvDictionary& dict, const Tensor3& gamma, Tensor3& out, const Tensor3* x) {
  const std::vector<float> taps = tap_major(dict);
  const std::size_t m = dict.atom_count();
  const auto n = static_cast<std::ptrdiff_t>(dict.atom_size());
  const auto s = static_cast<std::ptrdiff_t>(dict.stride());
  const auto p = static_cast<std::ptrdiff_t>(dict.padding());
  const auto rep_h = static_cast<std::ptrdiff_t>(gamma.height());
  const auto rep_w = static_cast<std::ptrdiff_t>(gamma.width());
  const std::size_t c = dict.channels();
  const auto out_h = static_cast<std::ptrdiff_t>(out.height());
  const auto out_w = static_cast<std::ptrdiff_t>(out.width());

  // Nonzeros of every needle, in atom order: needle q owns
  // [start[q], start[q + 1]) of `atom_of` / `coef`.
  std::vector<std::size_t> start(gamma.needle_count() + 1, 0);
  std::vector<std::uint32_t> atom_of;
  std::vector<float> coef;
  for (std::size_t q = 0; q < gamma.needle_count(); ++q) {
    const float* needle = gamma.values().data() + q * m;
    for (std::size_t k = 0; k < m; ++k) {
      if (needle[k] != 0.0f) {
        atom_of.push_back(static_cast<std::uint32_t>(k));
        coef.push_back(needle[k]);
      }
    }
    start[q + 1] = coef.size();
  }

  std::vector<double> row_energy(x != nullptr ? static_cast<std::size_t>(out_h) : 0, 0.0);

#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1)
  for (std::ptrdiff_t h = 0; h < out_h; ++h) {
    std::vector<double> acc(c);
    double energy = 0.0;
    const std::ptrdiff_t i_lo = std::max<std::ptrdiff_t>(0, ceil_div(h + p - n + 1, s));
    const std::ptrdiff_t i_hi = std::min<std::ptrdiff_t>(rep_h - 1, floor_div(h + p, s));
    for (std::ptrdiff_t w = 0; w < out_w; ++w) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, ceil_div(w + p - n + 1, s));
      const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(rep_w - 1, floor_div(w + p, s));
      for (std::ptrdiff_t i = i_lo; i <= i_hi; ++i) {
        const std::ptrdiff_t a = h + p - i * s;
        for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j) {
          const std::ptrdiff_t b = w + p - j * s;
          const auto q = static_cast<std::size_t>(i * rep_w + j);
          const float* tap = taps.data() + static_cast<std::size_t>(a * n + b) * m * c;
          if (c == 1) {
            double dot = 0.0;
            for (std::size_t e = start[q]; e < start[q + 1]; ++e) {
              dot += static_cast<double>(coef[e]) * tap[atom_of[e]];
            }
            acc[0] += dot;
          } else {
            for (std::size_t e = start[q]; e < start[q + 1]; ++e) {
              const double g = coef[e];
              const float* atom_tap = tap + atom_of[e] * c;
              for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += g * atom_tap[ch];
            }
          }
        }
      }
      auto dst = out.needle(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
      for (std::size_t ch = 0; ch < c; ++ch) dst[ch] = static_cast<float>(acc[ch]);
      if (x != nullptr) {
        const auto target = x->needle(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double r = acc[ch] - static_cast<double>(target[ch]);
          energy += r * r;
        }
      }
    }
    if (x != nullptr) row_energy[static_cast<std::size_t>(h)] = energy;
  }
  double total = 0.0;
  for (double e : row_energy) total += e;
  return 0.5 * total;
}

}  // namespace

}  // namespace csc

namespace csc::parallel {

void synthesize(const ConvDictionary& dict, const Tensor3& gamma, Tensor3& out) {
  synthesize_impl(dict, gamma, out, nullptr);
}

double synthesize_residual(const ConvDictionary& dict, const Tensor3& gamma, const Tensor3& x, Tensor3& out) {
  return synthesize_impl(dict, gamma, out, &x);
}

void adjoint(const ConvDictionary& dict, const Tensor3& x, Tensor3& out) {
  const std::vector<float> taps = tap_major(dict);
  const std::size_t m = dict.atom_count();
  const auto n = static_cast<std::ptrdiff_t>(dict.atom_size());
  const auto s = static_cast<std::ptrdiff_t>(dict.stride());
  const auto p = static_cast<std::ptrdiff_t>(dict.padding());
  const std::size_t c = dict.channels();
  const auto x_h = static_cast<std::ptrdiff_t>(x.height());
  const auto x_w = static_cast<std::ptrdiff_t>(x.width());
  const auto rep_h = static_cast<std::ptrdiff_t>(out.height());
  const auto rep_w = static_cast<std::ptrdiff_t>(out.width());

#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1)
  for (std::ptrdiff_t i = 0; i < rep_h; ++i) {
    std::vector<double> acc(m);
    const std::ptrdiff_t a_lo = std::max<std::ptrdiff_t>(0, p - i * s);
    const std::ptrdiff_t a_hi = std::min<std::ptrdiff_t>(n - 1, x_h - 1 + p - i * s);
    for (std::ptrdiff_t j = 0; j < rep_w; ++j) {
      std::fill(acc.begin(), acc.end(), 0.0);
      const std::ptrdiff_t b_lo = std::max<std::ptrdiff_t>(0, p - j * s);
      const std::ptrdiff_t b_hi = std::min<std::ptrdiff_t>(n - 1, x_w - 1 + p - j * s);
      for (std::ptrdiff_t a = a_lo; a <= a_hi; ++a) {
        const auto h = static_cast<std::size_t>(i * s - p + a);
        for (std::ptrdiff_t b = b_lo; b <= b_hi; ++b) {
          const auto w = static_cast<std::size_t>(j * s - p + b);
          const auto pixel = x.needle(h, w);
          const float* tap = taps.data() + static_cast<std::size_t>(a * n + b) * m * c;
          if (c == 1) {
            const double px = pixel[0];
            double* acc_k = acc.data();
#pragma omp simd
            for (std::size_t k = 0; k < m; ++k) acc_k[k] += px * tap[k];
          } else {
            for (std::size_t k = 0; k < m; ++k) {
              const float* atom_tap = tap + k * c;
              double dot = 0.0;
              for (std::size_t ch = 0; ch < c; ++ch) dot += static_cast<double>(pixel[ch]) * atom_tap[ch];
              acc[k] += dot;
            }
          }
        }
      }
      auto dst = out.needle(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      for (std::size_t k = 0; k < m; ++k) dst[k] = static_cast<float>(acc[k]);
    }
  }
}

double inner(const Tensor3& a, const Tensor3& b) {
  const auto count = static_cast<std::ptrdiff_t>(a.size());
  double acc = 0.0;
#pragma omp parallel for reduction(+ : acc) schedule(static) num_threads(g_threads) if (g_threads > 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    acc += static_cast<double>(a[static_cast<std::size_t>(i)]) * b[static_cast<std::size_t>(i)];
  }
  return acc;
}

}  // namespace csc::parallel
