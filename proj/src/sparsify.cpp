#include "csc/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "csc/errors.hpp"
#include "csc/kernels.hpp"
#include "overloaded.hpp"

namespace csc {

namespace {

// Zeroes all but the k largest-magnitude entries of `values`. Ordering is
// |v| descending, then position ascending, which is a strict total order, so
// the kept set is unique.
void keep_top_k(std::span<float> values, std::size_t k, std::vector<std::size_t>& order) {
  if (k >= values.size()) return;
  if (k == 0) {
    std::fill(values.begin(), values.end(), 0.0f);
    return;
  }
  order.resize(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    const float fa = std::fabs(values[a]);
    const float fb = std::fabs(values[b]);
    return fa != fb ? fa > fb : a < b;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), before);
  for (auto it = order.begin() + static_cast<std::ptrdiff_t>(k); it != order.end(); ++it) values[*it] = 0.0f;
}

}  // namespace

void validate_rule(const SparsityRule& rule) {
  if (const auto* l1 = std::get_if<L1Penalty>(&rule)) {
    if (!(l1->lambda >= 0.0) || !std::isfinite(l1->lambda)) {
      throw DomainError("l1 penalty weight must be a finite value >= 0");
    }
  }
}

bool is_projection(const SparsityRule& rule) { return !std::holds_alternative<L1Penalty>(rule); }

std::string describe(const SparsityRule& rule) {
  std::ostringstream os;
  std::visit(overloaded{[&](const L1Penalty& r) { os << "l1(lambda=" << r.lambda << ")"; },
                        [&](const L0Global& r) { os << "l0(k=" << r.k << ")"; },
                        [&](const L0InfNeedle& r) { os << "l0inf(k=" << r.k << ")"; }},
             rule);
  return os.str();
}

Tensor3 project_l0_global(const Tensor3& gamma, std::size_t k) {
  Tensor3 out = gamma;
  std::vector<std::size_t> order;
  keep_top_k(out.values(), k, order);
  return out;
}

Tensor3 project_l0inf_needle(const Tensor3& gamma, std::size_t k) {
  Tensor3 out = gamma;
  if (k >= gamma.channels()) return out;
  const auto needles = static_cast<std::ptrdiff_t>(gamma.needle_count());
#pragma omp parallel num_threads(thread_count()) if (thread_count() > 1)
  {
    std::vector<std::size_t> order;
#pragma omp for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < needles; ++idx) {
      const auto u = static_cast<std::size_t>(idx);
      keep_top_k(out.needle(u / gamma.width(), u % gamma.width()), k, order);
    }
  }
  return out;
}

Tensor3 soft_threshold(const Tensor3& gamma, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("soft_threshold: tau must be a finite value >= 0");
  Tensor3 out = gamma;
  for (float& v : out.values()) {
    const double mag = std::fabs(static_cast<double>(v)) - tau;
    v = mag > 0.0 ? static_cast<float>(std::copysign(mag, static_cast<double>(v))) : 0.0f;
  }
  return out;
}

double l1_penalty(const Tensor3& gamma, double lambda) {
  double acc = 0.0;
  for (float v : gamma.values()) acc += std::fabs(static_cast<double>(v));
  return lambda * acc;
}

Tensor3 apply_rule(const Tensor3& gamma, const SparsityRule& rule, double step) {
  return std::visit(overloaded{[&](const L1Penalty& r) { return soft_threshold(gamma, r.lambda * step); },
                               [&](const L0Global& r) { return project_l0_global(gamma, r.k); },
                               [&](const L0InfNeedle& r) { return project_l0inf_needle(gamma, r.k); }},
                    rule);
}

SparsityReport sparsity_report(const Tensor3& gamma, double zero_tol) {
  SparsityReport report;
  report.height = gamma.height();
  report.width = gamma.width();
  report.channels = gamma.channels();
  report.needle_nnz_map.resize(gamma.needle_count());
  for (std::size_t h = 0; h < gamma.height(); ++h) {
    for (std::size_t w = 0; w < gamma.width(); ++w) {
      std::size_t count = 0;
      for (float v : gamma.needle(h, w)) count += std::fabs(v) > zero_tol ? 1 : 0;
      report.needle_nnz_map[h * gamma.width() + w] =
          static_cast<double>(count) / static_cast<double>(gamma.channels());
      report.total_nnz += count;
      report.max_needle_nnz = std::max(report.max_needle_nnz, count);
    }
  }
  report.global_nnz_fraction =
      gamma.empty() ? 0.0 : static_cast<double>(report.total_nnz) / static_cast<double>(gamma.size());
  return report;
}

bool satisfies(const Tensor3& gamma, const SparsityRule& rule) {
  if (const auto* r = std::get_if<L0Global>(&rule)) return sparsity_report(gamma).total_nnz <= r->k;
  if (const auto* r = std::get_if<L0InfNeedle>(&rule)) return sparsity_report(gamma).max_needle_nnz <= r->k;
  return true;
}

}  // namespace csc
