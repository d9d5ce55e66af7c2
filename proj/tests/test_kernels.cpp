#include <doctest.h>

#include <cmath>

#include "csc/conv_dictionary.hpp"
#include "csc/kernels.hpp"

using csc::ConvDictionary;
using csc::Rng;
using csc::Tensor3;

namespace {

struct ThreadGuard {
  int saved = csc::thread_count();
  ~ThreadGuard() { csc::set_thread_count(saved); }
};

double max_rel_diff(const Tensor3& a, const Tensor3& b) {
  double scale = 1e-30;
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, static_cast<double>(std::fabs(a[i])));
    diff = std::max(diff, static_cast<double>(std::fabs(a[i] - b[i])));
  }
  return diff / scale;
}

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  ThreadGuard guard;
  Rng rng(314);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 1 + rng.below(8);
    const std::size_t n = 1 + rng.below(5);
    const std::size_t c = 1 + rng.below(3);
    const std::size_t s = 1 + rng.below(2);
    const std::size_t p = rng.below((n + 1) / 2);
    const ConvDictionary d = ConvDictionary::random(m, n, c, s, p, rng);
    const std::size_t rh = 1 + rng.below(9);
    const std::size_t rw = 1 + rng.below(9);
    const csc::DictGeometry g = d.geometry_for_rep(rh, rw);
    const Tensor3 gamma = csc::random_gaussian(rh, rw, m, rng);
    const Tensor3 x = csc::random_gaussian(g.out_height, g.out_width, c, rng);

    Tensor3 ref_syn(g.out_height, g.out_width, c);
    Tensor3 ref_adj(rh, rw, m);
    csc::reference::synthesize(d, gamma, ref_syn);
    csc::reference::adjoint(d, x, ref_adj);

    Tensor3 first_syn;
    Tensor3 first_adj;
    for (int threads : {1, 2, 4}) {
      CAPTURE(threads);
      csc::set_thread_count(threads);
      Tensor3 syn(g.out_height, g.out_width, c);
      Tensor3 adj(rh, rw, m);
      csc::parallel::synthesize(d, gamma, syn);
      csc::parallel::adjoint(d, x, adj);
      CHECK(max_rel_diff(ref_syn, syn) <= 1e-6);
      CHECK(max_rel_diff(ref_adj, adj) <= 1e-6);
      if (first_syn.empty()) {
        first_syn = syn;
        first_adj = adj;
      } else {
        CHECK(syn == first_syn);
        CHECK(adj == first_adj);
      }
      CHECK(csc::parallel::inner(gamma, gamma) ==
            doctest::Approx(csc::reference::inner(gamma, gamma)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sparse codes take the same path as dense ones") {
  Rng rng(2);
  const ConvDictionary d = ConvDictionary::random(6, 3, 1, 2, 1, rng);
  Tensor3 gamma(5, 4, 6);
  gamma(0, 0, 2) = 1.5f;
  gamma(4, 3, 5) = -2.0f;
  gamma(2, 1, 0) = 0.25f;
  const csc::DictGeometry g = d.geometry_for_rep(5, 4);
  Tensor3 a(g.out_height, g.out_width, 1);
  Tensor3 b(g.out_height, g.out_width, 1);
  csc::reference::synthesize(d, gamma, a);
  csc::parallel::synthesize(d, gamma, b);
  CHECK(max_rel_diff(a, b) <= 1e-7);
}

TEST_CASE("thread count control") {
  ThreadGuard guard;
  csc::set_thread_count(0);
  CHECK(csc::thread_count() == 1);
  csc::set_thread_count(3);
  CHECK(csc::thread_count() == 3);
}
