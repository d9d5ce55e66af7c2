// Times the serial reference kernels against the OpenMP gather kernels on a
// denoising-sized problem and checks that they agree.
//
//   bench_kernels [image_size] [atoms] [atom_size] [repeats] [threads]

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>

#include "csc/conv_dictionary.hpp"
#include "csc/kernels.hpp"

namespace {

template <class F>
double seconds_per_call(int repeats, F&& f) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / repeats;
}

double max_rel_diff(const csc::Tensor3& a, const csc::Tensor3& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, static_cast<double>(std::fabs(a[i] - b[i])));
    scale = std::max(scale, static_cast<double>(std::fabs(a[i])));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strtol(argv[i], nullptr, 10) <= 0) {
      std::cerr << "usage: bench_kernels [image_size] [atoms] [atom_size] [repeats] [threads]\n";
      return 2;
    }
  }
  const std::size_t size = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 64;
  const std::size_t m = argc > 2 ? std::strtoul(argv[2], nullptr, 10) : 64;
  const std::size_t n = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 8;
  const int repeats = argc > 4 ? std::atoi(argv[4]) : 10;
  const int threads = argc > 5 ? std::atoi(argv[5]) : 4;

  csc::Rng rng(42);
  const auto dict = csc::ConvDictionary::random(m, n, 1, 1, (n - 1) / 2, rng);
  const auto geo = dict.geometry_for_output(size, size);
  const auto gamma = csc::random_gaussian(geo.rep_height, geo.rep_width, m, rng);
  const auto x = csc::random_gaussian(size, size, 1, rng);

  csc::Tensor3 ref_out(size, size, 1);
  csc::Tensor3 par_out(size, size, 1);
  csc::Tensor3 ref_adj(geo.rep_height, geo.rep_width, m);
  csc::Tensor3 par_adj(geo.rep_height, geo.rep_width, m);

  std::cout << "image " << size << "x" << size << ", " << m << " atoms of " << n << "x" << n
            << ", openmp=" << (csc::openmp_enabled() ? "on" : "off") << "\n";

  const double t_ref_syn = seconds_per_call(repeats, [&] { csc::reference::synthesize(dict, gamma, ref_out); });
  const double t_ref_adj = seconds_per_call(repeats, [&] { csc::reference::adjoint(dict, x, ref_adj); });
  std::cout << "reference  synthesize " << t_ref_syn * 1e3 << " ms, adjoint " << t_ref_adj * 1e3 << " ms\n";

  for (int t = 1; t <= threads; t *= 2) {
    csc::set_thread_count(t);
    const double t_syn = seconds_per_call(repeats, [&] { csc::parallel::synthesize(dict, gamma, par_out); });
    const double t_adj = seconds_per_call(repeats, [&] { csc::parallel::adjoint(dict, x, par_adj); });
    std::cout << "parallel/" << t << " synthesize " << t_syn * 1e3 << " ms (x" << t_ref_syn / t_syn
              << "), adjoint " << t_adj * 1e3 << " ms (x" << t_ref_adj / t_adj << ")\n";
  }
  std::cout << "max relative difference: synthesize " << max_rel_diff(ref_out, par_out) << ", adjoint "
            << max_rel_diff(ref_adj, par_adj) << "\n";
  return 0;
}
