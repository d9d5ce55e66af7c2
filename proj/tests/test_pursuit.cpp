#include <doctest.h>

#include <cmath>

#include "csc/denoise.hpp"
#include "csc/errors.hpp"
#include "csc/pursuit.hpp"
#include "oracles.hpp"

using csc::ConvDictionary;
using csc::PursuitConfig;
using csc::Rng;
using csc::Tensor3;

namespace {

struct Instance {
  ConvDictionary dict;
  Tensor3 x;
};

Instance small_instance(Rng& rng) {
  const std::size_t m = 1 + rng.below(3);
  const std::size_t n = 2 + rng.below(2);
  const std::size_t s = 1 + rng.below(2);
  const std::size_t p = rng.below((n + 1) / 2);
  ConvDictionary d = ConvDictionary::random(m, n, 1, s, p, rng);
  const std::size_t rh = 2 + rng.below(2);
  const std::size_t rw = 2 + rng.below(2);
  const csc::DictGeometry g = d.geometry_for_rep(rh, rw);
  return {std::move(d), csc::random_gaussian(g.out_height, g.out_width, 1, rng)};
}

// Plain gradient descent on 0.5 ||M g - x||^2 with the dense matrix.
std::vector<double> dense_gradient_descent(const oracle::Dense& m, const std::vector<double>& x, double step,
                                           int iters) {
  std::vector<double> g(m.cols, 0.0);
  for (int it = 0; it < iters; ++it) {
    std::vector<double> r = m.apply(g);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= x[i];
    const std::vector<double> grad = m.apply_transpose(r);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= step * grad[i];
  }
  return g;
}

}  // namespace

TEST_CASE("lipschitz estimate") {
  Rng rng(1);
  CHECK(csc::estimate_lipschitz(ConvDictionary::identity(), 4, 4, 20, rng) == doctest::Approx(1.0).epsilon(1e-6));

  const ConvDictionary scalar(1, 1, 1, 1, 0, {3.0f});
  CHECK(csc::estimate_lipschitz(scalar, 5, 3, 20, rng) == doctest::Approx(9.0).epsilon(1e-6));

  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = small_instance(rng);
    const std::size_t rh = inst.dict.rep_extent(inst.x.height());
    const std::size_t rw = inst.dict.rep_extent(inst.x.width());
    const double dense = oracle::dense_top_eigenvalue(oracle::synthesis_matrix(inst.dict, rh, rw));
    Rng power(trial);
    const double est = csc::estimate_lipschitz(inst.dict, rh, rw, 200, power);
    CHECK(std::fabs(est - dense) <= 0.01 * dense);

    ConvDictionary scaled = inst.dict;
    for (float& v : scaled.data()) v *= 2.5f;
    Rng power2(trial);
    CHECK(csc::estimate_lipschitz(scaled, rh, rw, 200, power2) == doctest::Approx(6.25 * est).epsilon(1e-4));
  }
}

TEST_CASE("ista scalar case reaches the prox fixed point") {
  PursuitConfig cfg;
  cfg.rule = csc::L1Penalty{1.0};
  cfg.max_iters = 200;
  const Tensor3 x(1, 1, 1, {5.0f});
  const csc::PursuitTrace t = csc::ista(ConvDictionary::identity(), x, cfg);
  CHECK(std::fabs(t.gamma[0] - 4.0) <= 1e-6);
  CHECK(t.step == doctest::Approx(0.99).epsilon(1e-6));
  CHECK(t.objective.back() == doctest::Approx(0.5 + 4.0).epsilon(1e-9));
  CHECK(t.initial_objective == doctest::Approx(12.5));
}

TEST_CASE("ista objective is monotone and close to the subgradient oracle") {
  Rng rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    CAPTURE(trial);
    const Instance inst = small_instance(rng);
    const double lambda = 0.05 + 0.3 * rng.uniform();
    PursuitConfig cfg;
    cfg.rule = csc::L1Penalty{lambda};
    cfg.max_iters = 3000;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const csc::PursuitTrace t = csc::ista(inst.dict, inst.x, cfg);
    REQUIRE(t.iterations_run == 3000);
    double prev = t.initial_objective;
    bool monotone = true;
    for (double obj : t.objective) {
      if (obj > prev + 1e-7) monotone = false;
      prev = obj;
    }
    CHECK(monotone);

    const std::size_t rh = t.gamma.height();
    const std::size_t rw = t.gamma.width();
    const oracle::Dense mat = oracle::synthesis_matrix(inst.dict, rh, rw);
    const double l = oracle::dense_top_eigenvalue(mat);
    const double sub = oracle::subgradient_lasso(mat, oracle::to_vec(inst.x), lambda, 200000, 1.0 / l);
    const double final_obj = t.objective.back();
    CHECK(final_obj <= sub + 1e-3);
    CHECK(final_obj >= sub - 1e-3);
    // The library objective agrees with the dense evaluation of its own code.
    CHECK(oracle::lasso_objective(mat, oracle::to_vec(t.gamma), oracle::to_vec(inst.x), lambda) ==
          doctest::Approx(final_obj).epsilon(1e-5));
  }
}

TEST_CASE("zero penalty and full budgets reduce to gradient descent") {
  Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = small_instance(rng);
    const std::size_t rh = inst.dict.rep_extent(inst.x.height());
    const std::size_t rw = inst.dict.rep_extent(inst.x.width());
    const std::size_t m = inst.dict.atom_count();
    const oracle::Dense mat = oracle::synthesis_matrix(inst.dict, rh, rw);
    const double step = 0.9 / oracle::dense_top_eigenvalue(mat);
    const std::vector<double> gd = dense_gradient_descent(mat, oracle::to_vec(inst.x), step, 30);

    PursuitConfig cfg;
    cfg.max_iters = 30;
    cfg.step_size = step;
    for (const csc::SparsityRule& rule :
         {csc::SparsityRule{csc::L1Penalty{0.0}}, csc::SparsityRule{csc::L0Global{rh * rw * m}},
          csc::SparsityRule{csc::L0InfNeedle{m}}}) {
      cfg.rule = rule;
      const csc::PursuitTrace t = csc::pursue(inst.dict, inst.x, cfg);
      double diff = 0.0;
      for (std::size_t i = 0; i < gd.size(); ++i) diff = std::max(diff, std::fabs(gd[i] - t.gamma[i]));
      CHECK(diff <= 1e-5);
    }
  }
}

TEST_CASE("iht keeps every iterate inside its budget") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const ConvDictionary d = ConvDictionary::random(4 + rng.below(5), 3 + rng.below(3), 1, 1, 1, rng);
    const Tensor3 x = csc::random_gaussian(10, 10, 1, rng);
    PursuitConfig cfg;
    cfg.max_iters = 40;
    cfg.rule = trial % 2 == 0 ? csc::SparsityRule{csc::L0Global{1 + rng.below(30)}}
                              : csc::SparsityRule{csc::L0InfNeedle{rng.below(4)}};
    std::size_t violations = 0;
    int calls = 0;
    const csc::PursuitTrace t = csc::iht(d, x, cfg, [&](int it, const Tensor3& g, const Tensor3& syn) {
      ++calls;
      CHECK(it == calls);
      if (!csc::satisfies(g, cfg.rule)) ++violations;
      CHECK(syn == csc::synthesize(d, g));
    });
    CHECK(violations == 0);
    CHECK(calls == 40);
    CHECK(csc::satisfies(t.gamma, cfg.rule));
  }
}

TEST_CASE("iht with k = 0 returns zero") {
  Rng rng(3);
  const ConvDictionary d = ConvDictionary::random(3, 3, 1, 1, 1, rng);
  const Tensor3 x = csc::random_gaussian(6, 6, 1, rng);
  PursuitConfig cfg;
  cfg.rule = csc::L0Global{0};
  cfg.max_iters = 5;
  const csc::PursuitTrace t = csc::iht(d, x, cfg);
  CHECK(csc::sparsity_report(t.gamma).total_nnz == 0);
  CHECK(t.objective.back() == doctest::Approx(0.5 * csc::squared_norm(x)));
}

TEST_CASE("iht recovers a planted code over non-overlapping orthonormal atoms") {
  const ConvDictionary dct = csc::dct_dictionary(16, 4);
  const ConvDictionary blocks(16, 4, 1, 4, 0, std::vector<float>(dct.data().begin(), dct.data().end()));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const csc::SparseSample planted = csc::sample_sparse(4, 4, 16, csc::L0InfNeedle{2}, seed);
    const Tensor3 x = csc::synthesize(blocks, planted.gamma);
    PursuitConfig cfg;
    cfg.rule = csc::L0InfNeedle{2};
    cfg.max_iters = 20;
    const csc::PursuitTrace t = csc::iht(blocks, x, cfg);
    double diff = 0.0;
    for (std::size_t i = 0; i < t.gamma.size(); ++i) diff = std::max(diff, static_cast<double>(std::fabs(t.gamma[i] - planted.gamma[i])));
    CHECK(diff <= 1e-5);
  }
}

TEST_CASE("rule and solver mismatches are rejected") {
  const Tensor3 x(2, 2, 1);
  PursuitConfig cfg;
  cfg.rule = csc::L0Global{1};
  CHECK_THROWS_AS(csc::ista(ConvDictionary::identity(), x, cfg), csc::DomainError);
  cfg.rule = csc::L1Penalty{0.1};
  CHECK_THROWS_AS(csc::iht(ConvDictionary::identity(), x, cfg), csc::DomainError);
  cfg.step_size = -1.0;
  CHECK_THROWS_AS(csc::ista(ConvDictionary::identity(), x, cfg), csc::DomainError);
  cfg.step_size.reset();
  CHECK_THROWS_AS(csc::ista(ConvDictionary::identity(), Tensor3(2, 2, 3), cfg), csc::ShapeError);
}

TEST_CASE("objective tolerance stops early") {
  PursuitConfig cfg;
  cfg.rule = csc::L1Penalty{1.0};
  cfg.max_iters = 1000;
  cfg.objective_tol = 1e-9;
  const csc::PursuitTrace t = csc::ista(ConvDictionary::identity(), Tensor3(1, 1, 1, {5.0f}), cfg);
  CHECK(t.stop == csc::StopReason::ObjectiveTol);
  CHECK(t.iterations_run < 1000);
  CHECK(static_cast<int>(t.objective.size()) == t.iterations_run);
}

TEST_CASE("divergence carries the partial trace") {
  Rng rng(6);
  const ConvDictionary d = ConvDictionary::random(4, 3, 1, 1, 1, rng);
  const Tensor3 x = csc::random_gaussian(8, 8, 1, rng);
  PursuitConfig cfg;
  cfg.rule = csc::L0InfNeedle{4};
  cfg.step_size = 1e6;
  cfg.max_iters = 100;
  try {
    csc::iht(d, x, cfg);
    FAIL("expected divergence");
  } catch (const csc::DivergenceError& e) {
    CHECK(e.iteration() >= 1);
    CHECK(static_cast<int>(e.partial_objective().size()) == e.iteration() - 1);
  }
}

TEST_CASE("warm start resumes from the given code") {
  Rng rng(12);
  const ConvDictionary d = ConvDictionary::random(3, 3, 1, 1, 1, rng);
  const Tensor3 x = csc::random_gaussian(6, 6, 1, rng);
  PursuitConfig cfg;
  cfg.rule = csc::L1Penalty{0.1};
  cfg.step_size = 0.1;
  cfg.max_iters = 10;
  const csc::PursuitTrace first = csc::ista(d, x, cfg);
  const csc::PursuitTrace resumed = csc::ista(d, x, cfg, {}, &first.gamma);
  cfg.max_iters = 20;
  const csc::PursuitTrace straight = csc::ista(d, x, cfg);
  CHECK(resumed.gamma == straight.gamma);
  CHECK(resumed.initial_objective == doctest::Approx(first.objective.back()));
}

TEST_CASE("layered thresholding") {
  Rng rng(8);
  SUBCASE("single layer equals one projected correlation") {
    const ConvDictionary d = ConvDictionary::random(5, 3, 1, 1, 1, rng);
    const csc::MlCscModel model({{d, csc::L0InfNeedle{2}}});
    const Tensor3 x = csc::random_gaussian(7, 7, 1, rng);
    const auto codes = csc::layered_thresholding(model, x);
    REQUIRE(codes.size() == 1);
    CHECK(codes[0] == csc::project_l0inf_needle(csc::adjoint(d, x), 2));
  }
  SUBCASE("two layers chain through the first code") {
    const ConvDictionary d1 = ConvDictionary::random(4, 3, 1, 1, 1, rng);
    const ConvDictionary d2 = ConvDictionary::random(6, 2, 4, 2, 0, rng);
    const csc::MlCscModel model({{d1, csc::L1Penalty{0.2}}, {d2, csc::L0Global{5}}});
    const Tensor3 x = csc::random_gaussian(8, 8, 1, rng);
    const auto codes = csc::layered_thresholding(model, x);
    REQUIRE(codes.size() == 2);
    const Tensor3 g1 = csc::soft_threshold(csc::adjoint(d1, x), 0.2);
    CHECK(codes[0] == g1);
    CHECK(codes[1] == csc::project_l0_global(csc::adjoint(d2, g1), 5));
    CHECK(codes[1].height() == 4);
  }
  SUBCASE("geometry failures name the layer") {
    const ConvDictionary d1 = ConvDictionary::random(2, 3, 1, 1, 1, rng);
    const ConvDictionary d2 = ConvDictionary::random(3, 2, 2, 2, 0, rng);
    const csc::MlCscModel model({{d1, csc::L0InfNeedle{1}}, {d2, csc::L0InfNeedle{1}}});
    try {
      csc::layered_thresholding(model, Tensor3(5, 5, 1));
      FAIL("expected a geometry error");
    } catch (const csc::CascadeGeometryError& e) {
      CHECK(e.layer() == 2);
    }
  }
}
