#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mixem/errors.hpp"
#include "mixem/population.hpp"

using namespace mixem;

// Reference values below were frozen from an independent high-precision
// evaluation of the defining integrals.

TEST_CASE("em map matches its frozen reference value") {
  CHECK(std::abs(em_map_quadrature(0.5, 1.0) - 0.6252383749876061) <= 1e-9);
}

TEST_CASE("the map vanishes at lambda zero and fixes mu") {
  CHECK(em_map_quadrature(0.0, 1.7) == 0.0);
  CHECK(em_map_deviation(1.3, 1.3) == 0.0);
  CHECK(std::abs(em_map_quadrature(0.8, 0.8) - 0.8) <= 1e-9);
}

TEST_CASE("the map is odd in lambda and even in mu") {
  for (const double lambda : {0.3, 1.1}) {
    for (const double mu : {0.6, 2.2}) {
      const double m = em_map_quadrature(lambda, mu);
      CHECK(std::abs(em_map_quadrature(-lambda, mu) + m) <= 1e-9);
      CHECK(std::abs(em_map_quadrature(lambda, -mu) - m) <= 1e-9);
    }
  }
}

TEST_CASE("ratio form and symmetric form agree") {
  for (const double lambda : {0.2, 0.7, 1.5}) {
    for (const double mu : {0.4, 1.0, 2.5}) {
      const double a = em_map_quadrature(lambda, mu);
      const double b = em_map_ratio_form(lambda, mu);
      CHECK(std::abs(a - b) <= 1e-8);
    }
  }
}

TEST_CASE("closed form agrees with quadrature on its domain") {
  CHECK(em_map_closed(0.1, 8.0) ==
        doctest::Approx(0.7973773362271727).epsilon(1e-12));
  for (const double lambda : {0.1, 0.5, 1.0}) {
    for (const double eta : {lambda + 0.5, lambda + 2.0}) {
      CHECK(std::abs(em_map_closed(lambda, eta) -
                     em_map_quadrature(lambda, eta)) <= 1e-8);
    }
  }
}

TEST_CASE("deviation form is consistent with the direct map") {
  for (const double lambda : {0.05, 0.5, 1.0, 3.0}) {
    for (const double mu : {0.3, 1.0, 2.0}) {
      const double direct = em_map_quadrature(lambda, mu) - mu;
      CHECK(std::abs(em_map_deviation(lambda, mu) - direct) <= 1e-8);
    }
  }
}

TEST_CASE("deviation keeps relative accuracy at tiny gaps") {
  const double mu = 1.0;
  for (const double nominal : {1e-6, 1e-10, 1e-13}) {
    const double lambda = mu - nominal;
    // mu - nominal rounds, so measure against the gap actually encoded
    // in lambda, not the nominal one (they differ by up to half an ulp
    // of mu, which is 5e-7 of the gap at 1e-10).
    const double gap = mu - lambda;
    const double dev = em_map_deviation(lambda, mu);
    // Near the fixed point the map is differentiable with slope
    // dM/dlambda(mu, mu), so dev ~ -slope * gap up to a curvature term
    // of order gap^2.
    const double slope = dM_dlambda_closed(mu, mu);
    CHECK(dev < 0.0);
    CHECK(std::abs(dev + slope * gap) <= 1e-6 * slope * gap + gap * gap);
  }
}

TEST_CASE("closed-form derivatives match frozen references") {
  CHECK(dM_dlambda_closed(2.0, 1.0) ==
        doctest::Approx(0.04426272511874111).epsilon(1e-12));
  CHECK(dM_dlambda_closed(1.0, 2.0) ==
        doctest::Approx(0.8608579744867384).epsilon(1e-12));
  CHECK(dM_deta_closed(0.5, 1.0) ==
        doctest::Approx(0.2989959395324132).epsilon(1e-12));
}

TEST_CASE("closed-form derivatives match finite differences of the map") {
  const double h = 1e-4;
  for (const auto& [lambda, mu] : {std::pair{0.6, 1.4}, std::pair{1.8, 0.9}}) {
    const double fd =
        (em_map_quadrature(lambda + h, mu) - em_map_quadrature(lambda - h, mu)) /
        (2.0 * h);
    CHECK(dM_dlambda_closed(lambda, mu) == doctest::Approx(fd).epsilon(1e-5));
  }
  const double lambda = 0.5, eta = 1.5;
  const double fd =
      (em_map_closed(lambda, eta + h) - em_map_closed(lambda, eta - h)) /
      (2.0 * h);
  CHECK(dM_deta_closed(lambda, eta) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("derivative branches join continuously at lambda == mu") {
  const double at = dM_dlambda_closed(1.0, 1.0);
  CHECK(at == doctest::Approx(dM_dlambda_closed(1.0, 1.0 - 1e-9)).epsilon(1e-6));
  CHECK(at == doctest::Approx(dM_dlambda_closed(1.0, 1.0 + 1e-9)).epsilon(1e-6));
}

TEST_CASE("contraction constants") {
  const ContractionConstants c = contraction_constants(1.0, 1.0);
  CHECK(c.kappa1 == doctest::Approx(0.47681168808847024).epsilon(1e-15));
  CHECK(c.kappa2 == doctest::Approx(c.kappa1).epsilon(1e-15));
  CHECK(c.kappa == c.kappa1);

  // kappa1 and kappa2 are the same function of their argument.
  for (const double t : {0.05, 0.3, 1.0, 2.5, 7.0}) {
    const ContractionConstants cc = contraction_constants(t, t);
    CHECK(cc.kappa1 == doctest::Approx(cc.kappa2).epsilon(1e-14));
    CHECK(cc.kappa1 > 0.0);
    CHECK(cc.kappa1 < 1.0);
  }

  // The rate degrades to 1 as the separation vanishes.
  const ContractionConstants weak = contraction_constants(1e-6, 1e-6);
  CHECK(weak.kappa > 0.999);
  CHECK(weak.kappa < 1.0);

  CHECK_THROWS_AS(contraction_constants(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(contraction_constants(1.0, -1.0), std::invalid_argument);
}

// Tolerance 1e-9 on purpose: iterates near mu* = 1 are quantized to
// multiples of ulp(1), so a step measured at gap g carries ratio noise
// of about 2e-16 / g. Stopping at 1e-9 keeps that below the 1e-6
// allowance; running to 1e-13 would drown the late ratios in rounding.
TEST_CASE("population em contracts below mu star") {
  const PopulationTrajectory t = run_population_em(0.5, 1.0, 60, 1e-9);
  CHECK(t.converged);
  CHECK(t.iterates.front() == 0.5);
  CHECK(t.iterates.size() == t.ratios.size() + 1);
  const ContractionConstants c = contraction_constants(0.5, 1.0);
  CHECK(t.kappa1 == c.kappa1);
  CHECK(t.kappa2 == c.kappa2);
  CHECK(t.kappa == c.kappa);
  for (const double r : t.ratios) {
    CHECK(r > 0.0);
    CHECK(r <= t.kappa + 1e-6);
  }
  CHECK(std::abs(t.iterates.back() - 1.0) < 1e-9);
}

TEST_CASE("population em contracts from above as well") {
  const PopulationTrajectory t = run_population_em(2.0, 1.0, 60, 1e-9);
  CHECK(t.converged);
  for (const double r : t.ratios) CHECK(r <= t.kappa + 1e-6);
}

TEST_CASE("negative quadrant mirrors the positive one") {
  const PopulationTrajectory pos = run_population_em(0.5, 1.0, 20, 1e-13);
  const PopulationTrajectory neg = run_population_em(-0.5, -1.0, 20, 1e-13);
  CHECK(neg.kappa == pos.kappa);
  REQUIRE(neg.iterates.size() == pos.iterates.size());
  for (std::size_t i = 0; i < pos.iterates.size(); ++i) {
    CHECK(std::abs(neg.iterates[i] + pos.iterates[i]) <= 1e-9);
  }
}

TEST_CASE("mixed signs fall outside the contraction guarantee") {
  const PopulationTrajectory t = run_population_em(-0.5, 1.0, 10, 1e-13);
  CHECK(std::isnan(t.kappa));
  CHECK(std::isnan(t.kappa1));
  CHECK_FALSE(t.converged);
  CHECK(t.iterates[1] == doctest::Approx(-0.6252383749876061).epsilon(1e-8));
}

TEST_CASE("the origin is a fixed point that never escapes") {
  const PopulationTrajectory t = run_population_em(0.0, 1.0, 5, 1e-13);
  CHECK_FALSE(t.converged);
  for (const double it : t.iterates) CHECK(std::abs(it) <= 1e-9);
  for (const double r : t.ratios) CHECK(r == doctest::Approx(1.0));
}

TEST_CASE("starting at the fixed point is a zero-step run") {
  const PopulationTrajectory t = run_population_em(1.0, 1.0, 5, 1e-13);
  CHECK(t.converged);
  CHECK(t.iterates.size() == 1);
  CHECK(t.ratios.empty());
}

TEST_CASE("population inputs are validated") {
  CHECK_THROWS_AS(em_map_closed(-1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(em_map_closed(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dM_deta_closed(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(dM_dlambda_closed(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(run_population_em(0.5, 1.0, 0, 1e-13),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_population_em(0.5, 1.0, 10, 0.0), std::invalid_argument);
  QuadratureSettings st;
  st.tail_halfwidth = 5.0;
  CHECK_THROWS_AS(em_map_quadrature(0.5, 1.0, st), std::invalid_argument);
}
