#pragma once

#include <vector>

#include "mixem/quadrature.hpp"

namespace mixem {

struct ContractionConstants {
  double kappa1;
  double kappa2;
  double kappa;
};

/// One population EM run for the symmetric two-component unit-scale
/// Laplacian mixture: iterates of lambda, per-step contraction ratios
/// |l^{t+1}-mu*| / |l^t-mu*|, and the theoretical constants. The kappa
/// fields are NaN when the contraction theorem's hypotheses (lambda0
/// and mu_star on the same side of zero, both nonzero) do not hold.
struct PopulationTrajectory {
  double mu_star = 0.0;
  double lambda0 = 0.0;
  std::vector<double> iterates;  // iterates[0] == lambda0
  std::vector<double> ratios;    // one per executed step
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa = 0.0;
  bool converged = false;
};

/// M(lambda, mu) via the symmetric single-integral form: the expectation
/// of x * tanh((|x+lambda| - |x-lambda|)/2) under the Laplacian centered
/// at mu, integrated adaptively with panel splits at the kinks.
double em_map_quadrature(double lambda, double mu,
                         const QuadratureSettings& settings = {});

/// M as the ratio of the two defining integrals (numerator/normalizer),
/// before the symmetry simplification. Agrees with em_map_quadrature.
double em_map_ratio_form(double lambda, double mu,
                         const QuadratureSettings& settings = {});

/// M(lambda, mu) - mu, computed as a single difference integral so the
/// result keeps full relative accuracy near the fixed point (where the
/// direct map value would drown the gap in quadrature noise).
double em_map_deviation(double lambda, double mu,
                        const QuadratureSettings& settings = {});

/// Closed form of M(lambda, eta) on 0 < lambda < eta.
double em_map_closed(double lambda, double eta);

/// dM/dlambda in closed form, both branches (mu < lambda and mu > lambda);
/// requires lambda, mu > 0. Strictly positive.
double dM_dlambda_closed(double lambda, double mu);

/// dM/deta of the closed form, tanh(lambda) - C(lambda) e^{-eta}, on
/// 0 < lambda < eta. Strictly positive.
double dM_deta_closed(double lambda, double eta);

/// kappa1(mu_star), kappa2(lambda0) and their max; all in (0, 1) for
/// positive arguments.
ContractionConstants contraction_constants(double lambda0, double mu_star);

/// Iterates lambda^{t+1} = M(lambda^t, mu_star) until |lambda - mu_star|
/// drops below tol or max_iters steps have run.
PopulationTrajectory run_population_em(double lambda0, double mu_star,
                                       int max_iters, double tol,
                                       const QuadratureSettings& settings = {});

}  // namespace mixem
