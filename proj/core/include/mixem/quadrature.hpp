#pragma once

#include <functional>
#include <vector>

namespace mixem {

struct QuadratureSettings {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// Integration window half-width around the density location used by
  /// the population-map integrals; exp(-40) ~ 4e-18 bounds the cut tail.
  double tail_halfwidth = 40.0;
  int max_subdivisions = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

/// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b].
/// Panels are bisected worst-error-first until the summed error
/// estimate drops below max(abs_tol, rel_tol * |integral|). Throws
/// numerical_error (carrying the achieved estimate) if the subdivision
/// budget runs out first.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureSettings& settings = {});

/// Same, but pre-splits the interval at the given breakpoints (interior
/// kinks of a piecewise-smooth integrand). Breakpoints outside (a, b)
/// are ignored; duplicates are fine.
QuadratureResult integrate_with_breakpoints(
    const std::function<double(double)>& f, double a, double b,
    std::vector<double> breakpoints, const QuadratureSettings& settings = {});

}  // namespace mixem
