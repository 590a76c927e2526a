#include "mixem/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixem/errors.hpp"

namespace mixem {

namespace {

void check_finite(double lambda, double mu, const char* op) {
  if (!std::isfinite(lambda) || !std::isfinite(mu)) {
    throw std::invalid_argument(std::string(op) + ": non-finite input");
  }
}

void check_tail(const QuadratureSettings& st) {
  if (!(st.tail_halfwidth >= 10.0)) {
    throw std::invalid_argument("tail_halfwidth must be >= 10");
  }
}

// (|x + t| - |x - t|) / 2 collapses to a clamp: sign(t) * clamp(x, -|t|, |t|).
double tanh_arg(double x, double t) {
  const double a = std::abs(t);
  const double c = std::clamp(x, -a, a);
  return t < 0.0 ? -c : c;
}

// tanh(u1) - tanh(u2) without cancellation; u1, u2 are tanh_arg values.
double tanh_diff(double u1, double u2) {
  if (std::abs(u1) > 350.0 || std::abs(u2) > 350.0) {
    return std::tanh(u1) - std::tanh(u2);
  }
  return std::sinh(u1 - u2) / (std::cosh(u1) * std::cosh(u2));
}

double laplace_density(double x, double mu) {
  return 0.5 * std::exp(-std::abs(x - mu));
}

// e^{-eta} coefficient of the closed form, spelled out term by term.
double closed_form_coefficient(double lambda) {
  const double th = std::tanh(lambda);
  const double ep = std::exp(lambda);
  const double em = std::exp(-lambda);
  return 0.5 * (th * (lambda + 1.0) * em + (lambda - 1.0) * ep +
                (lambda + 1.0) * em - (lambda - 1.0) * ep * th);
}

}  // namespace

double em_map_quadrature(double lambda, double mu,
                         const QuadratureSettings& settings) {
  check_finite(lambda, mu, "em_map_quadrature");
  check_tail(settings);
  const auto f = [lambda, mu](double x) {
    return x * std::tanh(tanh_arg(x, lambda)) * laplace_density(x, mu);
  };
  const double a = mu - settings.tail_halfwidth;
  const double b = mu + settings.tail_halfwidth;
  return integrate_with_breakpoints(f, a, b, {-lambda, lambda, -mu, mu},
                                    settings)
      .value;
}

double em_map_deviation(double lambda, double mu,
                        const QuadratureSettings& settings) {
  check_finite(lambda, mu, "em_map_deviation");
  check_tail(settings);
  // x (T_lambda(x) - T_mu(x)) L(x; mu): subtracting the fixed-point
  // integrand (whose integral is exactly mu) leaves a single-signed
  // integrand proportional to lambda - mu, so relative tolerance holds
  // all the way down to machine-size gaps.
  const auto f = [lambda, mu](double x) {
    const double u1 = tanh_arg(x, lambda);
    const double u2 = tanh_arg(x, mu);
    return x * tanh_diff(u1, u2) * laplace_density(x, mu);
  };
  const double a = mu - settings.tail_halfwidth;
  const double b = mu + settings.tail_halfwidth;
  QuadratureSettings st = settings;
  st.abs_tol = 1e-300;  // relative target only; the gap sets the scale
  return integrate_with_breakpoints(f, a, b, {-lambda, lambda, -mu, mu}, st)
      .value;
}

double em_map_ratio_form(double lambda, double mu,
                         const QuadratureSettings& settings) {
  check_finite(lambda, mu, "em_map_ratio_form");
  check_tail(settings);
  // Responsibility of the +lambda component under the two-component
  // mixture, evaluated as a logistic in the clamp variable.
  const auto resp = [lambda](double x) {
    const double u = tanh_arg(x, lambda);
    return 1.0 / (1.0 + std::exp(-2.0 * u));
  };
  const auto mix = [mu](double x) {
    return 0.5 * (laplace_density(x, mu) + laplace_density(x, -mu));
  };
  const double r = std::max(std::abs(lambda), std::abs(mu)) +
                   settings.tail_halfwidth;
  const std::vector<double> kinks{-lambda, lambda, -mu, mu};
  const double num =
      integrate_with_breakpoints(
          [&](double x) { return x * resp(x) * mix(x); }, -r, r, kinks,
          settings)
          .value;
  const double den =
      integrate_with_breakpoints(
          [&](double x) { return resp(x) * mix(x); }, -r, r, kinks, settings)
          .value;
  if (!(std::abs(den) > 1e-300)) {
    throw numerical_error("em_map_ratio_form: vanishing denominator", den);
  }
  return num / den;
}

double em_map_closed(double lambda, double eta) {
  if (!std::isfinite(lambda) || !std::isfinite(eta) || lambda <= 0.0 ||
      lambda >= eta) {
    throw std::invalid_argument("em_map_closed: requires 0 < lambda < eta");
  }
  return closed_form_coefficient(lambda) * std::exp(-eta) +
         std::tanh(lambda) * eta;
}

double dM_dlambda_closed(double lambda, double mu) {
  if (!std::isfinite(lambda) || !std::isfinite(mu) || lambda <= 0.0 ||
      mu <= 0.0) {
    throw std::invalid_argument("dM_dlambda_closed: requires lambda, mu > 0");
  }
  const auto case_below = [](double l, double m) {
    const double ch = std::cosh(l);
    return (l + 1.0) * std::exp(-l) * std::cosh(m) / (ch * ch);
  };
  const auto case_above = [](double l, double m) {
    const double s = std::exp(l) + std::exp(-l);
    return 2.0 / (s * s) *
           (std::exp(-m) *
                ((l + 1.0) * std::exp(-l) - (l - 1.0) * std::exp(l)) +
            2.0 * m);
  };
  if (mu < lambda) return case_below(lambda, mu);
  if (mu > lambda) return case_above(lambda, mu);
  const double c1 = case_below(lambda, mu);
  const double c2 = case_above(lambda, mu);
  if (std::abs(c1 - c2) > 1e-10 * std::max(1.0, std::abs(c1))) {
    throw numerical_error("dM_dlambda_closed: branch mismatch at lambda == mu",
                          std::abs(c1 - c2));
  }
  return c1;
}

double dM_deta_closed(double lambda, double eta) {
  if (!std::isfinite(lambda) || !std::isfinite(eta) || lambda <= 0.0 ||
      lambda >= eta) {
    throw std::invalid_argument("dM_deta_closed: requires 0 < lambda < eta");
  }
  return std::tanh(lambda) - closed_form_coefficient(lambda) * std::exp(-eta);
}

ContractionConstants contraction_constants(double lambda0, double mu_star) {
  if (!std::isfinite(lambda0) || !std::isfinite(mu_star) || lambda0 <= 0.0 ||
      mu_star <= 0.0) {
    throw std::invalid_argument(
        "contraction_constants: requires lambda0, mu_star > 0");
  }
  const double kappa1 =
      (mu_star + 1.0) * std::exp(-mu_star) / std::cosh(mu_star);
  const double kappa2 = 2.0 *
                        (lambda0 * std::exp(-lambda0) + std::exp(-lambda0)) /
                        (std::exp(lambda0) + std::exp(-lambda0));
  return {kappa1, kappa2, std::max(kappa1, kappa2)};
}

PopulationTrajectory run_population_em(double lambda0, double mu_star,
                                       int max_iters, double tol,
                                       const QuadratureSettings& settings) {
  check_finite(lambda0, mu_star, "run_population_em");
  if (max_iters < 1) {
    throw std::invalid_argument("run_population_em: max_iters must be >= 1");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("run_population_em: tol must be positive");
  }

  PopulationTrajectory traj;
  traj.mu_star = mu_star;
  traj.lambda0 = lambda0;
  traj.iterates.push_back(lambda0);
  if (lambda0 > 0.0 && mu_star > 0.0) {
    const ContractionConstants c = contraction_constants(lambda0, mu_star);
    traj.kappa1 = c.kappa1;
    traj.kappa2 = c.kappa2;
    traj.kappa = c.kappa;
  } else if (lambda0 < 0.0 && mu_star < 0.0) {
    // Mirror of the positive-quadrant case (M is odd in lambda and the
    // mixture is even in its parameter).
    const ContractionConstants c = contraction_constants(-lambda0, -mu_star);
    traj.kappa1 = c.kappa1;
    traj.kappa2 = c.kappa2;
    traj.kappa = c.kappa;
  } else {
    traj.kappa1 = traj.kappa2 = traj.kappa =
        std::numeric_limits<double>::quiet_NaN();
  }

  double lambda = lambda0;
  for (int t = 0; t < max_iters; ++t) {
    const double gap = std::abs(lambda - mu_star);
    if (gap < tol) break;
    const double next = mu_star + em_map_deviation(lambda, mu_star, settings);
    traj.ratios.push_back(std::abs(next - mu_star) / gap);
    traj.iterates.push_back(next);
    lambda = next;
  }
  traj.converged = std::abs(lambda - mu_star) < tol;
  return traj;
}

}  // namespace mixem
