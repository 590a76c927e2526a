#include "mixem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "mixem/errors.hpp"

namespace mixem {

namespace {

// 15-point Kronrod nodes on [-1, 1] (positive half, last entry is the
// center) and weights; the embedded 7-point Gauss rule uses the
// odd-indexed nodes. Standard QUADPACK constants.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double result;
  double abserr;
};

bool operator<(const Panel& lhs, const Panel& rhs) {
  return lhs.abserr < rhs.abserr;  // max-heap on error
}

// One G7/K15 evaluation with the QUADPACK error estimator: the raw
// |K15 - G7| difference is sharpened through the integrand's deviation
// from its mean (resasc) and floored at roundoff level (resabs).
Panel qk15(const std::function<double(double)>& f, double a, double b) {
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);

  double fv1[7], fv2[7];
  const double fc = f(centr);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  for (int j = 0; j < 3; ++j) {
    const int jtw = 2 * j + 1;  // Gauss nodes sit at the odd Kronrod ones
    const double absc = hlgth * kXgk[jtw];
    const double f1 = f(centr - absc);
    const double f2 = f(centr + absc);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 4; ++j) {
    const int jtwm1 = 2 * j;
    const double absc = hlgth * kXgk[jtwm1];
    const double f1 = f(centr - absc);
    const double f2 = f(centr + absc);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }
  resabs *= std::abs(hlgth);
  resasc *= std::abs(hlgth);

  double abserr = std::abs((resk - resg) * hlgth);
  if (resasc != 0.0 && abserr != 0.0) {
    abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * eps)) {
    abserr = std::max(eps * 50.0 * resabs, abserr);
  }
  return Panel{a, b, resk * hlgth, abserr};
}

void validate(const QuadratureSettings& st) {
  if (!(st.abs_tol > 0.0) || !(st.rel_tol > 0.0)) {
    throw std::invalid_argument("quadrature: tolerances must be positive");
  }
  if (st.max_subdivisions < 1) {
    throw std::invalid_argument("quadrature: max_subdivisions must be >= 1");
  }
}

}  // namespace

QuadratureResult integrate_with_breakpoints(
    const std::function<double(double)>& f, double a, double b,
    std::vector<double> breakpoints, const QuadratureSettings& settings) {
  validate(settings);
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("quadrature: bounds must be finite");
  }
  if (a == b) return {};
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::vector<double> pts;
  pts.push_back(a);
  for (const double p : breakpoints) {
    if (p > a && p < b) pts.push_back(p);
  }
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::priority_queue<Panel> heap;
  double total = 0.0;
  double toterr = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    Panel p = qk15(f, pts[i], pts[i + 1]);
    total += p.result;
    toterr += p.abserr;
    heap.push(p);
  }

  int subdivisions = 0;
  while (toterr > std::max(settings.abs_tol,
                           settings.rel_tol * std::abs(total))) {
    if (subdivisions >= settings.max_subdivisions || heap.empty()) {
      throw numerical_error("quadrature did not converge within " +
                                std::to_string(settings.max_subdivisions) +
                                " subdivisions",
                            toterr);
    }
    const Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // Panel narrowed down to adjacent doubles; its contribution stays,
      // further refinement is impossible. Leave it out of the heap.
      continue;
    }
    const Panel left = qk15(f, worst.a, mid);
    const Panel right = qk15(f, mid, worst.b);
    total += left.result + right.result - worst.result;
    toterr += left.abserr + right.abserr - worst.abserr;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  return {sign * total, toterr, subdivisions};
}

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureSettings& settings) {
  return integrate_with_breakpoints(f, a, b, {}, settings);
}

}  // namespace mixem
