#pragma once

// Quadrature building blocks: Gauss-Legendre rules (fixed and composite)
// and a globally adaptive Gauss-Kronrod integrator over breakpoint lists,
// with semi-infinite end pieces mapped onto finite intervals.

#include <functional>
#include <vector>

namespace zeno::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Thread-safe, memoized.
const Rule& gauss_legendre(int n);

/// `panels` equal panels on [a, b], each with an `order`-point Gauss rule.
Rule composite_gauss(double a, double b, int panels, int order);

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  int intervals = 0;
};

struct AdaptiveOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-10;
  int max_intervals = 20000;
};

/// Integrates f over the union of consecutive breakpoint intervals.
/// The first/last breakpoint may be -inf/+inf. Breakpoints must be sorted.
/// Throws NumericsError when the tolerance cannot be met.
Result integrate(const std::function<double(double)>& f, const std::vector<double>& breakpoints,
                 const AdaptiveOptions& opts = {});

}  // namespace zeno::quad
