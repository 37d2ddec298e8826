#include "zeno/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>

#include "zeno/errors.hpp"

namespace zeno::quad {

namespace {

Rule compute_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    r.nodes[lo] = -x;
    r.nodes[hi] = x;
    r.weights[lo] = w;
    r.weights[hi] = w;
  }
  if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return r;
}

// Gauss-Kronrod 10/21 abscissae and weights.
constexpr double kXgk[11] = {0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
                             0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
                             0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
                             0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
                             0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
                             0.0};
constexpr double kWgk[11] = {0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
                             0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
                             0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
                             0.123491976262065851077208980161776, 0.134709217311473325928054001771707,
                             0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
                             0.149445554002916905664936468389821};
constexpr double kWg[5] = {0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
                           0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
                           0.295524224714752870173892994651338};

// Maps t in [0, 1) to [origin, +/-inf) with length scale max(1, |origin|),
// so a 1/x^2 tail far from zero stays flat in t.
struct Piece {
  double a, b;        // integration variable range
  int tail;           // 0 finite, +1 right tail, -1 left tail
  double origin;
  double value, error;
  bool operator<(const Piece& o) const { return error < o.error; }
};

double eval_mapped(const std::function<double(double)>& f, const Piece& p, double t) {
  if (p.tail == 0) return f(t);
  const double s = 1.0 - t;
  const double len = std::max(1.0, std::abs(p.origin));
  const double x = p.origin + p.tail * len * t / s;
  const double v = f(x);
  return v == 0.0 ? 0.0 : v * len / (s * s);
}

void gk21(const std::function<double(double)>& f, Piece& p, int& evals) {
  const double c = 0.5 * (p.a + p.b);
  const double h = 0.5 * (p.b - p.a);
  const double fc = eval_mapped(f, p, c);
  double kron = fc * kWgk[10];
  double gauss = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = eval_mapped(f, p, c - dx);
    const double f2 = eval_mapped(f, p, c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  evals += 21;
  p.value = kron * h;
  p.error = std::abs((kron - gauss) * h);
  if (!std::isfinite(p.value)) throw NumericsError("non-finite integrand value");
}

}  // namespace

const Rule& gauss_legendre(int n) {
  if (n < 1) throw ValidationError("Gauss-Legendre order must be positive");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule>(compute_gauss_legendre(n));
  return *slot;
}

Rule composite_gauss(double a, double b, int panels, int order) {
  if (panels < 1) throw ValidationError("composite rule needs at least one panel");
  const Rule& g = gauss_legendre(order);
  Rule r;
  r.nodes.reserve(static_cast<std::size_t>(panels * order));
  r.weights.reserve(static_cast<std::size_t>(panels * order));
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int k = 0; k < order; ++k) {
      r.nodes.push_back(lo + 0.5 * h * (g.nodes[static_cast<std::size_t>(k)] + 1.0));
      r.weights.push_back(0.5 * h * g.weights[static_cast<std::size_t>(k)]);
    }
  }
  return r;
}

Result integrate(const std::function<double(double)>& f, const std::vector<double>& breakpoints,
                 const AdaptiveOptions& opts) {
  if (breakpoints.size() < 2) throw ValidationError("integration needs at least two breakpoints");
  std::priority_queue<Piece> heap;
  Result res;
  double total = 0.0, total_err = 0.0;
  auto push = [&](Piece p) {
    gk21(f, p, res.evaluations);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  };
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double lo = breakpoints[k], hi = breakpoints[k + 1];
    if (!(lo <= hi)) throw ValidationError("breakpoints must be sorted");
    if (lo == hi) continue;
    if (std::isinf(lo) && std::isinf(hi)) throw ValidationError("doubly infinite piece needs a finite split");
    if (std::isinf(hi)) push({0.0, 1.0, +1, lo, 0, 0});
    else if (std::isinf(lo)) push({0.0, 1.0, -1, hi, 0, 0});
    else push({lo, hi, 0, 0.0, 0, 0});
  }
  while (!heap.empty() && total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (heap.top().error == 0.0) break;
    if (static_cast<int>(heap.size()) >= opts.max_intervals)
      throw NumericsError("adaptive quadrature hit the interval limit", total_err);
    Piece p = heap.top();
    heap.pop();
    total -= p.value;
    total_err -= p.error;
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      // Interval cannot be split further; accept its estimate.
      total += p.value;
      p.error = 0.0;
      heap.push(p);
      continue;
    }
    push({p.a, mid, p.tail, p.origin, 0, 0});
    push({mid, p.b, p.tail, p.origin, 0, 0});
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  res.value = 0.0;
  res.error = 0.0;
  res.intervals = static_cast<int>(heap.size());
  while (!heap.empty()) {
    res.value += heap.top().value;
    res.error += heap.top().error;
    heap.pop();
  }
  return res;
}

}  // namespace zeno::quad
