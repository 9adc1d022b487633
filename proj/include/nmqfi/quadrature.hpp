#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nmqfi/common.hpp"

namespace nmqfi {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-300;
  int min_intervals = 16;
  int max_intervals = 1 << 20;
};

namespace detail {
inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(Complex v) { return std::abs(v); }
}  // namespace detail

/// Composite Simpson rule with node doubling. Function values are reused
/// between levels; the result is the Richardson-corrected final level.
template <class T, class F>
T simpson(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (b == a) return T{};
  int n = std::max(2, opt.min_intervals);
  if (n % 2) ++n;
  const double len = b - a;

  // Endpoints and odd/even interior sums are kept separately so each
  // doubling only evaluates the new midpoints.
  // The |f| sums give a scale for the stopping test, so integrals that cancel
  // to zero still terminate.
  const T fa = f(a), fb = f(b);
  T ends = fa + fb;
  double abs_ends = detail::magnitude(fa) + detail::magnitude(fb);
  T even{};  // interior nodes with even index (excluding endpoints)
  T odd{};   // nodes with odd index
  double abs_even = 0.0, abs_odd = 0.0;
  {
    const double h = len / n;
    for (int i = 1; i < n; ++i) {
      T v = f(a + i * h);
      if (i % 2) {
        odd += v;
        abs_odd += detail::magnitude(v);
      } else {
        even += v;
        abs_even += detail::magnitude(v);
      }
    }
  }
  auto estimate = [&](int intervals) {
    const double h = len / intervals;
    return (ends + 4.0 * odd + 2.0 * even) * (h / 3.0);
  };
  T prev = estimate(n);
  while (n < opt.max_intervals) {
    const int n2 = 2 * n;
    const double h2 = len / n2;
    T fresh{};
    double abs_fresh = 0.0;
    for (int i = 1; i < n2; i += 2) {
      T v = f(a + i * h2);
      fresh += v;
      abs_fresh += detail::magnitude(v);
    }
    even += odd;
    odd = fresh;
    abs_even += abs_odd;
    abs_odd = abs_fresh;
    n = n2;
    T cur = estimate(n);
    const double abs_integral = (abs_ends + 4.0 * abs_odd + 2.0 * abs_even) * (h2 / 3.0);
    const double diff = detail::magnitude(cur - prev);
    if (diff <= std::max(opt.abs_tol, opt.rel_tol * std::max(detail::magnitude(cur), 1e-4 * abs_integral))) {
      return cur + (cur - prev) / 15.0;
    }
    prev = cur;
  }
  throw NumericalError("simpson: no convergence on [" + std::to_string(a) + ", " +
                       std::to_string(b) + "]");
}

/// Piecewise Simpson over consecutive breakpoints (must be sorted, span [a, b]).
template <class T, class F>
T simpson_piecewise(F&& f, std::span<const double> breaks, const QuadratureOptions& opt = {}) {
  T total{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) total += simpson<T>(f, breaks[i], breaks[i + 1], opt);
  }
  return total;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
  explicit GaussLegendre(int n);
};

/// Maximize a unimodal function on [lo, hi] by golden-section search until
/// the bracket is narrower than rel_width * |center| (or abs_width).
struct GoldenResult {
  double x;
  double value;
  int evaluations;
};
GoldenResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                double rel_width, double abs_width = 0.0, int max_iter = 200);

}  // namespace nmqfi
