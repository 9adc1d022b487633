#include "nmqfi/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace nmqfi {

GaussLegendre::GaussLegendre(int n) : nodes(n), weights(n) {
  if (n < 1) throw DomainError("GaussLegendre: n must be >= 1");
  // Newton iteration on P_n from the Chebyshev initial guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n == 1) {
    nodes[0] = 0.0;
    weights[0] = 2.0;
  }
}

GoldenResult golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                double rel_width, double abs_width, int max_iter) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  int evals = 2;
  for (int it = 0; it < max_iter; ++it) {
    const double width = b - a;
    const double center = 0.5 * (a + b);
    if (width <= std::max(abs_width, rel_width * std::abs(center))) break;
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
    ++evals;
  }
  return f1 >= f2 ? GoldenResult{x1, f1, evals} : GoldenResult{x2, f2, evals};
}

}  // namespace nmqfi
