#include <cmath>

#include "doctest.h"
#include "nmqfi/quadrature.hpp"

using namespace nmqfi;

TEST_CASE("simpson integrates smooth real and complex functions") {
  CHECK(simpson<double>([](double x) { return std::sin(x); }, 0.0, kPi) == doctest::Approx(2.0).epsilon(1e-12));
  const Complex z = simpson<Complex>([](double x) { return std::polar(1.0, 3.0 * x); }, 0.0, 1.0);
  const Complex exact = (std::polar(1.0, 3.0) - 1.0) / Complex{0.0, 3.0};
  CHECK(std::abs(z - exact) < 1e-12);
  CHECK(simpson<double>([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("simpson_piecewise handles kinks at breakpoints") {
  const double breaks[] = {-1.0, 0.0, 2.0};
  const double v = simpson_piecewise<double>([](double x) { return std::abs(x); }, breaks);
  CHECK(v == doctest::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("simpson reports non-convergence") {
  QuadratureOptions opt;
  opt.max_intervals = 64;
  opt.rel_tol = 1e-15;
  CHECK_THROWS_AS(simpson<double>([](double x) { return std::sin(1e4 * x) * std::sqrt(x); }, 0.0, 1.0, opt),
                  NumericalError);
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 12}) {
    GaussLegendre gl(n);
    double s = 0.0;
    const int deg = 2 * n - 2;  // even power, nonzero integral
    for (int i = 0; i < n; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], deg);
    CHECK(s == doctest::Approx(2.0 / (deg + 1)).epsilon(1e-13));
  }
}

TEST_CASE("golden-section maximum of a unimodal function") {
  const auto r = golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0, 1e-8);
  CHECK(r.x == doctest::Approx(0.3).epsilon(1e-7));
}

TEST_CASE("simpson terminates when the integral cancels to zero") {
  const auto v = simpson<Complex>([](double s) { return std::polar(1.0, s); }, 0.0, 2.0 * M_PI);
  CHECK(std::abs(v) < 1e-12);
  const double z = simpson<double>([](double s) { return std::sin(3.0 * s); }, -1.0, 1.0);
  CHECK(std::abs(z) < 1e-12);
}
