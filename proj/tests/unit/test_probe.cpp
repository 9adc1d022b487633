#include <cmath>
#include <random>

#include "doctest.h"
#include "nmqfi/probe.hpp"
#include "oracles.hpp"

using namespace nmqfi;

namespace {

ResponseFunction resonant(double k, double t_end, int n = 4096) {
  return solve_response(DiscreteBath({{k * k, 1.0, 0.0}}, 1.0), {0.0, t_end, n});
}

DiscreteBath mixed_bath() {
  return DiscreteBath({{0.04, 0.6, 0.0}, {0.02, 1.3, 1.0}, {0.03, 2.1, 0.3}}, 1.0);
}

}  // namespace

TEST_CASE("force modulation kinds") {
  const auto c = ForceModulation::constant(2.0, 1.0, 3.0);
  CHECK(c.value(0.5) == 0.0);
  CHECK(c.value(2.0) == 2.0);
  CHECK(c.derivative(2.0) == 0.0);
  CHECK(c.value(3.5) == 0.0);

  const auto s = ForceModulation::sinusoid(1.5, 2.0, 0.3, 0.0, 10.0);
  CHECK(s.value(1.0) == doctest::Approx(1.5 * std::sin(2.3)));
  CHECK(s.derivative(1.0) == doctest::Approx(3.0 * std::cos(2.3)));

  const auto g = ForceModulation::gaussian_pulse(5.0, 0.5, 2.0, 0.0, 10.0);
  CHECK(g.value(5.0) == doctest::Approx(2.0));
  CHECK(g.value(5.5) == doctest::Approx(2.0 * std::exp(-0.5)));
  CHECK(g.derivative(5.5) == doctest::Approx(-2.0 * std::exp(-0.5) * 0.5 / 0.25));

  const auto t = ForceModulation::table({{0.0, 0.0}, {1.0, 2.0}, {3.0, 1.0}});
  CHECK(t.value(0.5) == doctest::Approx(1.0));
  CHECK(t.value(2.0) == doctest::Approx(1.5));
  CHECK(t.derivative(0.5) == doctest::Approx(2.0));
  CHECK(t.derivative(2.0) == doctest::Approx(-0.5));
  CHECK(t.value(4.0) == 0.0);
  const auto bp = t.breakpoints(0.5, 5.0);
  REQUIRE(bp.size() == 3);
  CHECK(bp.front() == 0.5);
  CHECK(bp[1] == 1.0);
  CHECK(bp.back() == 3.0);
  CHECK(c.breakpoints(4.0, 5.0).empty());

  CHECK_THROWS_AS(ForceModulation::constant(1.0, 2.0, 1.0), DomainError);
  CHECK_THROWS_AS(ForceModulation::table({{0.0, 1.0}}), DomainError);
  CHECK_THROWS_AS(ForceModulation::gaussian_pulse(0.0, 0.0, 1.0, -1.0, 1.0), DomainError);
}

TEST_CASE("initial states") {
  const auto v = GaussianProbeInit::vacuum();
  CHECK(v.is_pure());
  CHECK(v.energy() == doctest::Approx(0.5));
  const auto sq = GaussianProbeInit::squeezed(1.0, 0.0);
  CHECK(sq.variance(0.0) == doctest::Approx(std::exp(2.0) / 2));
  CHECK(sq.variance(kPi / 2) == doctest::Approx(std::exp(-2.0) / 2));
  CHECK(sq.is_pure());
  CHECK(sq.covariance.max_variance_angle() == doctest::Approx(0.0).epsilon(1e-12));
  const auto rot = GaussianProbeInit::squeezed(0.7, 1.1);
  CHECK(rot.covariance.max_variance_angle() == doctest::Approx(1.1));
  CHECK(rot.is_pure());
  const auto coh = GaussianProbeInit::coherent({1.0, 0.5});
  CHECK(coh.mean_quadrature(0.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(coh.mean_quadrature(kPi / 2) == doctest::Approx(std::sqrt(2.0) * 0.5));
  CHECK(coh.energy() == doctest::Approx(0.5 + 1.25));
  CHECK(GaussianProbeInit::thermal(2.0).energy() == doctest::Approx(2.5));
  GaussianProbeInit bad;
  bad.covariance = {0.1, 0.0, 0.1};
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad.covariance = {1.0, 2.0, 1.0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("covariance: theta sum rule and max-variance angle") {
  const Covariance2 c{1.3, 0.4, 0.6};
  for (double th : {0.0, 0.4, 1.9, 3.0}) CHECK(c.variance(th) + c.variance(th + kPi / 2) == doctest::Approx(c.trace()));
  const double m = c.max_variance_angle();
  double best = 0.0, best_v = -1.0;
  for (int i = 0; i < 7200; ++i) {
    const double th = kPi * i / 7200.0;
    if (c.variance(th) > best_v) best_v = c.variance(th), best = th;
  }
  CHECK(std::abs(m - best) < kPi / 7200.0 + 1e-12);
}

TEST_CASE("displacement: noiseless closed form and zero force") {
  const auto r = solve_response(DiscreteBath::noiseless(1.0), {0.0, 10.0, 100});
  const auto d = displacement_d(r, ForceModulation::constant(1.0, 0.0, 10.0), 1.0, {0.0, kPi});
  CHECK(d.magnitude() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(std::abs(d.value - Complex{0.0, -1.0} * (std::exp(Complex{0.0, kPi}) - 1.0)) < 1e-10);
  const auto z = displacement_d(r, ForceModulation::constant(1.0, 5.0, 6.0), 1.0, {0.0, 2.0});
  CHECK(z.value == Complex{});
  CHECK(z.phase == 0.0);
  for (double tau : {0.3, 1.7, 4.4}) {
    const auto dd = displacement_d(r, ForceModulation::constant(1.0, 0.0, 10.0), 1.0, {0.0, tau});
    CHECK(dd.magnitude() == doctest::Approx(2.0 * std::sin(tau / 2)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(displacement_d(r, ForceModulation::constant(1.0, 0.0, 20.0), 1.0, {0.0, 12.0}), CoverageError);
}

TEST_CASE("displacement: resonant mode against a 1e5-node exact-G quadrature") {
  const double k = 0.3;
  const auto r = resonant(k, 2.0, 512);
  const auto d = displacement_d(r, ForceModulation::constant(1.0, 0.0, 5.0), 1.0, {0.0, 1.0});
  const Complex ref = oracle::simpson_fixed<Complex>(
      [&](double u) { return std::exp(Complex{0.0, u}) * std::cos(k * (1.0 - u)); }, 0.0, 1.0, 100000);
  CHECK(std::abs(d.value - ref) <= 1e-7);
  // Shifted window and a non-trivial profile.
  const auto pulse = ForceModulation::gaussian_pulse(3.0, 0.4, 1.0, 2.0, 4.0);
  const auto dp = displacement_d(resonant(k, 6.0), pulse, 1.3, {1.0, 5.0});
  const Complex refp = 1.3 * oracle::simpson_fixed<Complex>(
                                 [&](double u) {
                                   return pulse.value(u) * std::exp(Complex{0.0, 1.3 * (u - 1.0)}) *
                                          std::cos(k * (5.0 - u));
                                 },
                                 2.0, 4.0, 100000);
  CHECK(std::abs(dp.value - refp) <= 1e-7);
  CHECK(dp.phase == doctest::Approx(std::fmod(std::arg(refp) + 2 * kPi, 2 * kPi)));
}

TEST_CASE("window variant: D over [t0,t] with zeta on [ti,tf] equals D(tf,ti) only without a bath") {
  const auto free = solve_response(DiscreteBath::noiseless(1.0), {0.0, 10.0, 100});
  const auto f = ForceModulation::constant(1.0, 2.0, 4.0);
  const auto wide = displacement_d(free, f, 1.0, {0.0, 7.0});
  const auto tight = displacement_d(free, f, 1.0, {2.0, 4.0});
  CHECK(wide.magnitude() == doctest::Approx(tight.magnitude()).epsilon(1e-10));
}

TEST_CASE("bath displacement D_n") {
  const double k = 0.4;
  const auto r = resonant(k, 3.0, 1024);
  const BathMode m{k * k, 1.0, 0.0};
  CHECK(bath_displacement_dn(r, ForceModulation::constant(1.0, 5.0, 6.0), m, 1.0, {0.0, 2.0}) == Complex{});
  CHECK(bath_displacement_dn(r, ForceModulation::constant(1.0, 0.0, 6.0), BathMode{0.0, 1.0, 0.0}, 1.0,
                             {0.0, 2.0}) == Complex{});
  // Independent nested quadrature with the closed-form G.
  const double t = 2.0;
  const Complex got = bath_displacement_dn(r, ForceModulation::constant(1.0, 0.0, 6.0), m, 1.0, {0.0, t});
  const Complex ref = k * oracle::simpson_fixed<Complex>(
                              [&](double u) {
                                const Complex inner = oracle::simpson_fixed<Complex>(
                                    [&](double s) { return std::cos(k * (s - u)); }, u, t, 400);
                                return std::exp(Complex{0.0, u}) * inner;
                              },
                              0.0, t, 400);
  CHECK(std::abs(got - ref) <= 1e-6);
}

TEST_CASE("mode overlaps: unitarity |G|^2 + sum |K|^2 |I|^2 = 1") {
  const auto b = mixed_bath();
  const auto r = solve_response(b, {0.0, 30.0, 6000});
  for (double tau : {0.0, 0.5, 7.0, 29.0}) {
    const auto ov = mode_overlaps(r, tau);
    double s = std::norm(r.g(tau));
    for (std::size_t i = 0; i < ov.size(); ++i) s += b.modes()[i].coupling_sq * std::norm(ov[i]);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-7));
  }
  // Direct Simpson for one overlap.
  const double tau = 7.0;
  const auto ov = mode_overlaps(r, tau);
  const double delta = 1.0 - b.modes()[1].frequency;
  const Complex ref = oracle::simpson_fixed<Complex>(
      [&](double s) { return r.g(tau - s) * std::exp(Complex{0.0, delta * s}); }, 0.0, tau, 20000);
  CHECK(std::abs(ov[1] - ref) < 1e-8);
  const auto ovd = mode_overlaps_dot(r, tau);
  const Complex refd = oracle::simpson_fixed<Complex>(
      [&](double s) { return r.g_dot(tau - s) * std::exp(Complex{0.0, delta * s}); }, 0.0, tau, 20000);
  CHECK(std::abs(ovd[1] - refd) < 1e-8);
}

TEST_CASE("bath noise") {
  const auto b = mixed_bath();
  const auto r = solve_response(b, {0.0, 20.0, 4000});
  CHECK(bath_noise(r, {3.0, 3.0}) == 0.0);
  double prev = 0.0;
  for (double tau : {0.1, 0.5, 1.0, 2.0}) {
    const double nb = bath_noise(r, {1.0, 1.0 + tau});
    CHECK(nb > 0.0);
    CHECK(nb > prev);  // grows over short windows
    prev = nb;
  }
  const auto free = solve_response(DiscreteBath::noiseless(1.0), {0.0, 5.0, 50});
  CHECK(bath_noise(free, {0.0, 4.0}) == 0.0);
}

TEST_CASE("quadrature mean") {
  const auto free = solve_response(DiscreteBath::noiseless(1.0), {0.0, 10.0, 100});
  const auto force = ForceModulation::constant(1.0, 0.0, 10.0);
  const Window w{0.0, 2.0};
  const auto d = displacement_d(free, force, 1.0, w);
  const auto vac = GaussianProbeInit::vacuum();
  for (double th : {0.0, 1.0, 2.5}) CHECK(quadrature_mean(vac, free, d, th, 0.0, 1.0, w) == 0.0);
  const double th = d.phase - 2.0 + kPi / 2;
  CHECK(quadrature_mean(vac, free, d, th, 3.0, 1.0, w) == doctest::Approx(3.0 * d.magnitude()));

  const auto r = resonant(0.3, 5.0, 2048);
  const auto coh = GaussianProbeInit::coherent({1.0, 0.0});
  const auto dr = displacement_d(r, force, 1.0, {0.0, 3.0});
  const double g = std::cos(0.9);  // closed form, positive so phi^G = 0
  for (double t2 : {0.2, 1.4}) {
    const double expect = g * std::sqrt(2.0) * std::cos(t2 + 3.0) + 2.0 * dr.magnitude() * std::sin(t2 + 3.0 - dr.phase);
    CHECK(quadrature_mean(coh, r, dr, t2, 2.0, 1.0, {0.0, 3.0}) == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("quadrature variance examples") {
  const auto free = solve_response(DiscreteBath::noiseless(1.0), {0.0, 10.0, 100});
  const auto vac = GaussianProbeInit::vacuum();
  for (double th : {0.0, 0.8})
    for (double t : {0.0, 3.0}) CHECK(quadrature_variance(vac, free, th, 1.0, {0.0, t}) == doctest::Approx(0.5));
  // Squeezed, empty bath: the checked quadrature after free rotation.
  const auto sq = GaussianProbeInit::squeezed(1.0, kPi / 2);  // X(0) is the squeezed one
  CHECK(quadrature_variance(sq, free, 0.0, 1.0, {0.0, 0.0}) == doctest::Approx(std::exp(-2.0) / 2));
  CHECK(quadrature_variance(sq, free, -1.0, 1.0, {0.0, 1.0}) == doctest::Approx(std::exp(-2.0) / 2));
  // Resonant vacuum bath keeps the vacuum variance.
  const auto r = resonant(0.5, 20.0, 4096);
  for (double t : {0.5, 3.0, 11.0})
    for (double th : {0.0, 1.3}) CHECK(quadrature_variance(vac, r, th, 1.0, {0.0, t}) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("covariance snapshot invariants") {
  const auto b = mixed_bath();
  const auto r = solve_response(b, {0.0, 30.0, 6000});
  const auto sq = GaussianProbeInit::squeezed(0.8, 0.4, {0.5, -0.2});
  for (double t : {0.0, 2.0, 25.0}) {
    const auto s = covariance_snapshot(sq, r, 0.3, 1.0, {0.0, t});
    const auto s2 = covariance_snapshot(sq, r, 1.0, 1.0, {0.0, t});
    CHECK(s.det_sigma >= 0.25 - 1e-9);
    CHECK(std::abs(s.det_sigma - s2.det_sigma) <= 1e-8 * s.det_sigma);
    CHECK(std::abs(s.det_sigma - s.det_direct) <= 1e-8 * s.det_sigma);
    CHECK(s.var_x_theta + s.var_p_theta == doctest::Approx(s2.var_x_theta + s2.var_p_theta).epsilon(1e-8));
  }
  const auto free = solve_response(DiscreteBath::noiseless(1.0), {0.0, 10.0, 100});
  const auto fs = covariance_snapshot(sq, free, 0.7, 1.0, {0.0, 3.0});
  CHECK(fs.det_sigma == doctest::Approx(0.25));
  CHECK(fs.var_x_theta == doctest::Approx(sq.variance(0.7 + 3.0)));
  CHECK(fs.var_p_theta == doctest::Approx(sq.variance(0.7 + 3.0 + kPi / 2)));
  const auto res = resonant(0.5, 20.0);
  for (double t : {1.0, 9.0}) CHECK(covariance_snapshot(GaussianProbeInit::vacuum(), res, 0.0, 1.0, {0.0, t}).det_sigma ==
                                    doctest::Approx(0.25).epsilon(1e-8));
  // Thermal bath heats a vacuum probe: det > 1/4 and rises over the window.
  ContinuousSpectrum spec;
  spec.scale = 0.01;
  spec.cutoff = 2.0;
  spec.occupation = OccupationModel::constant(1.0);
  const auto th = solve_response(discretize(spec, 256, 1.0), {0.0, 20.0, 4000});
  double prev = 0.25;
  for (double t : {1.0, 4.0, 10.0, 20.0}) {
    const double det = covariance_snapshot(GaussianProbeInit::vacuum(), th, 0.0, 1.0, {0.0, t}).det_sigma;
    CHECK(det > prev);
    prev = det;
  }
}

TEST_CASE("max-variance angle rotation") {
  const auto free = solve_response(DiscreteBath::noiseless(1.0), {0.0, 10.0, 100});
  CHECK(rotate_max_variance_angle(0.9, free, 1.0, {2.0, 2.0}) == doctest::Approx(0.9));
  CHECK(rotate_max_variance_angle(0.9, free, 1.0, {0.0, kPi / 2}) == doctest::Approx(std::fmod(0.9 - kPi / 2 + kPi, kPi)));
  // Single detuned mode against a 720-point argmax scan.
  const auto r = solve_response(DiscreteBath({{0.25, 0.0, 0.0}}, 1.0), {0.0, 10.0, 2048});
  const auto sq = GaussianProbeInit::squeezed(1.0, 0.6);
  const Window w{0.0, 4.0};
  const double predicted = rotate_max_variance_angle(0.6, r, 1.0, w);
  // Variance of X(theta) at time t is largest where theta + omega0 tau - phi^G hits theta_m^0.
  double best = 0.0, best_v = -1.0;
  for (int i = 0; i < 720; ++i) {
    const double th = kPi * i / 720.0;
    const double v = quadrature_variance(sq, r, th, 1.0, w);
    if (v > best_v) best_v = v, best = th;
  }
  double diff = std::fmod(std::abs(predicted - best), kPi);
  diff = std::min(diff, kPi - diff);
  CHECK(diff <= kPi / 720.0 + 1e-9);
}

TEST_CASE("window-extension penalty") {
  // Broadband bath: n_B keeps growing once the window outlasts the kernel memory.
  ContinuousSpectrum spec;
  spec.scale = 0.01;
  spec.cutoff = 2.0;
  spec.occupation = OccupationModel::constant(1.0);
  const auto b = discretize(spec, 512, 1.0);
  const auto r = solve_response(b, {0.0, 30.0, default_n_steps(b, 30.0)});
  const auto force = ForceModulation::constant(1.0, 3.0, 6.0);
  // Squeezed state re-aligned per window so that its squeezed axis lands on the
  // P quadrature at theta* = phi^D - omega0 tau.
  const auto p_var = [&](const Window& w) {
    const double theta = displacement_d(r, force, 1.0, w).phase - w.length();
    const double aligned = theta + kPi / 2 + w.length() - response_phase(r, w);
    const auto init = GaussianProbeInit::squeezed(1.0, aligned + kPi / 2);
    return quadrature_variance(init, r, theta + kPi / 2, 1.0, w);
  };
  const double tight = p_var({3.0, 6.0});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pre(0.0, 3.0), post(0.0, 20.0);
  for (int i = 0; i < 20; ++i) {
    const Window w{3.0 - pre(rng), 6.0 + post(rng)};
    CHECK(p_var(w) >= tight - 1e-12);
  }
}
