#include <cmath>
#include <random>

#include "doctest.h"
#include "nmqfi/metrology.hpp"
#include "oracles.hpp"

using namespace nmqfi;

namespace {

const ForceModulation kUnit = ForceModulation::constant(1.0, 0.0, 100.0);

ResponseFunction noiseless(double t_end = 10.0) {
  return solve_response(DiscreteBath::noiseless(1.0), {0.0, t_end, 100});
}

ResponseFunction single_mode(double k2, double omega_n, double t_end = 10.0) {
  return solve_response(DiscreteBath({{k2, omega_n, 0.0}}, 1.0), {0.0, t_end, 4096});
}

}  // namespace

TEST_CASE("script_e and best-state parameters") {
  CHECK(script_e(0.5) == 0.5);
  CHECK(script_e(1.0) == doctest::Approx(1.0 + std::sqrt(0.75)));
  CHECK_THROWS_AS(script_e(0.4999), DomainError);
  const auto r = noiseless();
  const auto d = displacement_d(r, kUnit, 1.0, {0.0, kPi});
  CHECK(best_state(0.5, d, r, {0.0, kPi}).squeeze_r == 0.0);
  const auto b1 = best_state(1.0, d, r, {0.0, kPi});
  CHECK(b1.script_e == doctest::Approx(1.86603).epsilon(1e-5));
  CHECK(b1.squeeze_r == doctest::Approx(0.5 * std::log(3.7320508)).epsilon(1e-7));
  CHECK(b1.squeeze_r == doctest::Approx(0.65848).epsilon(1e-5));
  const auto b5 = best_state(5.0, d, r, {0.0, kPi});
  CHECK(b5.min_variance() == doctest::Approx(0.025063).epsilon(1e-5));
  CHECK(b5.max_variance() == doctest::Approx(9.97494).epsilon(1e-6));
  const auto init = b5.to_init();
  CHECK(init.is_pure());
  CHECK(init.energy() == doctest::Approx(5.0));
  CHECK(init.covariance.max_variance_angle() == doctest::Approx(b5.max_variance_angle));
  CHECK_THROWS_AS(best_state(0.2, d, r, {0.0, kPi}), DomainError);
}

TEST_CASE("QFI forms: noiseless examples") {
  const auto r = noiseless();
  const Window w{0.0, kPi};
  const auto vac = GaussianProbeInit::vacuum();
  CHECK(qfi_general(vac, r, kUnit, 1.0, w).value == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(qfi_aligned(vac, r, kUnit, 1.0, w).value == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(qfi_best_state(0.5, r, kUnit, 1.0, w).value == doctest::Approx(8.0).epsilon(1e-10));
  const double e5 = 5.0 + std::sqrt(24.75);
  CHECK(qfi_best_state(5.0, r, kUnit, 1.0, w).value == doctest::Approx(16.0 * e5).epsilon(1e-10));
  CHECK(qfi_best_state(5.0, r, kUnit, 1.0, w).value == doctest::Approx(159.599).epsilon(1e-5));
  const auto zero = ForceModulation::constant(1.0, 50.0, 60.0);
  CHECK(qfi_general(vac, r, zero, 1.0, w).value == 0.0);
  CHECK(qfi_best_state(3.0, r, zero, 1.0, w).value == 0.0);
  // Heisenberg scaling: linear in script_e.
  for (double e : {1.0, 10.0, 100.0})
    CHECK(qfi_best_state(e, r, kUnit, 1.0, {0.0, 1.0}).value ==
          doctest::Approx(4.0 * script_e(e) * std::pow(2.0 * std::sin(0.5), 2)).epsilon(1e-10));
  // Best state plugged into the aligned form.
  const auto d = displacement_d(r, kUnit, 1.0, w);
  const auto bs = best_state(5.0, d, r, w).to_init();
  CHECK(qfi_aligned(bs, r, kUnit, 1.0, w).value == doctest::Approx(159.599).epsilon(1e-5));
  CHECK(qfi_general(bs, r, kUnit, 1.0, w).value == doctest::Approx(159.599).epsilon(1e-5));
}

TEST_CASE("QFI forms agree on aligned states with a bath") {
  const auto r = single_mode(0.09, 0.7);
  const Window w{0.0, 2.5};
  const auto coh = GaussianProbeInit::coherent({0.8, -0.3});
  CHECK(qfi_general(coh, r, kUnit, 1.0, w).value == doctest::Approx(qfi_aligned(coh, r, kUnit, 1.0, w).value).epsilon(1e-10));
  const auto res = single_mode(0.25, 1.0);
  const auto vac = GaussianProbeInit::vacuum();
  CHECK(qfi_general(vac, res, kUnit, 1.0, w).value == doctest::Approx(qfi_aligned(vac, res, kUnit, 1.0, w).value).epsilon(1e-10));
  const auto d = displacement_d(res, kUnit, 1.0, w);
  const auto bs = best_state(10.0, d, res, w).to_init();
  CHECK(is_aligned(bs, d, res, w));
  CHECK(qfi_best_state(10.0, res, kUnit, 1.0, w).value == doctest::Approx(qfi_aligned(bs, res, kUnit, 1.0, w).value).epsilon(1e-9));
  CHECK(qfi_best_state(10.0, res, kUnit, 1.0, w).value == doctest::Approx(qfi_general(bs, res, kUnit, 1.0, w).value).epsilon(1e-9));
  // A misaligned squeezed state is rejected by the aligned form.
  const auto bad = GaussianProbeInit::squeezed(1.0, best_state(10.0, d, res, w).max_variance_angle + 0.4);
  CHECK_FALSE(is_aligned(bad, d, res, w));
  CHECK_THROWS_AS(qfi_aligned(bad, res, kUnit, 1.0, w), AlignmentError);
  CHECK(qfi_general(bad, res, kUnit, 1.0, w).value < qfi_best_state(bad.energy(), res, kUnit, 1.0, w).value);
}

TEST_CASE("quadrature Fisher information") {
  const auto r = noiseless();
  const Window w{0.0, kPi};
  const auto vac = GaussianProbeInit::vacuum();
  const auto d = displacement_d(r, kUnit, 1.0, w);
  const double opt = optimal_quadrature_angle(d, 1.0, w);
  CHECK(fisher_quadrature(opt, vac, r, kUnit, 1.0, w) == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(fisher_quadrature(opt + kPi / 2, vac, r, kUnit, 1.0, w) == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(fisher_quadrature(opt + kPi / 4, vac, r, kUnit, 1.0, w) == doctest::Approx(4.0).epsilon(1e-10));

  // 720-point scan on a noisy, squeezed, aligned scenario.
  const auto rb = single_mode(0.16, 0.5);
  const Window wb{0.0, 3.0};
  const auto db = displacement_d(rb, kUnit, 1.0, wb);
  const auto init = best_state(4.0, db, rb, wb).to_init();
  const double qfi = qfi_general(init, rb, kUnit, 1.0, wb).value;
  double best = 0.0, best_th = 0.0;
  for (int i = 0; i < 720; ++i) {
    const double th = kPi * i / 720.0;
    const double f = fisher_quadrature(th, init, rb, kUnit, 1.0, wb);
    CHECK(f <= qfi * (1 + 1e-6));
    if (f > best) best = f, best_th = th;
  }
  double diff = std::fmod(std::abs(best_th - optimal_quadrature_angle(db, 1.0, wb)), kPi);
  diff = std::min(diff, kPi - diff);
  CHECK(diff <= kPi / 720.0);
  CHECK(best == doctest::Approx(qfi).epsilon(1e-3));
}

TEST_CASE("best state beats 50 random same-energy pure states") {
  const auto r = solve_response(DiscreteBath({{0.05, 0.6, 0.5}, {0.04, 1.4, 0.0}}, 1.0), {0.0, 10.0, 4096});
  const Window w{0.5, 4.0};
  const double energy = 6.0;
  const double best = qfi_best_state(energy, r, kUnit, 1.0, w).value;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r_max = 0.5 * std::acosh(2.0 * energy);
  for (int i = 0; i < 50; ++i) {
    const double sq = r_max * u(rng);
    const double amp = std::sqrt(std::max(0.0, energy - 0.5 * std::cosh(2.0 * sq)));
    const auto init = GaussianProbeInit::squeezed(sq, kPi * u(rng), std::polar(amp, 2 * kPi * u(rng)));
    REQUIRE(init.energy() == doctest::Approx(energy));
    CHECK(qfi_general(init, r, kUnit, 1.0, w).value <= best * (1 + 1e-9));
  }
}

TEST_CASE("adding a bath mode never helps a vacuum probe") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> k2(0.005, 0.05), om(0.3, 1.7), occ(0.0, 1.0);
  std::vector<BathMode> modes;
  double prev = qfi_aligned(GaussianProbeInit::vacuum(), noiseless(), kUnit, 1.0, {0.0, 1.0}).value;
  for (int i = 0; i < 6; ++i) {
    modes.push_back({k2(rng), om(rng), occ(rng)});
    const auto r = solve_response(DiscreteBath(modes, 1.0), {0.0, 2.0, 1024});
    const double f = qfi_aligned(GaussianProbeInit::vacuum(), r, kUnit, 1.0, {0.0, 1.0}).value;
    CHECK(f < prev);
    prev = f;
  }
}

TEST_CASE("short-time expansion") {
  const auto vac = GaussianProbeInit::vacuum();
  const auto ramp = ForceModulation::table({{0.0, 0.0}, {10.0, 5.0}});
  CHECK(short_time_qfi(vac, ramp, 1.0, {0.0, 0.01}) == 0.0);
  CHECK(short_time_qfi(vac, kUnit, 1.0, {0.0, 0.01}) == doctest::Approx(2.0e-4).epsilon(1e-12));
  CHECK(short_time_qfi(vac, kUnit, 2.0, {0.0, 0.01}) == doctest::Approx(8.0e-4).epsilon(1e-12));

  const auto b = DiscreteBath({{0.2, 0.5, 0.0}, {0.3, 1.8, 0.5}}, 1.0);
  const auto r = solve_response(b, {0.0, 0.2, 4096});
  std::vector<double> taus = oracle::logspace(0.01, 0.1, 9), res;
  for (double t : taus)
    res.push_back(std::abs(short_time_qfi(vac, kUnit, 1.0, {0.0, t}) - qfi_aligned(vac, r, kUnit, 1.0, {0.0, t}).value));
  const double slope = oracle::loglog_slope(taus, res);
  CHECK(slope >= 3.6);
  CHECK(slope <= 4.4);
}

TEST_CASE("markov closed form") {
  const auto vac = GaussianProbeInit::vacuum();
  CHECK(markov_qfi(vac, 0.0, 0.0, kUnit, 1.0, {0.0, kPi}) == doctest::Approx(8.0).epsilon(1e-10));
  const double g = 0.1;
  const Complex num = oracle::simpson_fixed<Complex>(
      [&](double u) { return std::exp(Complex{-0.5 * g * (1.0 - u), u}); }, 0.0, 1.0, 100000);
  const double den = std::exp(-g) * 0.5 + 0.5 * (1.0 - std::exp(-g));
  CHECK(markov_qfi(vac, g, 0.0, kUnit, 1.0, {0.0, 1.0}) == doctest::Approx(std::norm(num) / den).epsilon(1e-7));
  // Long windows forget the initial state: bounded by the steady numerator over N + 1/2.
  const double n = 2.0;
  const double f_long = markov_qfi(vac, 1.0, n, kUnit, 1.0, {0.0, 60.0});
  const double steady = 1.0 / (0.25 + 1.0) / (n + 0.5);  // |1 / (gamma/2 + i)|^2 / (N + 1/2)
  CHECK(f_long == doctest::Approx(steady).epsilon(1e-6));
  CHECK_THROWS_AS(markov_qfi(vac, -1.0, 0.0, kUnit, 1.0, {0.0, 1.0}), DomainError);
}

TEST_CASE("Monte-Carlo estimation saturates the Cramer-Rao bound") {
  const auto r = noiseless();
  const Window w{0.0, kPi};
  const auto vac = GaussianProbeInit::vacuum();
  const auto a = simulate_estimation(vac, r, kUnit, 1.0, w, 0.3, 100, 42);
  CHECK(a.fisher == doctest::Approx(8.0).epsilon(1e-10));
  CHECK(a.replications == 2000);
  CHECK(a.empirical_mse == doctest::Approx(1.25e-3).epsilon(0.10));
  CHECK(a.cramer_rao_ratio >= 0.9);
  CHECK(a.cramer_rao_ratio <= 1.1);
  CHECK(a.estimate == doctest::Approx(0.3).epsilon(0.01));
  const auto b = simulate_estimation(vac, r, kUnit, 1.0, w, 0.3, 200, 43);
  CHECK(a.empirical_mse / b.empirical_mse == doctest::Approx(2.0).epsilon(0.15));
  // Reproducible.
  const auto again = simulate_estimation(vac, r, kUnit, 1.0, w, 0.3, 100, 42);
  CHECK(again.empirical_mse == a.empirical_mse);
  // Nearly noiseless outcome: estimate hits F_true.
  const auto d = displacement_d(r, kUnit, 1.0, w);
  const auto sharp = best_state(1e12, d, r, w).to_init();
  const auto c = simulate_estimation(sharp, r, kUnit, 1.0, w, 0.77, 10, 1, 50);
  CHECK(c.estimate == doctest::Approx(0.77).epsilon(1e-5));
  CHECK_THROWS_AS(simulate_estimation(vac, r, ForceModulation::constant(1.0, 50.0, 60.0), 1.0, w, 0.3, 10, 1),
                  EstimationError);
}
