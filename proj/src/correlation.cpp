#include "nmqfi/correlation.hpp"

#include <cmath>
#include <limits>

#include "nmqfi/probe.hpp"

namespace nmqfi {

// Every term of the interaction correction factorizes per mode through
//   J_n(x) = int_0^x dG/dtau(x - s) e^{i Delta_n s} ds,
// since C0(s - s') = sum_n w_n e^{i Delta_n (s - t0)} e^{-i Delta_n (s' - t0)}.
CorrelationResult bath_correlation(const ResponseFunction& response, double probe_noise, double t, double t_prime,
                                   double omega0, double t0) {
  const double x = t - t0, y = t_prime - t0;
  if (x < 0.0 || y < 0.0) throw DomainError("bath_correlation: t and t' must not precede t0");
  response.require_coverage(std::max(x, y), "bath_correlation");
  const auto& bath = response.bath();
  const Complex rotation = std::polar(1.0, -omega0 * (t - t_prime));

  CorrelationResult out;
  out.born = rotation * bare_correlation_c0(bath, t - t_prime);

  const auto jx = mode_overlaps_dot(response, x);
  const auto jy = mode_overlaps_dot(response, y);
  Complex sum{};
  for (std::size_t n = 0; n < bath.size(); ++n) {
    const auto& mode = bath.modes()[n];
    const double w = mode.coupling_sq * (mode.occupation + 0.5);
    const double d = bath.detuning(n);
    sum += w * (std::polar(1.0, d * x) * std::conj(jy[n]) + std::polar(1.0, -d * y) * jx[n] +
                jx[n] * std::conj(jy[n]));
  }
  sum += probe_noise * response.g_dot(x) * std::conj(response.g_dot(y));
  out.interaction = rotation * sum;
  out.total = out.born + out.interaction;
  return out;
}

namespace {

// First tau with f(tau) < threshold, refined by bisection; negative if none.
template <class F>
double first_crossing(F&& f, double threshold, double t_end, int samples) {
  double prev = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double tau = t_end * i / samples;
    if (f(tau) < threshold) {
      double a = prev, b = tau;
      for (int it = 0; it < 50 && b - a > 1e-10 * t_end; ++it) {
        const double m = 0.5 * (a + b);
        (f(m) < threshold ? b : a) = m;
      }
      return 0.5 * (a + b);
    }
    prev = tau;
  }
  return -1.0;
}

}  // namespace

TimescaleCheck correlation_timescale_check(const ResponseFunction& response, double probe_noise, int samples) {
  const auto& bath = response.bath();
  const auto m = moments(bath, 2);
  if (!(m.script_n > 0.0)) throw DomainError("correlation_timescale_check: N = 0, nothing to decay");
  if (samples < 2) throw DomainError("correlation_timescale_check: samples must be >= 2");
  const double omega0 = bath.probe_frequency();
  const double t_end = response.coverage();

  auto total = [&](double tau) { return std::abs(bath_correlation(response, probe_noise, tau, 0.0, omega0).total); };
  auto born = [&](double tau) { return std::abs(bare_correlation_c0(bath, tau)); };

  TimescaleCheck out;
  const double threshold = std::abs(bare_correlation_c0(bath, 0.0)) / std::exp(1.0);
  out.decay_scale = first_crossing(total, threshold, t_end, samples);
  if (out.decay_scale < 0.0) {
    out.no_decay = true;
    out.decay_scale = t_end;
  }
  out.born_decay_scale = first_crossing(born, threshold, t_end, samples);
  if (out.born_decay_scale < 0.0) {
    out.born_no_decay = true;
    out.born_decay_scale = t_end;
  }
  double predicted = 1.0 / m.omega(2);
  if (m.chi_defined && m.chi(2) > 0.0) predicted = std::min(predicted, 1.0 / m.chi(2));
  out.predicted = predicted;
  out.ratio = out.decay_scale / predicted;
  return out;
}

}  // namespace nmqfi
