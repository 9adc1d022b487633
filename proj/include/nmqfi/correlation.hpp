#pragma once

#include "nmqfi/bath.hpp"
#include "nmqfi/response.hpp"

namespace nmqfi {

struct CorrelationResult {
  Complex total{};
  Complex born{};
  Complex interaction{};
};

/// Two-time bath correlation C(t, t0 | t', t0) at F = 0, split into the bare
/// (Born) term and the probe back-action correction. probe_noise is
/// (1/2) <Da Da^dag + Da^dag Da>_0 = (Sigma_xx + Sigma_pp) / 2.
CorrelationResult bath_correlation(const ResponseFunction& response, double probe_noise, double t, double t_prime,
                                   double omega0, double t0 = 0.0);

struct TimescaleCheck {
  double decay_scale = 0.0;       ///< first tau with |C(tau)| < |C(0)| / e
  bool no_decay = false;          ///< |C| stayed above |C(0)|/e over the grid
  double born_decay_scale = 0.0;  ///< same for the Born term alone
  bool born_no_decay = false;
  double predicted = 0.0;         ///< min(1 / Omega_2, 1 / |chi_2|)
  double ratio = 0.0;             ///< decay_scale / predicted
};

/// Decay of |C(t0 + tau, t0 | t0, t0)| over the response grid against the
/// moment timescales. Throws DomainError when N = 0.
TimescaleCheck correlation_timescale_check(const ResponseFunction& response, double probe_noise = 0.5,
                                           int samples = 512);

}  // namespace nmqfi
