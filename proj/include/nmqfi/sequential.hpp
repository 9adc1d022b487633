#pragma once

#include <vector>

#include "nmqfi/bath.hpp"
#include "nmqfi/probe.hpp"
#include "nmqfi/response.hpp"

namespace nmqfi {

struct SequentialScheme {
  double total_window = 0.0;  ///< T
  double interval = 0.0;      ///< tau
  int repetitions = 0;        ///< nu = floor(T / tau)
  double start = 0.0;         ///< t0

  /// nu = floor(T / tau) (with 1e-9 slack against round-off); the leftover
  /// tail of the window is discarded.
  static SequentialScheme make(double total_window, double interval, double start = 0.0);
};

struct XiC {
  double xi = 0.0;       ///< int zeta^2
  double c_coeff = 0.0;  ///< 1/4 int (zeta'^2 + omega0^2 zeta^2) - 1/3 [zeta zeta']
};

/// Integrals over [t0, t0 + T].
XiC xi_and_c(const ForceModulation& force, double omega0, double total_window, double start);

struct SeqResult {
  double total_qfi = 0.0;
  std::vector<double> per_step_qfi;
  double tau_used = 0.0;
  double denominator = 0.0;  ///< |G(tau)|^2 / (4 script_e) + n_B(tau)
  double xi = 0.0;
  double c_coeff = 0.0;
};

/// Best state re-prepared before each of the nu steps. The denominator does
/// not depend on the step index and is computed once.
SeqResult seq_qfi(const SequentialScheme& scheme, double energy, const ResponseFunction& response,
                  const ForceModulation& force, double omega0);

/// Denominator integral int_0^tau int_0^tau G(tau-s) G*(tau-s') C0(s-s') ds ds'
/// by a tensor Simpson rule with n intervals per axis. Slow reference used to
/// cross-check the factorized n_B evaluation.
double seq_noise_double_integral(const ResponseFunction& response, double tau, int n_intervals);

struct TauBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// [8 h, min(T, 5 / Omega_2)] clipped to the response coverage.
TauBounds default_tau_bounds(const ResponseFunction& response, double total_window);

struct TauOptimum {
  double tau_opt = 0.0;
  SeqResult seq;
  bool at_lower_bound = false;
  bool at_upper_bound = false;
  int evaluations = 0;
};

/// 64-point log-spaced scan followed by golden-section refinement. Because
/// nu is an integer the objective is a sawtooth in tau; the refinement runs
/// over the continuous variable x = T / tau on the piecewise-linear
/// interpolant of integer-nu values and returns tau = T / nu*.
/// Scan points run on up to NMQFI_THREADS threads.
TauOptimum optimize_tau(double total_window, double energy, const ResponseFunction& response,
                        const ForceModulation& force, double omega0, TauBounds bounds, double start = 0.0);

/// Printed two-term asymptotic optimum
///   tau = E^{-1/2} / (2 sqrt(3 N)) + (C + xi K^2) / (16 sqrt3 N^{3/2} xi) E^{-3/2}.
double tau_opt_asymptotic(double energy, const BathMoments& moments, double xi, double c_coeff);

/// Printed two-term asymptotic total QFI, times omega0^2 when the prefactor
/// switch is on.
double seq_qfi_asymptotic(double energy, const BathMoments& moments, double xi, double c_coeff, double omega0,
                          bool omega0_prefactor = true);

/// Largest model rate that the short-time expansions require tau to undercut.
double validity_rate(const BathMoments& moments, double omega0);

struct MarkovSeq {
  double tau_opt = 0.0;
  double total_qfi_bound = 0.0;
  bool noiseless = false;  ///< gamma = 0: no finite optimum, values are +inf
};

/// tau = E^{-1/2} / (8 A), F = xi / (3 A), A = gamma (n_T + 1/2); F carries
/// omega0^2 when the prefactor switch is on.
MarkovSeq markov_seq(double energy, double gamma, double n_thermal, double xi, double omega0 = 1.0,
                     bool omega0_prefactor = true);

}  // namespace nmqfi
