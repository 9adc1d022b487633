#pragma once

#include <cstdint>

#include "nmqfi/probe.hpp"
#include "nmqfi/response.hpp"

namespace nmqfi {

/// E + sqrt(E^2 - 1/4); throws DomainError for E < 1/2.
double script_e(double energy);

struct BestStateSpec {
  double energy = 0.5;
  double script_e = 0.5;
  double squeeze_r = 0.0;
  double squeeze_phase = 0.0;       ///< arg mu = 2 (phi^D - phi^G), reduced to [0, 2 pi)
  double max_variance_angle = 0.0;  ///< phi^D - phi^G mod pi, where the variance is script_e

  double min_variance() const { return 0.25 / script_e; }
  double max_variance() const { return script_e; }
  /// The pure squeezed state with these parameters and zero mean.
  GaussianProbeInit to_init() const;
};

BestStateSpec best_state(double energy, const DisplacementCoefficient& d, const ResponseFunction& response,
                         const Window& window);

enum class QfiForm { General, Aligned, BestState, Markov };
const char* to_string(QfiForm form);

struct QfiResult {
  double value = 0.0;
  double numerator_abs_d_sq = 0.0;
  double denominator = 0.0;  ///< DetSigma / var_X for General, the P variance otherwise
  QfiForm form = QfiForm::General;
};

/// |D|^2 var_X(phi^D - omega0 tau) / DetSigma
QfiResult qfi_general(const GaussianProbeInit& init, const ResponseFunction& response,
                      const ForceModulation& force, double omega0, const Window& window);

/// True when theta_m^0 = phi^D - phi^G within tol (mod pi), or the initial
/// covariance is isotropic.
bool is_aligned(const GaussianProbeInit& init, const DisplacementCoefficient& d,
                const ResponseFunction& response, const Window& window, double tol = 1e-6);

/// |D|^2 / var_P(phi^D - omega0 tau); throws AlignmentError for non-aligned inits.
QfiResult qfi_aligned(const GaussianProbeInit& init, const ResponseFunction& response,
                      const ForceModulation& force, double omega0, const Window& window);

/// |D|^2 / (|G|^2 / (4 script_e) + n_B)
QfiResult qfi_best_state(double energy, const ResponseFunction& response, const ForceModulation& force,
                         double omega0, const Window& window);

/// Classical Fisher information of a homodyne measurement of P(theta).
double fisher_quadrature(double theta, const GaussianProbeInit& init, const ResponseFunction& response,
                         const ForceModulation& force, double omega0, const Window& window);

/// Measurement angle phi^D - omega0 tau that maximizes fisher_quadrature.
double optimal_quadrature_angle(const DisplacementCoefficient& d, double omega0, const Window& window);

/// Two-term short-time expansion
///   omega0^2 tau^2 / var_P0(phi^{D0}) * [zeta^2(t0) + zeta(t0) zeta'(t0) tau]
/// with phi^{D0} the phase of the noiseless displacement over the window.
double short_time_qfi(const GaussianProbeInit& init, const ForceModulation& force, double omega0,
                      const Window& window);

/// Markovian closed form with G = exp(-gamma tau / 2) and a thermal bath of occupation n_thermal.
double markov_qfi(const GaussianProbeInit& init, double gamma, double n_thermal, const ForceModulation& force,
                  double omega0, const Window& window);

struct EstimationResult {
  double estimate = 0.0;       ///< mean of the per-replication estimates
  double empirical_mse = 0.0;  ///< mean of (estimate - F_true)^2
  double fisher = 0.0;         ///< per-shot Fisher information of the measured quadrature
  double cramer_rao_ratio = 0.0;  ///< mse * nu * fisher
  int replications = 0;
};

/// Monte-Carlo homodyne estimation of F by averaging nu outcomes of the
/// optimal quadrature. Replication r draws from an mt19937_64 seeded with
/// splitmix64(seed + r), so results do not depend on evaluation order.
EstimationResult simulate_estimation(const GaussianProbeInit& init, const ResponseFunction& response,
                                     const ForceModulation& force, double omega0, const Window& window,
                                     double f_true, int nu, std::uint64_t seed, int replications = 2000);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace nmqfi
