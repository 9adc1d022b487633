#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nmqfi/common.hpp"

namespace nmqfi {

/// One bath oscillator. Only |K_n|^2 ever enters the dynamics, so the
/// coupling phase is not stored.
struct BathMode {
  double coupling_sq = 0.0;  ///< |K_n|^2, rad^2/time^2
  double frequency = 0.0;    ///< omega_n, rad/time
  double occupation = 0.0;   ///< N_n
};

/// A discrete Gaussian bath together with the probe frequency omega_0 it is
/// detuned against. An empty mode list is the noiseless limit.
class DiscreteBath {
 public:
  DiscreteBath(std::vector<BathMode> modes, double probe_frequency);

  static DiscreteBath noiseless(double probe_frequency) { return {{}, probe_frequency}; }

  std::span<const BathMode> modes() const { return modes_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }
  double probe_frequency() const { return probe_frequency_; }

  /// omega_0 - omega_n
  double detuning(std::size_t n) const { return probe_frequency_ - modes_[n].frequency; }
  double max_abs_detuning() const;

  /// K^2 = sum |K_n|^2
  double k_squared() const;
  /// N = sum |K_n|^2 (N_n + 1/2)
  double script_n() const;

  /// Same modes with every |K_n|^2 multiplied by factor.
  DiscreteBath scaled(double factor) const;

 private:
  std::vector<BathMode> modes_;
  double probe_frequency_;
};

enum class SpectrumFamily { FlatBand, Ohmic };
enum class CutoffShape { Hard, Exponential };

struct OccupationModel {
  enum class Kind { ZeroTemperature, Thermal, Constant };
  Kind kind = Kind::ZeroTemperature;
  double value = 0.0;  ///< temperature (rad/time, hbar = k_B = 1) or constant N

  static OccupationModel zero_temperature() { return {}; }
  static OccupationModel thermal(double temperature) { return {Kind::Thermal, temperature}; }
  static OccupationModel constant(double n) { return {Kind::Constant, n}; }

  double operator()(double omega) const;
};

/// Continuous coupling density J(w) = g(w)|K(w)|^2:
///   flat band:    scale * cut(w)
///   ohmic family: scale * w^s * cut(w)
/// with cut = 1 on [0, w_c] (hard) or exp(-w/w_c) (exponential, support
/// truncated at 8 w_c).
struct ContinuousSpectrum {
  SpectrumFamily family = SpectrumFamily::FlatBand;
  double exponent = 1.0;
  double scale = 0.0;
  double cutoff = 1.0;
  CutoffShape cutoff_shape = CutoffShape::Hard;
  OccupationModel occupation{};

  /// Throws DomainError for a non-positive exponent or cutoff, negative scale.
  void validate() const;
  double density(double omega) const;
  double support_end() const;
  /// Closed-form K^2 of the continuum over its (truncated) support.
  double k_squared_exact() const;
};

struct BathMoments {
  double k_squared = 0.0;
  double script_n = 0.0;
  std::vector<double> omega_p;  ///< Omega_p for p = 2..p_max (index p - 2)
  std::vector<double> chi_q;    ///< |chi_q| for q = 1..p_max (index q - 1); empty if N = 0
  bool chi_defined = false;

  double omega(int p) const { return omega_p.at(static_cast<std::size_t>(p - 2)); }
  double chi(int q) const { return chi_q.at(static_cast<std::size_t>(q - 1)); }
  /// Largest of all Omega_p and |chi_q|.
  double max_rate() const;
};

/// Equal-width bins with midpoint frequencies over the spectrum support.
DiscreteBath discretize(const ContinuousSpectrum& spectrum, int n_modes, double probe_frequency);

/// kappa(tau) = sum |K_n|^2 exp(i (omega_0 - omega_n) tau)
Complex memory_kernel(const DiscreteBath& bath, double tau);

/// C0(tau) = sum |K_n|^2 (N_n + 1/2) exp(i (omega_0 - omega_n) tau)
Complex bare_correlation_c0(const DiscreteBath& bath, double tau);

BathMoments moments(const DiscreteBath& bath, int p_max = 6);

}  // namespace nmqfi
