#pragma once

#include <utility>
#include <vector>

#include "nmqfi/common.hpp"
#include "nmqfi/response.hpp"

namespace nmqfi {

/// Known time profile zeta(t) of the force; identically zero outside its
/// support [t_i, t_f].
class ForceModulation {
 public:
  enum class Kind { Constant, Sinusoid, GaussianPulse, Table };

  static ForceModulation constant(double value, double t_i, double t_f);
  /// amplitude * sin(frequency * t + phase)
  static ForceModulation sinusoid(double amplitude, double frequency, double phase, double t_i,
                                  double t_f);
  /// amplitude * exp(-(t - center)^2 / (2 width^2))
  static ForceModulation gaussian_pulse(double center, double width, double amplitude, double t_i,
                                        double t_f);
  /// Piecewise-linear through (time, value) samples; support spans the samples.
  static ForceModulation table(std::vector<std::pair<double, double>> samples);

  Kind kind() const { return kind_; }
  double support_begin() const { return t_i_; }
  double support_end() const { return t_f_; }

  double value(double t) const;
  /// d zeta/dt inside the support; secant slope for tables. One-sided at the
  /// support edges (the interior limit).
  double derivative(double t) const;

  /// Sorted breakpoints of [a, b] intersected with the support, including the
  /// table knots inside it. Empty when the intersection is empty.
  std::vector<double> breakpoints(double a, double b) const;

 private:
  ForceModulation(Kind kind, double t_i, double t_f) : kind_(kind), t_i_(t_i), t_f_(t_f) {}
  double raw_value(double t) const;

  Kind kind_;
  double t_i_, t_f_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;  // kind-specific parameters
  std::vector<std::pair<double, double>> table_;
};

/// Symmetric 2x2 covariance over (X, P); vacuum is diag(1/2, 1/2).
struct Covariance2 {
  double xx = 0.5;
  double xp = 0.0;
  double pp = 0.5;

  double det() const { return xx * pp - xp * xp; }
  double trace() const { return xx + pp; }
  /// Variance of X(angle) = X cos(angle) + P sin(angle).
  double variance(double angle) const;
  /// Angle in [0, pi) of the maximal quadrature variance.
  double max_variance_angle() const;
  bool isotropic(double tol = 1e-12) const;
};

struct GaussianProbeInit {
  Complex mean_amplitude{};  ///< <a>_0
  Covariance2 covariance{};

  static GaussianProbeInit vacuum() { return {}; }
  static GaussianProbeInit coherent(Complex alpha) { return {alpha, {}}; }
  static GaussianProbeInit thermal(double n) { return {{}, {n + 0.5, 0.0, n + 0.5}}; }
  /// Pure squeezed state with squeezing r; the max-variance quadrature is
  /// X(max_angle) with variance e^{2r}/2.
  static GaussianProbeInit squeezed(double r, double max_angle, Complex mean = {});
  /// Build from the three variances at angle, angle + pi/2 and angle + pi/4.
  static GaussianProbeInit from_principal(double var_max, double var_min, double max_angle,
                                          Complex mean = {});

  /// Throws DomainError if not positive definite or below the uncertainty bound.
  void validate() const;
  bool is_pure(double tol = 1e-9) const { return std::abs(covariance.det() - 0.25) <= tol; }
  /// <X(angle)>_0 = sqrt(2) Re(<a>_0 e^{-i angle})
  double mean_quadrature(double angle) const;
  double variance(double angle) const { return covariance.variance(angle); }
  /// <Da Da^dag + Da^dag Da>_0 = Sigma_xx + Sigma_pp
  double symmetrized_noise() const { return covariance.trace(); }
  /// Mean energy in units of hbar omega_0 including the zero-point 1/2.
  double energy() const;
};

struct Window {
  double t0 = 0.0;
  double t = 0.0;
  double length() const { return t - t0; }
};

struct DisplacementCoefficient {
  Complex value{};
  double phase = 0.0;  ///< arg D in [0, 2 pi), 0 when D = 0
  Window window{};
  double magnitude() const { return std::abs(value); }
};

struct CovarianceSnapshot {
  double var_x_theta = 0.0;
  double var_p_theta = 0.0;
  double cross = 0.0;
  double det_sigma = 0.0;  ///< closed-form determinant
  double det_direct = 0.0; ///< var_x var_p - cross^2
  double noise_term = 0.0; ///< n_B(t, t0)
  double g_abs_sq = 0.0;
  double theta = 0.0;
};

/// D(t, t0) = omega0 int_{window and support} zeta(u) e^{i omega0 (u - t0)} G(t - u) du
DisplacementCoefficient displacement_d(const ResponseFunction& response, const ForceModulation& force,
                                       double omega0, const Window& window);

/// D_n(t, t0) with unit coupling phase (only |D_n| is physical).
Complex bath_displacement_dn(const ResponseFunction& response, const ForceModulation& force,
                             const BathMode& mode, double omega0, const Window& window);

/// I_n = int_0^tau G(tau - s) e^{i (omega0 - omega_n) s} ds for every bath mode.
std::vector<Complex> mode_overlaps(const ResponseFunction& response, double tau);
/// Same with dG/dtau in place of G.
std::vector<Complex> mode_overlaps_dot(const ResponseFunction& response, double tau);

/// n_B = sum |K_n|^2 (N_n + 1/2) |I_n|^2
double bath_noise(const ResponseFunction& response, const Window& window);

/// Phase of G(t - t0) in [0, 2 pi).
double response_phase(const ResponseFunction& response, const Window& window);

double quadrature_mean(const GaussianProbeInit& init, const ResponseFunction& response,
                       const DisplacementCoefficient& d, double theta, double force_amplitude,
                       double omega0, const Window& window);

double quadrature_variance(const GaussianProbeInit& init, const ResponseFunction& response,
                           double theta, double omega0, const Window& window);
/// Same, with a precomputed n_B.
double quadrature_variance(const GaussianProbeInit& init, const ResponseFunction& response,
                           double theta, double omega0, const Window& window, double noise_term);

/// Throws NumericalError if the closed-form and direct determinants disagree
/// beyond 1e-8 relative.
CovarianceSnapshot covariance_snapshot(const GaussianProbeInit& init, const ResponseFunction& response,
                                       double theta, double omega0, const Window& window);

/// theta_m^t = theta_m^0 + phi^G - omega0 (t - t0), reduced mod pi.
double rotate_max_variance_angle(double theta_m_0, const ResponseFunction& response, double omega0,
                                 const Window& window);

}  // namespace nmqfi
