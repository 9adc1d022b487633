#include "nmqfi/metrology.hpp"

#include <cmath>
#include <random>

#include "nmqfi/quadrature.hpp"

namespace nmqfi {

double script_e(double energy) {
  if (!(energy >= 0.5)) throw DomainError("energy E must be >= 1/2 (vacuum), got " + std::to_string(energy));
  return energy + std::sqrt(std::max(0.0, energy * energy - 0.25));
}

GaussianProbeInit BestStateSpec::to_init() const {
  return GaussianProbeInit::from_principal(max_variance(), min_variance(), max_variance_angle);
}

BestStateSpec best_state(double energy, const DisplacementCoefficient& d, const ResponseFunction& response,
                         const Window& window) {
  BestStateSpec s;
  s.energy = energy;
  s.script_e = script_e(energy);
  s.squeeze_r = 0.5 * std::log(2.0 * s.script_e);
  const double rel = d.phase - response_phase(response, window);
  s.squeeze_phase = wrap_angle(2.0 * rel, kTwoPi);
  s.max_variance_angle = wrap_angle(rel, kPi);
  return s;
}

const char* to_string(QfiForm form) {
  switch (form) {
    case QfiForm::General: return "general";
    case QfiForm::Aligned: return "aligned";
    case QfiForm::BestState: return "best_state";
    case QfiForm::Markov: return "markov";
  }
  return "unknown";
}

double optimal_quadrature_angle(const DisplacementCoefficient& d, double omega0, const Window& window) {
  return d.phase - omega0 * window.length();
}

QfiResult qfi_general(const GaussianProbeInit& init, const ResponseFunction& response,
                      const ForceModulation& force, double omega0, const Window& window) {
  const auto d = displacement_d(response, force, omega0, window);
  const double theta = optimal_quadrature_angle(d, omega0, window);
  const auto snap = covariance_snapshot(init, response, theta, omega0, window);
  QfiResult r;
  r.form = QfiForm::General;
  r.numerator_abs_d_sq = std::norm(d.value);
  r.denominator = snap.det_sigma / snap.var_x_theta;
  r.value = r.numerator_abs_d_sq / r.denominator;
  return r;
}

bool is_aligned(const GaussianProbeInit& init, const DisplacementCoefficient& d,
                const ResponseFunction& response, const Window& window, double tol) {
  if (init.covariance.isotropic()) return true;
  const double target = d.phase - response_phase(response, window);
  return std::abs(angle_distance(init.covariance.max_variance_angle(), target, kPi)) <= tol;
}

QfiResult qfi_aligned(const GaussianProbeInit& init, const ResponseFunction& response,
                      const ForceModulation& force, double omega0, const Window& window) {
  const auto d = displacement_d(response, force, omega0, window);
  if (!is_aligned(init, d, response, window)) {
    throw AlignmentError("qfi_aligned: the initial max-variance angle is not phi^D - phi^G; use qfi_general");
  }
  const double theta = optimal_quadrature_angle(d, omega0, window);
  QfiResult r;
  r.form = QfiForm::Aligned;
  r.numerator_abs_d_sq = std::norm(d.value);
  r.denominator = quadrature_variance(init, response, theta + 0.5 * kPi, omega0, window);
  r.value = r.numerator_abs_d_sq / r.denominator;
  return r;
}

QfiResult qfi_best_state(double energy, const ResponseFunction& response, const ForceModulation& force,
                         double omega0, const Window& window) {
  const double e = script_e(energy);
  const auto d = displacement_d(response, force, omega0, window);
  QfiResult r;
  r.form = QfiForm::BestState;
  r.numerator_abs_d_sq = std::norm(d.value);
  r.denominator = std::norm(response.g(window.length())) * 0.25 / e + bath_noise(response, window);
  r.value = r.numerator_abs_d_sq / r.denominator;
  return r;
}

double fisher_quadrature(double theta, const GaussianProbeInit& init, const ResponseFunction& response,
                         const ForceModulation& force, double omega0, const Window& window) {
  const auto d = displacement_d(response, force, omega0, window);
  const double c = std::cos(theta + omega0 * window.length() - d.phase);
  return std::norm(d.value) * c * c /
         quadrature_variance(init, response, theta + 0.5 * kPi, omega0, window);
}

namespace {

Complex noiseless_displacement(const ForceModulation& force, double omega0, const Window& window,
                               double gamma) {
  const auto breaks = force.breakpoints(window.t0, window.t);
  if (breaks.empty()) return {};
  auto f = [&](double u) {
    return force.value(u) * std::polar(std::exp(-0.5 * gamma * (window.t - u)), omega0 * (u - window.t0));
  };
  QuadratureOptions opt;
  opt.rel_tol = 1e-11;
  return omega0 * simpson_piecewise<Complex>(f, breaks, opt);
}

}  // namespace

double short_time_qfi(const GaussianProbeInit& init, const ForceModulation& force, double omega0,
                      const Window& window) {
  const double tau = window.length();
  const double z = force.value(window.t0);
  const double zd = force.derivative(window.t0);
  const double phase = principal_phase(noiseless_displacement(force, omega0, window, 0.0));
  const double var_p0 = init.variance(phase + 0.5 * kPi);
  return omega0 * omega0 * tau * tau / var_p0 * (z * z + z * zd * tau);
}

double markov_qfi(const GaussianProbeInit& init, double gamma, double n_thermal, const ForceModulation& force,
                  double omega0, const Window& window) {
  if (!(gamma >= 0.0)) throw DomainError("markov_qfi: gamma must be >= 0");
  if (!(n_thermal >= 0.0)) throw DomainError("markov_qfi: n_thermal must be >= 0");
  const double tau = window.length();
  const Complex d = noiseless_displacement(force, omega0, window, gamma);
  const double var_p0 = init.variance(principal_phase(d) + 0.5 * kPi);
  const double decay = std::exp(-gamma * tau);
  return std::norm(d) / (decay * var_p0 - (n_thermal + 0.5) * std::expm1(-gamma * tau));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

EstimationResult simulate_estimation(const GaussianProbeInit& init, const ResponseFunction& response,
                                     const ForceModulation& force, double omega0, const Window& window,
                                     double f_true, int nu, std::uint64_t seed, int replications) {
  if (nu < 1) throw DomainError("simulate_estimation: nu must be >= 1");
  if (replications < 1) throw DomainError("simulate_estimation: replications must be >= 1");
  const auto d = displacement_d(response, force, omega0, window);
  const double slope = d.magnitude();
  if (!(slope > 0.0)) throw EstimationError("simulate_estimation: D = 0, the outcome does not depend on F");

  // Measure P(theta*) = X(theta* + pi/2); its mean is offset + F |D|.
  const double angle = optimal_quadrature_angle(d, omega0, window) + 0.5 * kPi;
  const double offset = quadrature_mean(init, response, d, angle, 0.0, omega0, window);
  const double mean = offset + f_true * slope;
  const double sd = std::sqrt(quadrature_variance(init, response, angle, omega0, window));

  EstimationResult out;
  out.replications = replications;
  out.fisher = slope * slope / (sd * sd);
  double sum_est = 0.0, sum_sq = 0.0;
  for (int r = 0; r < replications; ++r) {
    std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(r)));
    std::normal_distribution<double> normal(mean, sd);
    double acc = 0.0;
    for (int k = 0; k < nu; ++k) acc += normal(rng);
    const double est = (acc / nu - offset) / slope;
    sum_est += est;
    sum_sq += (est - f_true) * (est - f_true);
  }
  out.estimate = sum_est / replications;
  out.empirical_mse = sum_sq / replications;
  out.cramer_rao_ratio = out.empirical_mse * nu * out.fisher;
  return out;
}

}  // namespace nmqfi
