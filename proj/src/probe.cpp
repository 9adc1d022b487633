#include "nmqfi/probe.hpp"

#include <algorithm>
#include <cmath>

#include "nmqfi/quadrature.hpp"

namespace nmqfi {

// ---------------------------------------------------------------------------
// ForceModulation

ForceModulation ForceModulation::constant(double value, double t_i, double t_f) {
  if (!(t_i <= t_f)) throw DomainError("ForceModulation: support needs t_i <= t_f");
  ForceModulation f(Kind::Constant, t_i, t_f);
  f.a_ = value;
  return f;
}

ForceModulation ForceModulation::sinusoid(double amplitude, double frequency, double phase, double t_i,
                                          double t_f) {
  if (!(t_i <= t_f)) throw DomainError("ForceModulation: support needs t_i <= t_f");
  ForceModulation f(Kind::Sinusoid, t_i, t_f);
  f.a_ = amplitude;
  f.b_ = frequency;
  f.c_ = phase;
  return f;
}

ForceModulation ForceModulation::gaussian_pulse(double center, double width, double amplitude,
                                                double t_i, double t_f) {
  if (!(t_i <= t_f)) throw DomainError("ForceModulation: support needs t_i <= t_f");
  if (!(width > 0.0)) throw DomainError("ForceModulation: pulse width must be > 0");
  ForceModulation f(Kind::GaussianPulse, t_i, t_f);
  f.a_ = center;
  f.b_ = width;
  f.c_ = amplitude;
  return f;
}

ForceModulation ForceModulation::table(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 2) throw DomainError("ForceModulation: table needs at least two samples");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].first > samples[i - 1].first))
      throw DomainError("ForceModulation: table times must be strictly increasing");
  ForceModulation f(Kind::Table, samples.front().first, samples.back().first);
  f.table_ = std::move(samples);
  return f;
}

double ForceModulation::raw_value(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return a_;
    case Kind::Sinusoid:
      return a_ * std::sin(b_ * t + c_);
    case Kind::GaussianPulse: {
      const double x = (t - a_) / b_;
      return c_ * std::exp(-0.5 * x * x);
    }
    case Kind::Table: {
      auto it = std::upper_bound(table_.begin(), table_.end(), t,
                                 [](double v, const auto& s) { return v < s.first; });
      if (it == table_.begin()) return table_.front().second;
      if (it == table_.end()) return table_.back().second;
      const auto& [t1, v1] = *(it - 1);
      const auto& [t2, v2] = *it;
      return v1 + (v2 - v1) * (t - t1) / (t2 - t1);
    }
  }
  return 0.0;
}

double ForceModulation::value(double t) const {
  if (t < t_i_ || t > t_f_) return 0.0;
  return raw_value(t);
}

double ForceModulation::derivative(double t) const {
  if (t < t_i_ || t > t_f_) return 0.0;
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::Sinusoid:
      return a_ * b_ * std::cos(b_ * t + c_);
    case Kind::GaussianPulse:
      return -(t - a_) / (b_ * b_) * raw_value(t);
    case Kind::Table: {
      auto it = std::upper_bound(table_.begin(), table_.end(), t,
                                 [](double v, const auto& s) { return v < s.first; });
      if (it == table_.end()) --it;
      if (it == table_.begin()) ++it;
      const auto& [t1, v1] = *(it - 1);
      const auto& [t2, v2] = *it;
      return (v2 - v1) / (t2 - t1);
    }
  }
  return 0.0;
}

std::vector<double> ForceModulation::breakpoints(double a, double b) const {
  const double lo = std::max(a, t_i_);
  const double hi = std::min(b, t_f_);
  if (!(lo < hi)) return {};
  std::vector<double> out{lo};
  if (kind_ == Kind::Table) {
    for (const auto& [t, v] : table_)
      if (t > lo && t < hi) out.push_back(t);
  }
  out.push_back(hi);
  return out;
}

// ---------------------------------------------------------------------------
// Gaussian probe state

double Covariance2::variance(double angle) const {
  const double c = std::cos(angle), s = std::sin(angle);
  return xx * c * c + 2.0 * xp * s * c + pp * s * s;
}

double Covariance2::max_variance_angle() const {
  return wrap_angle(0.5 * std::atan2(2.0 * xp, xx - pp), kPi);
}

bool Covariance2::isotropic(double tol) const {
  return std::abs(xx - pp) <= tol * trace() && std::abs(xp) <= tol * trace();
}

GaussianProbeInit GaussianProbeInit::from_principal(double var_max, double var_min, double max_angle,
                                                    Complex mean) {
  const double c = std::cos(max_angle), s = std::sin(max_angle);
  Covariance2 cov{var_max * c * c + var_min * s * s, (var_max - var_min) * s * c,
                  var_max * s * s + var_min * c * c};
  return {mean, cov};
}

GaussianProbeInit GaussianProbeInit::squeezed(double r, double max_angle, Complex mean) {
  return from_principal(0.5 * std::exp(2.0 * r), 0.5 * std::exp(-2.0 * r), max_angle, mean);
}

void GaussianProbeInit::validate() const {
  const auto& c = covariance;
  if (!(c.xx > 0.0 && c.pp > 0.0 && c.det() > 0.0))
    throw DomainError("GaussianProbeInit: covariance must be positive definite");
  if (c.det() < 0.25 - 1e-12)
    throw DomainError("GaussianProbeInit: covariance violates the uncertainty relation (det < 1/4)");
}

double GaussianProbeInit::mean_quadrature(double angle) const {
  return std::sqrt(2.0) * std::real(mean_amplitude * std::polar(1.0, -angle));
}

double GaussianProbeInit::energy() const {
  return 0.5 * covariance.trace() + std::norm(mean_amplitude);
}

// ---------------------------------------------------------------------------
// Moments

namespace {

void check_window(const ResponseFunction& response, const Window& window, const char* what) {
  if (!(window.t >= window.t0)) throw DomainError(std::string(what) + ": window needs t >= t0");
  response.require_coverage(window.length(), what);
}

}  // namespace

DisplacementCoefficient displacement_d(const ResponseFunction& response, const ForceModulation& force,
                                       double omega0, const Window& window) {
  check_window(response, window, "displacement_d");
  const auto breaks = force.breakpoints(window.t0, window.t);
  Complex value{};
  if (!breaks.empty()) {
    auto integrand = [&](double u) {
      return force.value(u) * std::polar(1.0, omega0 * (u - window.t0)) * response.g(window.t - u);
    };
    QuadratureOptions opt;
    opt.rel_tol = 1e-10;
    value = omega0 * simpson_piecewise<Complex>(integrand, breaks, opt);
  }
  return {value, principal_phase(value), window};
}

Complex bath_displacement_dn(const ResponseFunction& response, const ForceModulation& force,
                             const BathMode& mode, double omega0, const Window& window) {
  check_window(response, window, "bath_displacement_dn");
  if (mode.coupling_sq == 0.0) return {};
  const auto breaks = force.breakpoints(window.t0, window.t);
  if (breaks.empty()) return {};
  const double rate = mode.frequency - omega0;
  QuadratureOptions inner_opt;
  inner_opt.rel_tol = 1e-9;
  inner_opt.min_intervals = 8;
  auto outer = [&](double u) {
    const double zeta = force.value(u);
    if (zeta == 0.0 || u >= window.t) return Complex{};
    auto inner = [&](double s) {
      return std::polar(1.0, rate * (s - window.t0)) * response.g(s - u);
    };
    return zeta * std::polar(1.0, omega0 * (u - window.t0)) * simpson<Complex>(inner, u, window.t, inner_opt);
  };
  QuadratureOptions outer_opt;
  outer_opt.rel_tol = 1e-8;
  outer_opt.min_intervals = 8;
  return omega0 * std::sqrt(mode.coupling_sq) * simpson_piecewise<Complex>(outer, breaks, outer_opt);
}

namespace {

// int_0^tau f(tau - s) e^{i Delta_n s} ds for every mode, f = G or dG/dtau.
std::vector<Complex> overlap_integrals(const ResponseFunction& response, double tau, bool derivative) {
  const auto& bath = response.bath();
  const std::size_t m = bath.size();
  std::vector<Complex> result(m);
  if (m == 0 || tau == 0.0) return result;

  // Node-doubling Simpson shared by all modes, converged on n_B and on the
  // largest overlap.
  std::vector<double> detuning(m), weight(m);
  for (std::size_t n = 0; n < m; ++n) {
    detuning[n] = bath.detuning(n);
    weight[n] = bath.modes()[n].coupling_sq * (bath.modes()[n].occupation + 0.5);
  }
  std::vector<Complex> ends(m), odd(m), even(m), fresh(m);
  auto add = [&](std::vector<Complex>& acc, double s) {
    const Complex g = derivative ? response.g_dot(tau - s) : response.g(tau - s);
    for (std::size_t n = 0; n < m; ++n) acc[n] += g * std::polar(1.0, detuning[n] * s);
  };
  add(ends, 0.0);
  add(ends, tau);
  int intervals = 16;
  for (int i = 1; i < intervals; ++i) add(i % 2 ? odd : even, tau * i / intervals);

  auto estimate = [&](int k, std::vector<Complex>& out) {
    const double h = tau / k;
    for (std::size_t n = 0; n < m; ++n) out[n] = (ends[n] + 4.0 * odd[n] + 2.0 * even[n]) * (h / 3.0);
  };
  auto noise = [&](const std::vector<Complex>& ov) {
    double s = 0.0;
    for (std::size_t n = 0; n < m; ++n) s += weight[n] * std::norm(ov[n]);
    return s;
  };
  std::vector<Complex> prev(m), cur(m);
  estimate(intervals, prev);
  while (intervals < (1 << 20)) {
    const int next = 2 * intervals;
    std::fill(fresh.begin(), fresh.end(), Complex{});
    for (int i = 1; i < next; i += 2) add(fresh, tau * i / next);
    for (std::size_t n = 0; n < m; ++n) {
      even[n] += odd[n];
      odd[n] = fresh[n];
    }
    intervals = next;
    estimate(intervals, cur);
    double max_diff = 0.0, max_abs = 0.0;
    for (std::size_t n = 0; n < m; ++n) {
      max_diff = std::max(max_diff, std::abs(cur[n] - prev[n]));
      max_abs = std::max(max_abs, std::abs(cur[n]));
    }
    const double nb_cur = noise(cur), nb_prev = noise(prev);
    if (max_diff <= 1e-10 * max_abs && std::abs(nb_cur - nb_prev) <= 1e-10 * nb_cur) {
      for (std::size_t n = 0; n < m; ++n) result[n] = cur[n] + (cur[n] - prev[n]) / 15.0;
      return result;
    }
    std::swap(prev, cur);
  }
  throw NumericalError("mode_overlaps: quadrature did not converge");
}

}  // namespace

std::vector<Complex> mode_overlaps(const ResponseFunction& response, double tau) {
  response.require_coverage(tau, "mode_overlaps");
  return overlap_integrals(response, tau, false);
}

std::vector<Complex> mode_overlaps_dot(const ResponseFunction& response, double tau) {
  response.require_coverage(tau, "mode_overlaps_dot");
  return overlap_integrals(response, tau, true);
}

double bath_noise(const ResponseFunction& response, const Window& window) {
  check_window(response, window, "bath_noise");
  const auto overlaps = mode_overlaps(response, window.length());
  const auto& bath = response.bath();
  double s = 0.0;
  for (std::size_t n = 0; n < bath.size(); ++n) {
    const auto& mode = bath.modes()[n];
    s += mode.coupling_sq * (mode.occupation + 0.5) * std::norm(overlaps[n]);
  }
  return s;
}

double response_phase(const ResponseFunction& response, const Window& window) {
  return principal_phase(response.g(window.length()));
}

double quadrature_mean(const GaussianProbeInit& init, const ResponseFunction& response,
                       const DisplacementCoefficient& d, double theta, double force_amplitude,
                       double omega0, const Window& window) {
  check_window(response, window, "quadrature_mean");
  const Complex g = response.g(window.length());
  const double rotation = omega0 * window.length();
  return std::abs(g) * init.mean_quadrature(theta + rotation - principal_phase(g)) +
         force_amplitude * d.magnitude() * std::sin(theta + rotation - d.phase);
}

double quadrature_variance(const GaussianProbeInit& init, const ResponseFunction& response, double theta,
                           double omega0, const Window& window, double noise_term) {
  check_window(response, window, "quadrature_variance");
  const Complex g = response.g(window.length());
  return std::norm(g) * init.variance(theta + omega0 * window.length() - principal_phase(g)) + noise_term;
}

double quadrature_variance(const GaussianProbeInit& init, const ResponseFunction& response, double theta,
                           double omega0, const Window& window) {
  return quadrature_variance(init, response, theta, omega0, window, bath_noise(response, window));
}

CovarianceSnapshot covariance_snapshot(const GaussianProbeInit& init, const ResponseFunction& response,
                                       double theta, double omega0, const Window& window) {
  const double nb = bath_noise(response, window);
  CovarianceSnapshot snap;
  snap.theta = theta;
  snap.noise_term = nb;
  snap.g_abs_sq = std::norm(response.g(window.length()));
  snap.var_x_theta = quadrature_variance(init, response, theta, omega0, window, nb);
  snap.var_p_theta = quadrature_variance(init, response, theta + 0.5 * kPi, omega0, window, nb);
  const double diag = quadrature_variance(init, response, theta + 0.25 * kPi, omega0, window, nb);
  snap.cross = diag - 0.5 * (snap.var_x_theta + snap.var_p_theta);
  snap.det_direct = snap.var_x_theta * snap.var_p_theta - snap.cross * snap.cross;
  const double g2 = snap.g_abs_sq;
  snap.det_sigma = g2 * g2 * init.covariance.det() + g2 * init.symmetrized_noise() * nb + nb * nb;
  if (std::abs(snap.det_sigma - snap.det_direct) > 1e-8 * std::abs(snap.det_sigma)) {
    throw NumericalError("covariance_snapshot: closed-form determinant " + std::to_string(snap.det_sigma) +
                         " disagrees with direct determinant " + std::to_string(snap.det_direct));
  }
  return snap;
}

double rotate_max_variance_angle(double theta_m_0, const ResponseFunction& response, double omega0,
                                 const Window& window) {
  check_window(response, window, "rotate_max_variance_angle");
  return wrap_angle(theta_m_0 + response_phase(response, window) - omega0 * window.length(), kPi);
}

}  // namespace nmqfi
