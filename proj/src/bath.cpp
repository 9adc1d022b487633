#include "nmqfi/bath.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

namespace nmqfi {

DiscreteBath::DiscreteBath(std::vector<BathMode> modes, double probe_frequency)
    : modes_(std::move(modes)), probe_frequency_(probe_frequency) {
  if (!(probe_frequency > 0.0)) throw DomainError("DiscreteBath: probe frequency must be > 0");
  for (const auto& m : modes_) {
    if (!(m.coupling_sq >= 0.0)) throw DomainError("DiscreteBath: |K_n|^2 must be >= 0");
    if (!(m.frequency >= 0.0)) throw DomainError("DiscreteBath: omega_n must be >= 0");
    if (!(m.occupation >= 0.0)) throw DomainError("DiscreteBath: N_n must be >= 0");
  }
}

double DiscreteBath::max_abs_detuning() const {
  double m = 0.0;
  for (std::size_t n = 0; n < modes_.size(); ++n) m = std::max(m, std::abs(detuning(n)));
  return m;
}

double DiscreteBath::k_squared() const {
  double s = 0.0;
  for (const auto& m : modes_) s += m.coupling_sq;
  return s;
}

double DiscreteBath::script_n() const {
  double s = 0.0;
  for (const auto& m : modes_) s += m.coupling_sq * (m.occupation + 0.5);
  return s;
}

DiscreteBath DiscreteBath::scaled(double factor) const {
  std::vector<BathMode> out(modes_.begin(), modes_.end());
  for (auto& m : out) m.coupling_sq *= factor;
  return {std::move(out), probe_frequency_};
}

double OccupationModel::operator()(double omega) const {
  switch (kind) {
    case Kind::ZeroTemperature:
      return 0.0;
    case Kind::Thermal:
      if (value <= 0.0) return 0.0;
      if (omega <= 0.0) throw DomainError("thermal occupation undefined at omega <= 0");
      return 1.0 / std::expm1(omega / value);
    case Kind::Constant:
      return value;
  }
  return 0.0;
}

void ContinuousSpectrum::validate() const {
  if (family == SpectrumFamily::Ohmic && !(exponent > 0.0))
    throw DomainError("ContinuousSpectrum: ohmic exponent s must be > 0");
  if (!(scale >= 0.0)) throw DomainError("ContinuousSpectrum: scale must be >= 0");
  if (!(cutoff > 0.0)) throw DomainError("ContinuousSpectrum: cutoff must be > 0");
  if (occupation.kind == OccupationModel::Kind::Thermal && !(occupation.value >= 0.0))
    throw DomainError("ContinuousSpectrum: temperature must be >= 0");
  if (occupation.kind == OccupationModel::Kind::Constant && !(occupation.value >= 0.0))
    throw DomainError("ContinuousSpectrum: occupation must be >= 0");
}

double ContinuousSpectrum::support_end() const {
  return cutoff_shape == CutoffShape::Hard ? cutoff : 8.0 * cutoff;
}

double ContinuousSpectrum::density(double omega) const {
  if (omega < 0.0 || omega > support_end()) return 0.0;
  double j = scale;
  if (family == SpectrumFamily::Ohmic) j *= std::pow(omega, exponent);
  if (cutoff_shape == CutoffShape::Exponential) j *= std::exp(-omega / cutoff);
  return j;
}

double ContinuousSpectrum::k_squared_exact() const {
  const double end = support_end();
  if (family == SpectrumFamily::FlatBand) {
    if (cutoff_shape == CutoffShape::Hard) return scale * end;
    return scale * cutoff * (-std::expm1(-end / cutoff));
  }
  if (cutoff_shape == CutoffShape::Hard) return scale * std::pow(end, exponent + 1.0) / (exponent + 1.0);
  // int_0^{8 wc} w^s e^{-w/wc} dw = wc^{s+1} * lower_gamma(s+1, 8)
  return scale * std::pow(cutoff, exponent + 1.0) * boost::math::tgamma_lower(exponent + 1.0, end / cutoff);
}

DiscreteBath discretize(const ContinuousSpectrum& spectrum, int n_modes, double probe_frequency) {
  spectrum.validate();
  if (n_modes < 1) throw DomainError("discretize: n_modes must be >= 1");
  const double width = spectrum.support_end() / n_modes;
  std::vector<BathMode> modes;
  modes.reserve(static_cast<std::size_t>(n_modes));
  for (int k = 0; k < n_modes; ++k) {
    const double mid = (k + 0.5) * width;
    modes.push_back({spectrum.density(mid) * width, mid, spectrum.occupation(mid)});
  }
  return {std::move(modes), probe_frequency};
}

Complex memory_kernel(const DiscreteBath& bath, double tau) {
  Complex s{};
  for (std::size_t n = 0; n < bath.size(); ++n)
    s += bath.modes()[n].coupling_sq * std::polar(1.0, bath.detuning(n) * tau);
  return s;
}

Complex bare_correlation_c0(const DiscreteBath& bath, double tau) {
  Complex s{};
  for (std::size_t n = 0; n < bath.size(); ++n) {
    const auto& m = bath.modes()[n];
    s += m.coupling_sq * (m.occupation + 0.5) * std::polar(1.0, bath.detuning(n) * tau);
  }
  return s;
}

double BathMoments::max_rate() const {
  double m = 0.0;
  for (double w : omega_p) m = std::max(m, w);
  for (double c : chi_q) m = std::max(m, c);
  return m;
}

BathMoments moments(const DiscreteBath& bath, int p_max) {
  if (p_max < 2) throw DomainError("moments: p_max must be >= 2");
  BathMoments out;
  out.k_squared = bath.k_squared();
  out.script_n = bath.script_n();
  for (int p = 2; p <= p_max; ++p) {
    double s = 0.0;
    for (std::size_t n = 0; n < bath.size(); ++n)
      s += bath.modes()[n].coupling_sq * std::pow(bath.detuning(n), p - 2);
    out.omega_p.push_back(std::pow(std::abs(s), 1.0 / p));
  }
  if (out.script_n > 0.0) {
    out.chi_defined = true;
    for (int q = 1; q <= p_max; ++q) {
      double s = 0.0;
      for (std::size_t n = 0; n < bath.size(); ++n) {
        const auto& m = bath.modes()[n];
        s += m.coupling_sq * (m.occupation + 0.5) / out.script_n * std::pow(bath.detuning(n), q);
      }
      out.chi_q.push_back(std::pow(std::abs(s), 1.0 / q));
    }
  }
  return out;
}

}  // namespace nmqfi
