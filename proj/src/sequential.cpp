#include "nmqfi/sequential.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "nmqfi/metrology.hpp"
#include "nmqfi/parallel.hpp"
#include "nmqfi/quadrature.hpp"

namespace nmqfi {

SequentialScheme SequentialScheme::make(double total_window, double interval, double start) {
  if (!(interval > 0.0)) throw DomainError("sequential: tau must be > 0");
  if (!(total_window > 0.0)) throw DomainError("sequential: T must be > 0");
  const double ratio = std::floor(total_window / interval + 1e-9);
  if (ratio < 1.0) throw DomainError("sequential: tau exceeds the window T");
  if (ratio > std::numeric_limits<int>::max()) throw DomainError("sequential: too many repetitions");
  return {total_window, interval, static_cast<int>(ratio), start};
}

XiC xi_and_c(const ForceModulation& force, double omega0, double total_window, double start) {
  const double end = start + total_window;
  const auto breaks = force.breakpoints(start, end);
  XiC out;
  if (!breaks.empty()) {
    QuadratureOptions opt;
    opt.rel_tol = 1e-11;
    out.xi = simpson_piecewise<double>([&](double t) { return std::pow(force.value(t), 2); }, breaks, opt);
    const double energy_like = simpson_piecewise<double>(
        [&](double t) {
          const double z = force.value(t), zd = force.derivative(t);
          return zd * zd + omega0 * omega0 * z * z;
        },
        breaks, opt);
    out.c_coeff = 0.25 * energy_like;
  }
  const double boundary = force.value(end) * force.derivative(end) - force.value(start) * force.derivative(start);
  out.c_coeff -= boundary / 3.0;
  return out;
}

SeqResult seq_qfi(const SequentialScheme& scheme, double energy, const ResponseFunction& response,
                  const ForceModulation& force, double omega0) {
  if (!(scheme.interval > 0.0)) throw DomainError("seq_qfi: tau must be > 0");
  if (scheme.repetitions < 1) throw DomainError("seq_qfi: nu must be >= 1");
  const double e = script_e(energy);
  const double tau = scheme.interval;
  response.require_coverage(tau, "seq_qfi");

  SeqResult out;
  out.tau_used = tau;
  const Window first{scheme.start, scheme.start + tau};
  out.denominator = 0.25 * std::norm(response.g(tau)) / e + bath_noise(response, first);
  out.per_step_qfi.reserve(static_cast<std::size_t>(scheme.repetitions));
  for (int k = 0; k < scheme.repetitions; ++k) {
    const Window w{scheme.start + k * tau, scheme.start + (k + 1) * tau};
    const double f = std::norm(displacement_d(response, force, omega0, w).value) / out.denominator;
    out.per_step_qfi.push_back(f);
    out.total_qfi += f;
  }
  const auto xc = xi_and_c(force, omega0, scheme.total_window, scheme.start);
  out.xi = xc.xi;
  out.c_coeff = xc.c_coeff;
  return out;
}

double seq_noise_double_integral(const ResponseFunction& response, double tau, int n_intervals) {
  response.require_coverage(tau, "seq_noise_double_integral");
  if (n_intervals < 2 || n_intervals % 2) throw DomainError("seq_noise_double_integral: need an even n >= 2");
  const double h = tau / n_intervals;
  std::vector<Complex> gv(static_cast<std::size_t>(n_intervals) + 1);
  std::vector<double> w(gv.size());
  for (int i = 0; i <= n_intervals; ++i) {
    gv[i] = response.g(tau - i * h);
    w[i] = (i == 0 || i == n_intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  }
  // C0 depends only on i - j.
  std::vector<Complex> c0(2 * gv.size() - 1);
  for (int k = -n_intervals; k <= n_intervals; ++k) c0[k + n_intervals] = bare_correlation_c0(response.bath(), k * h);
  Complex s{};
  for (int i = 0; i <= n_intervals; ++i)
    for (int j = 0; j <= n_intervals; ++j) s += w[i] * w[j] * gv[i] * std::conj(gv[j]) * c0[i - j + n_intervals];
  return std::real(s) * (h / 3.0) * (h / 3.0);
}

TauBounds default_tau_bounds(const ResponseFunction& response, double total_window) {
  const auto m = moments(response.bath(), 2);
  double hi = std::min(total_window, response.coverage());
  if (m.omega(2) > 0.0) hi = std::min(hi, 5.0 / m.omega(2));
  return {8.0 * response.grid().step(), hi};
}

TauOptimum optimize_tau(double total_window, double energy, const ResponseFunction& response,
                        const ForceModulation& force, double omega0, TauBounds bounds, double start) {
  if (!(bounds.lo > 0.0 && bounds.lo < bounds.hi && bounds.hi <= total_window * (1.0 + 1e-12)))
    throw DomainError("optimize_tau: tau bounds must satisfy 0 < lo < hi <= T");
  response.require_coverage(bounds.hi, "optimize_tau");
  script_e(energy);

  const double T = total_window;
  const long nu_min = std::max(1L, static_cast<long>(std::ceil(T / bounds.hi - 1e-9)));
  const long nu_max = static_cast<long>(std::floor(T / bounds.lo + 1e-9));
  if (nu_max < nu_min) throw DomainError("optimize_tau: no integer repetition count inside the tau bounds");

  std::map<long, double> cache;
  std::mutex cache_mutex;
  auto evaluate = [&](long nu) {
    const double tau = T / static_cast<double>(nu);
    const auto r = seq_qfi(SequentialScheme{T, tau, static_cast<int>(nu), start}, energy, response, force, omega0);
    return r.total_qfi;
  };
  auto objective = [&](long nu) {
    {
      std::lock_guard lock(cache_mutex);
      if (auto it = cache.find(nu); it != cache.end()) return it->second;
    }
    const double v = evaluate(nu);
    std::lock_guard lock(cache_mutex);
    cache.emplace(nu, v);
    return v;
  };

  // Coarse log-spaced scan, mapped to integer repetition counts.
  constexpr int kScan = 64;
  std::vector<long> scan;
  for (int i = 0; i < kScan; ++i) {
    const double tau = bounds.lo * std::pow(bounds.hi / bounds.lo, i / (kScan - 1.0));
    const long nu = std::clamp(static_cast<long>(std::floor(T / tau + 1e-9)), nu_min, nu_max);
    if (scan.empty() || scan.back() != nu) scan.push_back(nu);
  }
  std::vector<double> values(scan.size());
  parallel_for(scan.size(), [&](std::size_t i) { values[i] = objective(scan[i]); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < scan.size(); ++i)
    if (values[i] > values[best]) best = i;

  // scan is ordered by decreasing nu; bracket the best point by its neighbours.
  const long x_hi = best == 0 ? scan.front() : scan[best - 1];
  const long x_lo = best + 1 == scan.size() ? scan.back() : scan[best + 1];
  long nu_best = scan[best];
  if (x_hi - x_lo > 1) {
    auto interpolated = [&](double x) {
      const long a = std::clamp(static_cast<long>(std::floor(x)), nu_min, nu_max);
      const long b = std::min(a + 1, nu_max);
      const double fa = objective(a);
      if (b == a) return fa;
      return fa + (objective(b) - fa) * (x - static_cast<double>(a));
    };
    const auto g = golden_section_max(interpolated, static_cast<double>(x_lo), static_cast<double>(x_hi), 1e-4, 1.0);
    for (long nu : {static_cast<long>(std::floor(g.x)) - 1, static_cast<long>(std::floor(g.x)),
                    static_cast<long>(std::ceil(g.x)), static_cast<long>(std::ceil(g.x)) + 1}) {
      if (nu < x_lo || nu > x_hi) continue;
      if (objective(nu) > objective(nu_best)) nu_best = nu;
    }
  }

  TauOptimum out;
  out.tau_opt = T / static_cast<double>(nu_best);
  out.seq = seq_qfi(SequentialScheme{T, out.tau_opt, static_cast<int>(nu_best), start}, energy, response, force,
                    omega0);
  out.at_upper_bound = nu_best == nu_min;
  out.at_lower_bound = nu_best == nu_max;
  out.evaluations = static_cast<int>(cache.size());
  return out;
}

namespace {

void require_noisy(const BathMoments& m, const char* what) {
  if (!(m.script_n > 0.0))
    throw DomainError(std::string(what) + ": N = 0 (noiseless bath) has no finite optimum");
}

}  // namespace

double tau_opt_asymptotic(double energy, const BathMoments& m, double xi, double c_coeff) {
  require_noisy(m, "tau_opt_asymptotic");
  if (!(xi > 0.0)) throw DomainError("tau_opt_asymptotic: xi must be > 0");
  const double e = script_e(energy);
  const double n = m.script_n;
  const double sqrt3 = std::sqrt(3.0);
  return std::pow(e, -0.5) / (2.0 * std::sqrt(3.0 * n)) +
         (c_coeff + xi * m.k_squared) / (16.0 * sqrt3 * std::pow(n, 1.5) * xi) * std::pow(e, -1.5);
}

double seq_qfi_asymptotic(double energy, const BathMoments& m, double xi, double c_coeff, double omega0,
                          bool omega0_prefactor) {
  require_noisy(m, "seq_qfi_asymptotic");
  const double e = script_e(energy);
  const double n = m.script_n;
  const double sqrt3 = std::sqrt(3.0);
  const double value = sqrt3 * xi / (2.0 * std::sqrt(n)) * std::sqrt(e) +
                       sqrt3 / (32.0 * std::pow(n, 1.5)) * (2.0 * m.k_squared * xi + 7.0 / 3.0 * c_coeff) /
                           std::sqrt(e);
  return omega0_prefactor ? omega0 * omega0 * value : value;
}

double validity_rate(const BathMoments& m, double omega0) { return std::max(m.max_rate(), omega0); }

MarkovSeq markov_seq(double energy, double gamma, double n_thermal, double xi, double omega0,
                     bool omega0_prefactor) {
  if (!(gamma >= 0.0)) throw DomainError("markov_seq: gamma must be >= 0");
  if (!(n_thermal >= 0.0)) throw DomainError("markov_seq: n_thermal must be >= 0");
  const double e = script_e(energy);
  MarkovSeq out;
  if (gamma == 0.0) {
    out.noiseless = true;
    out.tau_opt = std::numeric_limits<double>::infinity();
    out.total_qfi_bound = std::numeric_limits<double>::infinity();
    return out;
  }
  const double a = gamma * (n_thermal + 0.5);
  out.tau_opt = 1.0 / (8.0 * a * std::sqrt(e));
  out.total_qfi_bound = xi / (3.0 * a) * (omega0_prefactor ? omega0 * omega0 : 1.0);
  return out;
}

}  // namespace nmqfi
