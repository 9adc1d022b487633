#include "nmqfi/response.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "nmqfi/quadrature.hpp"

namespace nmqfi {

void TimeGrid::validate() const {
  if (!(t_end > t_start)) throw DomainError("TimeGrid: t_end must exceed t_start");
  if (n_steps < 2) throw DomainError("TimeGrid: n_steps must be >= 2");
}

ResponseFunction::ResponseFunction(std::shared_ptr<const DiscreteBath> bath, TimeGrid grid,
                                   std::vector<Complex> g, std::vector<Complex> g_dot,
                                   std::vector<Complex> g_ddot)
    : bath_(std::move(bath)),
      grid_(grid),
      g_(std::move(g)),
      g_dot_(std::move(g_dot)),
      g_ddot_(std::move(g_ddot)) {
  const auto n = static_cast<std::size_t>(grid_.n_steps) + 1;
  if (g_.size() != n || g_dot_.size() != n || g_ddot_.size() != n)
    throw DomainError("ResponseFunction: sample count does not match grid");
  if (grid_.t_start != 0.0) throw DomainError("ResponseFunction: grid must start at tau = 0");
}

void ResponseFunction::require_coverage(double tau, const char* what) const {
  if (tau < -1e-12 * grid_.t_end || tau > grid_.t_end * (1.0 + 1e-12)) {
    throw CoverageError(std::string(what) + ": needs G on [0, " + std::to_string(tau) +
                        "] but the response covers [0, " + std::to_string(grid_.t_end) + "]");
  }
}

namespace {

struct HermiteSpan {
  std::size_t j;
  double u;  // local coordinate in [0, 1]
  double h;
};

HermiteSpan locate(const TimeGrid& grid, double tau) {
  const double h = grid.step();
  double x = tau / h;
  x = std::clamp(x, 0.0, static_cast<double>(grid.n_steps));
  auto j = static_cast<std::size_t>(x);
  if (j >= static_cast<std::size_t>(grid.n_steps)) j = static_cast<std::size_t>(grid.n_steps) - 1;
  return {j, x - static_cast<double>(j), h};
}

Complex hermite(std::span<const Complex> f, std::span<const Complex> df, const HermiteSpan& s) {
  const double u = s.u, u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  return h00 * f[s.j] + h10 * s.h * df[s.j] + h01 * f[s.j + 1] + h11 * s.h * df[s.j + 1];
}

}  // namespace

Complex ResponseFunction::g(double tau) const {
  require_coverage(tau, "G");
  return hermite(g_, g_dot_, locate(grid_, tau));
}

Complex ResponseFunction::g_dot(double tau) const {
  require_coverage(tau, "dG/dtau");
  return hermite(g_dot_, g_ddot_, locate(grid_, tau));
}

namespace {

struct RawSolution {
  std::vector<Complex> g, g_dot, g_ddot;
};

// Product-trapezoid march with step h over n steps.
//   Gd_j  = -h [ k_j G_0 / 2 + sum_{m=1}^{j-1} k_{j-m} G_m + k_0 G_j / 2 ]
//   G_j   = G_{j-1} + h/2 (Gd_{j-1} + Gd_j)      (implicit in G_j, solved exactly)
//   Gdd_j = -k_j - h [ sum_{m=1}^{j-1} k_{j-m} Gd_m + k_0 Gd_j / 2 ]
RawSolution march(const DiscreteBath& bath, double h, int n) {
  const auto len = static_cast<std::size_t>(n) + 1;
  std::vector<Complex> kernel(len);
  for (std::size_t k = 0; k < len; ++k) kernel[k] = memory_kernel(bath, static_cast<double>(k) * h);

  RawSolution out{std::vector<Complex>(len), std::vector<Complex>(len), std::vector<Complex>(len)};
  auto& g = out.g;
  auto& gd = out.g_dot;
  auto& gdd = out.g_ddot;
  g[0] = 1.0;
  gd[0] = 0.0;
  gdd[0] = -kernel[0];
  const Complex k0 = kernel[0];
  const Complex denom = 1.0 + 0.25 * h * h * k0;
  for (std::size_t j = 1; j < len; ++j) {
    Complex s = 0.5 * kernel[j] * g[0];
    Complex sd{};
    for (std::size_t m = 1; m < j; ++m) {
      s += kernel[j - m] * g[m];
      sd += kernel[j - m] * gd[m];
    }
    g[j] = (g[j - 1] + 0.5 * h * gd[j - 1] - 0.5 * h * h * s) / denom;
    gd[j] = -h * (s + 0.5 * k0 * g[j]);
    gdd[j] = -kernel[j] - h * (sd + 0.5 * k0 * gd[j]);
  }
  return out;
}

}  // namespace

ResponseFunction solve_response(std::shared_ptr<const DiscreteBath> bath, const TimeGrid& grid,
                                Refinement refinement) {
  grid.validate();
  if (grid.t_start != 0.0) throw DomainError("solve_response: grid must start at 0");
  const double h = grid.step();
  const int n = grid.n_steps;

  RawSolution sol = march(*bath, h, n);
  if (refinement == Refinement::Richardson && !bath->empty()) {
    RawSolution fine = march(*bath, 0.5 * h, 2 * n);
    for (std::size_t j = 0; j < sol.g.size(); ++j) {
      sol.g[j] = (4.0 * fine.g[2 * j] - sol.g[j]) / 3.0;
      sol.g_dot[j] = (4.0 * fine.g_dot[2 * j] - sol.g_dot[j]) / 3.0;
      sol.g_ddot[j] = (4.0 * fine.g_ddot[2 * j] - sol.g_ddot[j]) / 3.0;
    }
    sol.g[0] = 1.0;
    sol.g_dot[0] = 0.0;
  }
  for (std::size_t j = 0; j < sol.g.size(); ++j) {
    if (!(std::abs(sol.g[j]) <= 1.0 + 1e-6)) {
      throw NumericalError("solve_response: |G| = " + std::to_string(std::abs(sol.g[j])) +
                           " at tau = " + std::to_string(grid.at(static_cast<int>(j))) +
                           "; step too coarse for the kernel (Omega_2 = " +
                           std::to_string(std::sqrt(bath->k_squared())) + ")");
    }
  }
  return {std::move(bath), grid, std::move(sol.g), std::move(sol.g_dot), std::move(sol.g_ddot)};
}

ResponseFunction solve_response(const DiscreteBath& bath, const TimeGrid& grid, Refinement refinement) {
  return solve_response(std::make_shared<const DiscreteBath>(bath), grid, refinement);
}

int default_n_steps(const DiscreteBath& bath, double t_end) {
  const double rate =
      std::max({std::sqrt(bath.k_squared()), bath.probe_frequency(), bath.max_abs_detuning()});
  const double needed = std::ceil(t_end * rate / 0.02);
  return std::max(1024, static_cast<int>(std::min(needed, 1e8)));
}

// ---------------------------------------------------------------------------
// Dyson series

namespace {

// Quasi-polynomial sum_{r, m} c_{r,m} x^m exp(rate_r x) for a single mode,
// rate_0 = 0 and rate_1 = i*Delta.
class QuasiPoly {
 public:
  explicit QuasiPoly(Complex rate) : rates_{Complex{}, rate} {}

  static QuasiPoly one(Complex rate) {
    QuasiPoly p(rate);
    p.terms_[{0, 0}] = 1.0;
    return p;
  }

  // x -> int_0^x exp(b (x - s)) f(s) ds, with b = rates_[rb].
  QuasiPoly conv_exp(int rb) const {
    QuasiPoly out(rates_[1]);
    const Complex b = rates_[rb];
    for (const auto& [key, coef] : terms_) {
      const auto [ra, m] = key;
      const Complex c = rates_[ra] - b;
      if (c == Complex{}) {
        // exp(bx) * x^{m+1}/(m+1) with rate a == b
        out.terms_[{ra, m + 1}] += coef / static_cast<double>(m + 1);
        continue;
      }
      // int_0^x s^m e^{cs} ds = sum_j (-1)^j m!/(m-j)! x^{m-j} e^{cx} / c^{j+1}
      //                         - (-1)^m m! / c^{m+1}
      double falling = 1.0;
      Complex cpow = c;
      for (int j = 0; j <= m; ++j) {
        const double sign = (j % 2) ? -1.0 : 1.0;
        out.terms_[{ra, m - j}] += coef * sign * falling / cpow;  // e^{cx} e^{bx} = e^{ax}
        falling *= static_cast<double>(m - j);
        cpow *= c;
      }
      // constant part times e^{bx}: m! / c^{m+1} with sign -(-1)^m
      double fact = 1.0;
      for (int k = 2; k <= m; ++k) fact *= k;
      Complex cm1 = std::pow(c, m + 1);
      const double sign = (m % 2) ? 1.0 : -1.0;
      out.terms_[{rb, 0}] += coef * sign * fact / cm1;
    }
    return out;
  }

  QuasiPoly scaled(Complex s) const {
    QuasiPoly out = *this;
    for (auto& [key, coef] : out.terms_) coef *= s;
    return out;
  }

  Complex operator()(double x) const {
    Complex v{};
    for (const auto& [key, coef] : terms_) {
      const auto [r, m] = key;
      v += coef * std::pow(x, m) * std::exp(rates_[r] * x);
    }
    return v;
  }

 private:
  std::array<Complex, 2> rates_;
  std::map<std::pair<int, int>, Complex> terms_;
};

Complex dyson_single_mode(const BathMode& mode, double detuning, double tau, int order_k) {
  const double omega2 = std::sqrt(mode.coupling_sq);
  const bool resonant = std::abs(detuning) < 1e-6 * omega2 || detuning == 0.0;
  const Complex rate = resonant ? Complex{} : Complex{0.0, detuning};
  const int kernel_rate = resonant ? 0 : 1;

  QuasiPoly term = QuasiPoly::one(rate);
  Complex total = 1.0;
  for (int k = 1; k <= order_k; ++k) {
    term = term.conv_exp(kernel_rate).conv_exp(0).scaled(-mode.coupling_sq);
    total += term(tau);
  }
  return total;
}

// (exp(i d x) - 1) / (i d), stable near d x = 0
Complex expm1_over(double d, double x) {
  const double half = 0.5 * d * x;
  const double sinc = std::abs(half) < 1e-4 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  return x * std::polar(1.0, half) * sinc;
}

class NestedDyson {
 public:
  NestedDyson(const DiscreteBath& bath, int nodes) : bath_(bath), rule_(nodes) {}

  // [G_0(tau), ..., G_k(tau)]
  std::vector<Complex> terms(double tau, int k) const {
    std::vector<Complex> out(static_cast<std::size_t>(k) + 1, Complex{});
    out[0] = 1.0;
    if (k == 0 || tau == 0.0) return out;
    const double half = 0.5 * tau;
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) {
      const double s = half * (1.0 + rule_.nodes[i]);
      const double w = half * rule_.weights[i];
      const Complex k1 = integrated_kernel(tau - s);
      const auto inner = terms(s, k - 1);
      for (int j = 1; j <= k; ++j) out[static_cast<std::size_t>(j)] -= w * k1 * inner[static_cast<std::size_t>(j - 1)];
    }
    return out;
  }

 private:
  // int_0^x kappa(y) dy
  Complex integrated_kernel(double x) const {
    Complex s{};
    for (std::size_t n = 0; n < bath_.size(); ++n)
      s += bath_.modes()[n].coupling_sq * expm1_over(bath_.detuning(n), x);
    return s;
  }

  const DiscreteBath& bath_;
  GaussLegendre rule_;
};

Complex sum_terms(const std::vector<Complex>& t) {
  Complex s{};
  for (const auto& v : t) s += v;
  return s;
}

}  // namespace

Complex dyson_series(const DiscreteBath& bath, double tau, int order_k) {
  if (order_k < 0) throw DomainError("dyson_series: order_k must be >= 0");
  if (order_k == 0 || bath.empty()) return 1.0;
  if (bath.size() == 1) return dyson_single_mode(bath.modes()[0], bath.detuning(0), tau, order_k);
  if (order_k > 4) throw DomainError("dyson_series: order_k > 4 unsupported for multi-mode baths");

  const double scale = std::max(bath.max_abs_detuning(), std::sqrt(bath.k_squared())) * std::abs(tau);
  int nodes = 12 + static_cast<int>(std::ceil(scale));
  Complex prev = sum_terms(NestedDyson(bath, nodes).terms(tau, order_k));
  for (int attempt = 0; attempt < 6; ++attempt) {
    nodes += 8;
    const Complex cur = sum_terms(NestedDyson(bath, nodes).terms(tau, order_k));
    if (std::abs(cur - prev) <= 1e-8 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  throw NumericalError("dyson_series: nested quadrature did not reach 1e-8");
}

Complex short_time_g(const DiscreteBath& bath, double tau) {
  double first = 0.0;
  for (std::size_t n = 0; n < bath.size(); ++n)
    first += bath.modes()[n].coupling_sq * (bath.modes()[n].frequency - bath.probe_frequency());
  return {1.0 - 0.5 * bath.k_squared() * tau * tau, tau * tau * tau / 6.0 * first};
}

Complex markov_closed_form(double gamma, double tau) {
  if (gamma < 0.0 || tau < 0.0) throw DomainError("markov_closed_form: gamma and tau must be >= 0");
  return std::exp(-0.5 * gamma * tau);
}

namespace {

// Bracket of G_1 for a single detuning d = omega_n - omega_0:
//   (1 - cos(d tau))/d^2 - i tau/d + i sin(d tau)/d^2
Complex g1_bracket(double d, double tau, double resonance_threshold) {
  if (std::abs(d) < resonance_threshold || d == 0.0) return {0.5 * tau * tau, 0.0};
  const double x = d * tau;
  const double s = std::sin(0.5 * x);
  const double re = 2.0 * s * s / (d * d);
  double im;
  if (std::abs(x) < 1e-3) {
    const double x2 = x * x;
    im = tau * tau * x * (-1.0 / 6.0 + x2 / 120.0 - x2 * x2 / 5040.0);
  } else {
    im = (std::sin(x) - x) / (d * d);
  }
  return {re, im};
}

}  // namespace

Complex long_time_g1(const DiscreteBath& bath, double tau) {
  const double threshold = 1e-6 * std::sqrt(bath.k_squared());
  Complex s{};
  for (std::size_t n = 0; n < bath.size(); ++n)
    s -= bath.modes()[n].coupling_sq * g1_bracket(-bath.detuning(n), tau, threshold);
  return s;
}

LongTimeG1 long_time_g1(const ContinuousSpectrum& spectrum, double probe_frequency, double tau) {
  spectrum.validate();
  const double end = spectrum.support_end();
  auto integrand = [&](double w) {
    return -spectrum.density(w) * g1_bracket(w - probe_frequency, tau, 0.0);
  };
  std::vector<double> breaks{0.0};
  if (probe_frequency > 0.0 && probe_frequency < end) breaks.push_back(probe_frequency);
  breaks.push_back(end);
  QuadratureOptions opt;
  opt.rel_tol = 1e-9;
  opt.min_intervals = 64;
  opt.max_intervals = 1 << 22;
  const Complex value = simpson_piecewise<Complex>(integrand, breaks, opt);
  return {value, -0.5 * kPi * tau * spectrum.density(probe_frequency)};
}

}  // namespace nmqfi
