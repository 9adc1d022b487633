#pragma once

#include <memory>
#include <span>
#include <vector>

#include "nmqfi/bath.hpp"
#include "nmqfi/common.hpp"

namespace nmqfi {

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  int n_steps = 1024;

  double step() const { return (t_end - t_start) / n_steps; }
  double at(int j) const { return t_start + j * step(); }
  void validate() const;
};

/// How solve_response post-processes the product-trapezoid march.
///   None:       the plain second-order scheme on the requested grid.
///   Richardson: the scheme on h and h/2, combined to cancel the h^2 term.
enum class Refinement { None, Richardson };

/// Sampled bath response G(tau) with its first two derivatives on a uniform
/// grid starting at tau = 0. Off-grid values use cubic Hermite interpolation.
class ResponseFunction {
 public:
  ResponseFunction(std::shared_ptr<const DiscreteBath> bath, TimeGrid grid, std::vector<Complex> g,
                   std::vector<Complex> g_dot, std::vector<Complex> g_ddot);

  const TimeGrid& grid() const { return grid_; }
  const DiscreteBath& bath() const { return *bath_; }
  std::shared_ptr<const DiscreteBath> bath_handle() const { return bath_; }

  std::span<const Complex> g_samples() const { return g_; }
  std::span<const Complex> g_dot_samples() const { return g_dot_; }
  std::span<const Complex> g_ddot_samples() const { return g_ddot_; }

  double coverage() const { return grid_.t_end; }
  /// Throws CoverageError unless [0, tau] lies inside the grid.
  void require_coverage(double tau, const char* what) const;

  Complex g(double tau) const;
  Complex g_dot(double tau) const;

 private:
  std::shared_ptr<const DiscreteBath> bath_;
  TimeGrid grid_;
  std::vector<Complex> g_, g_dot_, g_ddot_;
};

/// Solves  dG/dtau = -int_0^tau kappa(tau - s) G(s) ds,  G(0) = 1, G'(0) = 0
/// by the implicit product-trapezoid march. Throws NumericalError if |G|
/// exceeds 1 + 1e-6 (grid too coarse for the kernel).
ResponseFunction solve_response(std::shared_ptr<const DiscreteBath> bath, const TimeGrid& grid,
                                Refinement refinement = Refinement::Richardson);
ResponseFunction solve_response(const DiscreteBath& bath, const TimeGrid& grid,
                                Refinement refinement = Refinement::Richardson);

/// Smallest n_steps (floor 1024) with h * max(Omega_2, omega_0, max|detuning|) <= 0.02.
int default_n_steps(const DiscreteBath& bath, double t_end);

/// Truncated nested-integral series for G(tau) up to order_k.
Complex dyson_series(const DiscreteBath& bath, double tau, int order_k);

/// 1 - (K^2/2) tau^2 + i (tau^3/6) sum |K_n|^2 (omega_n - omega_0)
Complex short_time_g(const DiscreteBath& bath, double tau);

/// exp(-gamma tau / 2)
Complex markov_closed_form(double gamma, double tau);

/// First-order series term G_1(tau) for a discrete bath.
Complex long_time_g1(const DiscreteBath& bath, double tau);

struct LongTimeG1 {
  Complex value;            ///< G_1(tau) integrated over the continuum
  double real_asymptote;    ///< -(pi/2) tau J(omega_0)
};
LongTimeG1 long_time_g1(const ContinuousSpectrum& spectrum, double probe_frequency, double tau);

}  // namespace nmqfi
