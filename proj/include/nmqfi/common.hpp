#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nmqfi {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain of an operation (negative energy below vacuum,
/// malformed spectrum, empty grid, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A quantity was requested beyond the time span a ResponseFunction covers.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Solver instability, failed quadrature convergence or an internal
/// consistency check that did not hold.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// qfi_aligned was called for an initial state whose maximal-variance
/// quadrature is not aligned with the displacement.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Estimation impossible because the measured quadrature carries no signal.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Principal phase in [0, 2pi); zero for a vanishing modulus.
inline double principal_phase(Complex z) {
  if (z == Complex{}) return 0.0;
  double phase = std::arg(z);
  if (phase < 0.0) phase += kTwoPi;
  if (phase >= kTwoPi) phase -= kTwoPi;
  return phase;
}

/// Reduce an angle into [0, period).
inline double wrap_angle(double angle, double period) {
  double r = std::fmod(angle, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

/// Signed distance between two angles modulo period, in (-period/2, period/2].
inline double angle_distance(double a, double b, double period) {
  double d = wrap_angle(a - b, period);
  if (d > 0.5 * period) d -= period;
  return d;
}

}  // namespace nmqfi
