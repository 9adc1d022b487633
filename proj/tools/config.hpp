#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nmqfi/nmqfi.hpp"

namespace nmqfi::cli {

/// Malformed or invalid configuration; line is 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line) : Error(format(message, line)), line_(line) {}
  int line() const { return line_; }

 private:
  static std::string format(const std::string& message, int line) {
    return line > 0 ? "config line " + std::to_string(line) + ": " + message : "config: " + message;
  }
  int line_;
};

enum class StateKind { Vacuum, Coherent, Thermal, Squeezed, Covariance, Best };

struct ProbeSpec {
  double omega0 = 1.0;
  StateKind state = StateKind::Vacuum;
  GaussianProbeInit init{};          ///< unused for StateKind::Best
  std::optional<double> energy;      ///< E for best-state computations
};

struct GridSpec {
  double t_end = 0.0;
  int n_steps = 0;  ///< 0 selects default_n_steps
  Refinement refinement = Refinement::Richardson;
};

struct SequentialSpec {
  double total_window = 0.0;
  double start = 0.0;
  std::optional<double> tau;  ///< empty means optimize
  std::optional<TauBounds> bounds;
};

struct MarkovSpec {
  double gamma = 0.0;
  double n_thermal = 0.0;
};

struct Config {
  ProbeSpec probe;
  std::shared_ptr<const DiscreteBath> bath;
  std::optional<ContinuousSpectrum> spectrum;
  std::optional<ForceModulation> force;
  GridSpec grid;
  std::optional<Window> window;
  std::optional<SequentialSpec> sequential;
  std::optional<MarkovSpec> markov;

  std::string qfi_form = "aligned";
  double f_true = 0.0;
  int nu = 1;
  int replications = 2000;
  std::uint64_t seed = 0;
  bool omega0_prefactor = true;

  std::vector<double> moment_times;
  std::vector<double> moment_thetas;
  double force_amplitude = 0.0;

  double correlation_t_prime = 0.0;
  std::vector<double> correlation_times;

  std::vector<double> sweep_script_e;
  std::vector<double> response_times;
};

/// Parses and validates a JSON scenario. Unknown keys, wrong types and
/// out-of-range values raise ConfigError carrying the source line.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);

/// Builds the markov block from the spectrum when it is absent: golden-rule
/// gamma = 2 pi J(omega0) and n_T = N(omega0).
std::optional<MarkovSpec> effective_markov(const Config& config);

}  // namespace nmqfi::cli
