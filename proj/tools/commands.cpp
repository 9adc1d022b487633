#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace nmqfi::cli {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Format default_format(const std::string& subcommand) {
  if (subcommand == "qfi" || subcommand == "estimate" || subcommand == "sequential") return Format::Json;
  return Format::Csv;
}

namespace {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string render(Format format) const {
    if (format == Format::Csv) {
      std::string out;
      for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
      out += '\n';
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
        out += '\n';
      }
      return out;
    }
    json j;
    j["columns"] = columns;
    j["rows"] = json::array();
    for (const auto& row : rows) {
      json r = json::array();
      for (double v : row) r.push_back(std::isfinite(v) ? json(v) : json(nullptr));
      j["rows"].push_back(r);
    }
    return j.dump(2) + "\n";
  }
};

std::string render_json(const json& j) { return j.dump(2) + "\n"; }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

[[noreturn]] void missing(const char* block, const std::string& subcommand) {
  throw ConfigError(std::string("subcommand '") + subcommand + "' needs a '" + block + "' block", 0);
}

std::shared_ptr<const ResponseFunction> build_response(const Config& c) {
  const int n = c.grid.n_steps > 0 ? c.grid.n_steps : default_n_steps(*c.bath, c.grid.t_end);
  return std::make_shared<const ResponseFunction>(solve_response(c.bath, TimeGrid{0.0, c.grid.t_end, n}, c.grid.refinement));
}

const ForceModulation& require_force(const Config& c, const std::string& sub) {
  if (!c.force) missing("force", sub);
  return *c.force;
}

const Window& require_window(const Config& c, const std::string& sub) {
  if (!c.window) missing("window", sub);
  return *c.window;
}

double require_energy(const Config& c, const std::string& sub) {
  if (!c.probe.energy) throw ConfigError("subcommand '" + sub + "' needs probe.energy", 0);
  return *c.probe.energy;
}

GaussianProbeInit init_for_window(const Config& c, const ResponseFunction& response, const Window& w) {
  if (c.probe.state != StateKind::Best) return c.probe.init;
  const auto d = displacement_d(response, require_force(c, "best state"), c.probe.omega0, w);
  return best_state(*c.probe.energy, d, response, w).to_init();
}

// Output sample times: explicit list, or up to 1025 grid nodes.
std::vector<double> sample_times(const std::vector<double>& explicit_times, const ResponseFunction& r) {
  if (!explicit_times.empty()) return explicit_times;
  const int n = r.grid().n_steps;
  const int stride = std::max(1, n / 1024);
  std::vector<double> out;
  for (int j = 0; j <= n; j += stride) out.push_back(r.grid().at(j));
  if (out.back() != r.grid().t_end) out.push_back(r.grid().t_end);
  return out;
}

json moments_json(const DiscreteBath& bath) {
  const auto m = moments(bath);
  json j;
  j["k_squared"] = m.k_squared;
  j["script_n"] = m.script_n;
  j["omega_p"] = m.omega_p;
  j["chi_q"] = m.chi_q;
  return j;
}

std::string cmd_response(const Config& c, Format f) {
  const auto r = build_response(c);
  Table t{{"tau", "re_g", "im_g", "abs_g", "re_gdot", "im_gdot"}, {}};
  for (double tau : sample_times(c.response_times, *r)) {
    const Complex g = r->g(tau), gd = r->g_dot(tau);
    t.rows.push_back({tau, g.real(), g.imag(), std::abs(g), gd.real(), gd.imag()});
  }
  return t.render(f);
}

std::string cmd_moments(const Config& c, Format f) {
  const auto r = build_response(c);
  const double t0 = c.window ? c.window->t0 : 0.0;
  if (c.moment_times.empty()) missing("moments", "moments");
  Table t{{"t", "theta", "mean", "var_x", "var_p", "det_sigma", "n_b"}, {}};
  for (double time : c.moment_times) {
    const Window w{t0, time};
    const auto init = init_for_window(c, *r, w);
    DisplacementCoefficient d{{}, 0.0, w};
    if (c.force) d = displacement_d(*r, *c.force, c.probe.omega0, w);
    for (double theta : c.moment_thetas) {
      const auto snap = covariance_snapshot(init, *r, theta, c.probe.omega0, w);
      const double mean = quadrature_mean(init, *r, d, theta, c.force_amplitude, c.probe.omega0, w);
      t.rows.push_back({time, theta, mean, snap.var_x_theta, snap.var_p_theta, snap.det_sigma, snap.noise_term});
    }
  }
  return t.render(f);
}

std::string cmd_qfi(const Config& c, Format f) {
  const auto& force = require_force(c, "qfi");
  const auto& w = require_window(c, "qfi");
  const double w0 = c.probe.omega0;
  json j;
  j["form"] = c.qfi_form;
  j["window"] = {{"t0", w.t0}, {"t", w.t}};
  j["bath_moments"] = moments_json(*c.bath);
  if (c.qfi_form == "markov") {
    const auto m = effective_markov(c);
    if (!m) missing("markov", "qfi");
    const auto init = c.probe.state == StateKind::Best ? GaussianProbeInit::vacuum() : c.probe.init;
    const double value = markov_qfi(init, m->gamma, m->n_thermal, force, w0, w);
    j["value"] = value;
    j["gamma"] = m->gamma;
    j["n_thermal"] = m->n_thermal;
    j["abs_d"] = nullptr;
    j["variance"] = nullptr;
    j["det_sigma"] = nullptr;
  } else {
    const auto r = build_response(c);
    const auto init = init_for_window(c, *r, w);
    QfiResult q;
    if (c.qfi_form == "general") q = qfi_general(init, *r, force, w0, w);
    else if (c.qfi_form == "aligned") q = qfi_aligned(init, *r, force, w0, w);
    else q = qfi_best_state(require_energy(c, "qfi"), *r, force, w0, w);
    const auto d = displacement_d(*r, force, w0, w);
    const auto snap = covariance_snapshot(init, *r, optimal_quadrature_angle(d, w0, w), w0, w);
    j["value"] = q.value;
    j["abs_d"] = std::sqrt(q.numerator_abs_d_sq);
    j["variance"] = q.denominator;
    j["det_sigma"] = snap.det_sigma;
  }
  if (f == Format::Csv) {
    Table t{{"value"}, {{j["value"].get<double>()}}};
    return t.render(f);
  }
  return render_json(j);
}

std::string cmd_estimate(const Config& c, Format f) {
  const auto& force = require_force(c, "estimate");
  const auto& w = require_window(c, "estimate");
  const auto r = build_response(c);
  const auto init = init_for_window(c, *r, w);
  const auto d = displacement_d(*r, force, c.probe.omega0, w);
  if (!is_aligned(init, d, *r, w))
    throw AlignmentError("estimate: the initial state is not aligned with the displacement");
  const auto e = simulate_estimation(init, *r, force, c.probe.omega0, w, c.f_true, c.nu, c.seed, c.replications);
  json j;
  j["estimate"] = e.estimate;
  j["empirical_mse"] = e.empirical_mse;
  j["fisher"] = e.fisher;
  j["cramer_rao_ratio"] = e.cramer_rao_ratio;
  j["cramer_rao_bound"] = 1.0 / (c.nu * e.fisher);
  j["nu"] = c.nu;
  j["replications"] = e.replications;
  j["seed"] = c.seed;
  j["f_true"] = c.f_true;
  if (f == Format::Csv) {
    Table t{{"estimate", "empirical_mse", "fisher", "cramer_rao_ratio"},
            {{e.estimate, e.empirical_mse, e.fisher, e.cramer_rao_ratio}}};
    return t.render(f);
  }
  return render_json(j);
}

struct SequentialPoint {
  double tau_numeric = 0.0;
  double tau_asymptotic = NAN;
  double total = 0.0;
  double total_asymptotic = NAN;
  double markov_bound = NAN;
  double markov_tau = NAN;
  bool at_lower = false, at_upper = false, asymptotic_valid = false, noiseless = false;
};

SequentialPoint sequential_point(const Config& c, const ResponseFunction& r, double energy, bool fixed_tau_allowed) {
  const auto& seq = *c.sequential;
  const auto& force = require_force(c, "sequential");
  const double w0 = c.probe.omega0;
  SequentialPoint p;
  SeqResult result;
  if (fixed_tau_allowed && seq.tau) {
    result = seq_qfi(SequentialScheme::make(seq.total_window, *seq.tau, seq.start), energy, r, force, w0);
    p.tau_numeric = *seq.tau;
  } else {
    const auto bounds = seq.bounds ? *seq.bounds : default_tau_bounds(r, seq.total_window);
    const auto opt = optimize_tau(seq.total_window, energy, r, force, w0, bounds, seq.start);
    result = opt.seq;
    p.tau_numeric = opt.tau_opt;
    p.at_lower = opt.at_lower_bound;
    p.at_upper = opt.at_upper_bound;
  }
  p.total = result.total_qfi;
  const auto m = moments(r.bath());
  p.noiseless = !(m.script_n > 0.0);
  if (!p.noiseless && result.xi > 0.0) {
    p.tau_asymptotic = tau_opt_asymptotic(energy, m, result.xi, result.c_coeff);
    p.total_asymptotic = seq_qfi_asymptotic(energy, m, result.xi, result.c_coeff, w0, c.omega0_prefactor);
    p.asymptotic_valid = p.tau_asymptotic * validity_rate(m, w0) <= 0.1;
  }
  if (const auto mk = effective_markov(c)) {
    const auto ms = markov_seq(energy, mk->gamma, mk->n_thermal, result.xi, w0, c.omega0_prefactor);
    p.markov_bound = ms.total_qfi_bound;
    p.markov_tau = ms.tau_opt;
  }
  return p;
}

std::string cmd_sequential(const Config& c, Format f) {
  if (!c.sequential) missing("sequential", "sequential");
  const double energy = require_energy(c, "sequential");
  const auto r = build_response(c);
  if (f == Format::Csv) {
    const auto& seq = *c.sequential;
    const auto bounds = seq.bounds ? *seq.bounds : default_tau_bounds(*r, seq.total_window);
    Table t{{"tau", "nu", "total_qfi"}, {}};
    for (int i = 0; i < 64; ++i) {
      const double tau = bounds.lo * std::pow(bounds.hi / bounds.lo, i / 63.0);
      const auto scheme = SequentialScheme::make(seq.total_window, tau, seq.start);
      t.rows.push_back({tau, static_cast<double>(scheme.repetitions),
                        seq_qfi(scheme, energy, *r, require_force(c, "sequential"), c.probe.omega0).total_qfi});
    }
    return t.render(f);
  }
  const auto p = sequential_point(c, *r, energy, true);
  json j;
  j["tau_opt_numeric"] = p.tau_numeric;
  j["tau_opt_asymptotic"] = number_or_null(p.tau_asymptotic);
  j["total_qfi"] = p.total;
  j["total_qfi_asymptotic"] = number_or_null(p.total_asymptotic);
  j["markov_bound"] = number_or_null(p.markov_bound);
  j["markov_tau_opt"] = number_or_null(p.markov_tau);
  j["script_e"] = script_e(energy);
  j["regime_flags"] = {{"at_lower_bound", p.at_lower},
                       {"at_upper_bound", p.at_upper},
                       {"asymptotic_valid", p.asymptotic_valid},
                       {"noiseless", p.noiseless},
                       {"omega0_prefactor", c.omega0_prefactor}};
  return render_json(j);
}

std::string cmd_sweep(const Config& c, Format f) {
  if (!c.sequential) missing("sequential", "sweep");
  if (c.sweep_script_e.empty()) missing("sweep", "sweep");
  const auto r = build_response(c);
  Table t{{"script_e", "energy", "tau_opt_numeric", "tau_opt_asymptotic", "total_qfi", "total_qfi_asymptotic",
           "markov_bound", "at_bound"},
          {}};
  for (double e : c.sweep_script_e) {
    const double energy = 0.5 * (e + 0.25 / e);
    const auto p = sequential_point(c, *r, energy, false);
    t.rows.push_back({e, energy, p.tau_numeric, p.tau_asymptotic, p.total, p.total_asymptotic, p.markov_bound,
                      (p.at_lower || p.at_upper) ? 1.0 : 0.0});
  }
  return t.render(f);
}

std::string cmd_correlation(const Config& c, Format f) {
  const auto r = build_response(c);
  const double t0 = c.window ? c.window->t0 : 0.0;
  const auto init = c.probe.state == StateKind::Best ? GaussianProbeInit{} : c.probe.init;
  const double noise = c.probe.state == StateKind::Best ? *c.probe.energy : 0.5 * init.covariance.trace();
  const auto times = c.correlation_times.empty() ? sample_times({}, *r) : c.correlation_times;
  Table t{{"t_minus_tprime", "re_total", "im_total", "re_born", "im_born", "abs_interaction"}, {}};
  for (double time : times) {
    const auto res = bath_correlation(*r, noise, time, c.correlation_t_prime, c.probe.omega0, t0);
    t.rows.push_back({time - c.correlation_t_prime, res.total.real(), res.total.imag(), res.born.real(),
                      res.born.imag(), std::abs(res.interaction)});
  }
  if (f == Format::Json) {
    json j = json::parse(t.render(Format::Json));
    if (c.bath->script_n() > 0.0) {
      const auto chk = correlation_timescale_check(*r, noise);
      j["timescale"] = {{"decay_scale", chk.decay_scale}, {"no_decay", chk.no_decay},
                        {"born_decay_scale", chk.born_decay_scale}, {"born_no_decay", chk.born_no_decay},
                        {"predicted", chk.predicted}, {"ratio", chk.ratio}};
    }
    return render_json(j);
  }
  return t.render(f);
}

std::string cmd_limits(const Config& c, Format f) {
  const auto r = build_response(c);
  const double k = std::sqrt(c.bath->k_squared());
  const auto m = effective_markov(c);
  Table t{{"tau", "exact", "narrow_band", "markov"}, {}};
  for (double tau : sample_times(c.response_times, *r)) {
    t.rows.push_back({tau, r->g(tau).real(), std::cos(k * tau),
                      m ? std::real(markov_closed_form(m->gamma, tau)) : NAN});
  }
  return t.render(f);
}

}  // namespace

std::string execute(const std::string& subcommand, const Config& config, Format format) {
  static const std::map<std::string, std::function<std::string(const Config&, Format)>> table{
      {"response", cmd_response}, {"moments", cmd_moments},       {"qfi", cmd_qfi},
      {"estimate", cmd_estimate}, {"sequential", cmd_sequential}, {"sweep", cmd_sweep},
      {"correlation", cmd_correlation}, {"limits", cmd_limits}};
  const auto it = table.find(subcommand);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + subcommand + "'", 0);
  return it->second(config, format);
}

int run(const RunRequest& request, std::ostream& out, std::ostream& err) {
  const std::string context = request.config_path + " [" + request.subcommand + "]";
  try {
    Config config = load_config(request.config_path);
    if (request.seed) config.seed = *request.seed;
    const std::string text = execute(request.subcommand, config, request.format.value_or(default_format(request.subcommand)));
    if (request.out_path.empty()) {
      out << text;
    } else {
      std::ofstream file(request.out_path, std::ios::binary);
      if (!file) throw ConfigError("cannot write '" + request.out_path + "'", 0);
      file << text;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << context << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "error: " << context << ": invalid scenario: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << context << ": numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace nmqfi::cli
