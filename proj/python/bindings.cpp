#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "commands.hpp"
#include "config.hpp"
#include "nmqfi/nmqfi.hpp"

namespace py = pybind11;
using namespace nmqfi;

namespace {

py::array_t<Complex> to_array(std::span<const Complex> v) {
  py::array_t<Complex> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_nmqfi, m) {
  m.doc() = "Force sensing with a harmonic probe coupled to a Gaussian bath";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<CoverageError>(m, "CoverageError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<AlignmentError>(m, "AlignmentError", base.ptr());
  py::register_exception<EstimationError>(m, "EstimationError", base.ptr());
  py::register_exception<cli::ConfigError>(m, "ConfigError", base.ptr());

  // bath
  py::class_<BathMode>(m, "BathMode")
      .def(py::init([](double k2, double w, double n) { return BathMode{k2, w, n}; }), py::arg("coupling_sq"),
           py::arg("frequency"), py::arg("occupation") = 0.0)
      .def_readwrite("coupling_sq", &BathMode::coupling_sq)
      .def_readwrite("frequency", &BathMode::frequency)
      .def_readwrite("occupation", &BathMode::occupation);

  py::class_<DiscreteBath, std::shared_ptr<DiscreteBath>>(m, "DiscreteBath")
      .def(py::init([](std::vector<BathMode> modes, double omega0) { return DiscreteBath(std::move(modes), omega0); }),
           py::arg("modes"), py::arg("probe_frequency"))
      .def_static("noiseless", &DiscreteBath::noiseless, py::arg("probe_frequency"))
      .def_property_readonly("modes", [](const DiscreteBath& b) {
        return std::vector<BathMode>(b.modes().begin(), b.modes().end());
      })
      .def_property_readonly("probe_frequency", &DiscreteBath::probe_frequency)
      .def("__len__", &DiscreteBath::size)
      .def("k_squared", &DiscreteBath::k_squared)
      .def("script_n", &DiscreteBath::script_n);

  py::enum_<SpectrumFamily>(m, "SpectrumFamily")
      .value("FLAT", SpectrumFamily::FlatBand)
      .value("OHMIC", SpectrumFamily::Ohmic);
  py::enum_<CutoffShape>(m, "CutoffShape").value("HARD", CutoffShape::Hard).value("EXPONENTIAL", CutoffShape::Exponential);

  py::class_<OccupationModel>(m, "OccupationModel")
      .def_static("zero_temperature", &OccupationModel::zero_temperature)
      .def_static("thermal", &OccupationModel::thermal, py::arg("temperature"))
      .def_static("constant", &OccupationModel::constant, py::arg("n"))
      .def("__call__", &OccupationModel::operator(), py::arg("omega"));

  py::class_<ContinuousSpectrum>(m, "ContinuousSpectrum")
      .def(py::init([](SpectrumFamily family, double scale, double cutoff, double exponent, CutoffShape shape,
                       OccupationModel occ) {
             ContinuousSpectrum s{family, exponent, scale, cutoff, shape, occ};
             s.validate();
             return s;
           }),
           py::arg("family") = SpectrumFamily::FlatBand, py::arg("scale") = 0.0, py::arg("cutoff") = 1.0,
           py::arg("exponent") = 1.0, py::arg("cutoff_shape") = CutoffShape::Hard,
           py::arg("occupation") = OccupationModel{})
      .def("density", &ContinuousSpectrum::density, py::arg("omega"))
      .def("k_squared_exact", &ContinuousSpectrum::k_squared_exact);

  py::class_<BathMoments>(m, "BathMoments")
      .def_readonly("k_squared", &BathMoments::k_squared)
      .def_readonly("script_n", &BathMoments::script_n)
      .def_readonly("omega_p", &BathMoments::omega_p)
      .def_readonly("chi_q", &BathMoments::chi_q)
      .def("omega", &BathMoments::omega, py::arg("p"))
      .def("max_rate", &BathMoments::max_rate);

  m.def("discretize", &discretize, py::arg("spectrum"), py::arg("n_modes"), py::arg("probe_frequency"));
  m.def("memory_kernel", &memory_kernel, py::arg("bath"), py::arg("tau"));
  m.def("bare_correlation_c0", &bare_correlation_c0, py::arg("bath"), py::arg("tau"));
  m.def("moments", &moments, py::arg("bath"), py::arg("p_max") = 6);

  // response
  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init([](double a, double b, int n) {
             TimeGrid g{a, b, n};
             g.validate();
             return g;
           }),
           py::arg("t_start"), py::arg("t_end"), py::arg("n_steps"))
      .def_readonly("t_start", &TimeGrid::t_start)
      .def_readonly("t_end", &TimeGrid::t_end)
      .def_readonly("n_steps", &TimeGrid::n_steps)
      .def("step", &TimeGrid::step);
  py::enum_<Refinement>(m, "Refinement").value("NONE", Refinement::None).value("RICHARDSON", Refinement::Richardson);

  py::class_<ResponseFunction>(m, "ResponseFunction")
      .def_property_readonly("g_samples", [](const ResponseFunction& r) { return to_array(r.g_samples()); })
      .def_property_readonly("g_dot_samples", [](const ResponseFunction& r) { return to_array(r.g_dot_samples()); })
      .def_property_readonly("times", [](const ResponseFunction& r) {
        py::array_t<double> t(r.grid().n_steps + 1);
        for (int j = 0; j <= r.grid().n_steps; ++j) t.mutable_data()[j] = r.grid().at(j);
        return t;
      })
      .def_property_readonly("coverage", &ResponseFunction::coverage)
      .def_property_readonly("bath", &ResponseFunction::bath_handle)
      .def("g", &ResponseFunction::g, py::arg("tau"))
      .def("g_dot", &ResponseFunction::g_dot, py::arg("tau"));

  m.def(
      "solve_response",
      [](const DiscreteBath& b, double t_end, int n_steps, Refinement ref) {
        if (n_steps <= 0) n_steps = default_n_steps(b, t_end);
        py::gil_scoped_release release;
        return solve_response(b, {0.0, t_end, n_steps}, ref);
      },
      py::arg("bath"), py::arg("t_end"), py::arg("n_steps") = 0, py::arg("refinement") = Refinement::Richardson,
      "Solve for G on [0, t_end]; n_steps = 0 picks a default from the kernel bandwidth.");
  m.def("default_n_steps", &default_n_steps, py::arg("bath"), py::arg("t_end"));
  m.def("dyson_series", &dyson_series, py::arg("bath"), py::arg("tau"), py::arg("order_k"));
  m.def("short_time_g", &short_time_g, py::arg("bath"), py::arg("tau"));
  m.def("markov_closed_form", &markov_closed_form, py::arg("gamma"), py::arg("tau"));

  // probe
  py::class_<ForceModulation>(m, "ForceModulation")
      .def_static("constant", &ForceModulation::constant, py::arg("value"), py::arg("t_i"), py::arg("t_f"))
      .def_static("sinusoid", &ForceModulation::sinusoid, py::arg("amplitude"), py::arg("frequency"),
                  py::arg("phase"), py::arg("t_i"), py::arg("t_f"))
      .def_static("gaussian_pulse", &ForceModulation::gaussian_pulse, py::arg("center"), py::arg("width"),
                  py::arg("amplitude"), py::arg("t_i"), py::arg("t_f"))
      .def_static("table", &ForceModulation::table, py::arg("samples"))
      .def("value", &ForceModulation::value, py::arg("t"))
      .def("derivative", &ForceModulation::derivative, py::arg("t"));

  py::class_<Covariance2>(m, "Covariance2")
      .def(py::init([](double xx, double xp, double pp) { return Covariance2{xx, xp, pp}; }), py::arg("xx") = 0.5,
           py::arg("xp") = 0.0, py::arg("pp") = 0.5)
      .def_readwrite("xx", &Covariance2::xx)
      .def_readwrite("xp", &Covariance2::xp)
      .def_readwrite("pp", &Covariance2::pp)
      .def("det", &Covariance2::det)
      .def("variance", &Covariance2::variance, py::arg("angle"))
      .def("max_variance_angle", &Covariance2::max_variance_angle);

  py::class_<GaussianProbeInit>(m, "GaussianProbeInit")
      .def(py::init([](Complex mean, Covariance2 cov) {
             GaussianProbeInit g{mean, cov};
             g.validate();
             return g;
           }),
           py::arg("mean_amplitude") = Complex{}, py::arg("covariance") = Covariance2{})
      .def_static("vacuum", &GaussianProbeInit::vacuum)
      .def_static("coherent", &GaussianProbeInit::coherent, py::arg("alpha"))
      .def_static("thermal", &GaussianProbeInit::thermal, py::arg("n"))
      .def_static("squeezed", &GaussianProbeInit::squeezed, py::arg("r"), py::arg("max_angle"),
                  py::arg("mean") = Complex{})
      .def_readwrite("mean_amplitude", &GaussianProbeInit::mean_amplitude)
      .def_readwrite("covariance", &GaussianProbeInit::covariance)
      .def("variance", &GaussianProbeInit::variance, py::arg("angle"))
      .def("energy", &GaussianProbeInit::energy)
      .def("is_pure", &GaussianProbeInit::is_pure, py::arg("tol") = 1e-9);

  py::class_<Window>(m, "Window")
      .def(py::init([](double t0, double t) { return Window{t0, t}; }), py::arg("t0"), py::arg("t"))
      .def_readwrite("t0", &Window::t0)
      .def_readwrite("t", &Window::t)
      .def("length", &Window::length);

  py::class_<DisplacementCoefficient>(m, "DisplacementCoefficient")
      .def_readonly("value", &DisplacementCoefficient::value)
      .def_readonly("phase", &DisplacementCoefficient::phase)
      .def("magnitude", &DisplacementCoefficient::magnitude);

  py::class_<CovarianceSnapshot>(m, "CovarianceSnapshot")
      .def_readonly("var_x_theta", &CovarianceSnapshot::var_x_theta)
      .def_readonly("var_p_theta", &CovarianceSnapshot::var_p_theta)
      .def_readonly("cross", &CovarianceSnapshot::cross)
      .def_readonly("det_sigma", &CovarianceSnapshot::det_sigma)
      .def_readonly("noise_term", &CovarianceSnapshot::noise_term)
      .def_readonly("g_abs_sq", &CovarianceSnapshot::g_abs_sq);

  m.def("displacement_d", &displacement_d, py::arg("response"), py::arg("force"), py::arg("omega0"), py::arg("window"));
  m.def("bath_noise", &bath_noise, py::arg("response"), py::arg("window"));
  m.def("quadrature_variance",
        py::overload_cast<const GaussianProbeInit&, const ResponseFunction&, double, double, const Window&>(
            &quadrature_variance),
        py::arg("init"), py::arg("response"), py::arg("theta"), py::arg("omega0"), py::arg("window"));
  m.def("quadrature_mean", &quadrature_mean, py::arg("init"), py::arg("response"), py::arg("d"), py::arg("theta"),
        py::arg("force_amplitude"), py::arg("omega0"), py::arg("window"));
  m.def("covariance_snapshot", &covariance_snapshot, py::arg("init"), py::arg("response"), py::arg("theta"),
        py::arg("omega0"), py::arg("window"));

  // metrology
  m.def("script_e", &script_e, py::arg("energy"));
  py::class_<BestStateSpec>(m, "BestStateSpec")
      .def_readonly("energy", &BestStateSpec::energy)
      .def_readonly("script_e", &BestStateSpec::script_e)
      .def_readonly("squeeze_r", &BestStateSpec::squeeze_r)
      .def_readonly("squeeze_phase", &BestStateSpec::squeeze_phase)
      .def_readonly("max_variance_angle", &BestStateSpec::max_variance_angle)
      .def("to_init", &BestStateSpec::to_init);
  m.def("best_state", &best_state, py::arg("energy"), py::arg("d"), py::arg("response"), py::arg("window"));

  py::class_<QfiResult>(m, "QfiResult")
      .def_readonly("value", &QfiResult::value)
      .def_readonly("numerator_abs_d_sq", &QfiResult::numerator_abs_d_sq)
      .def_readonly("denominator", &QfiResult::denominator)
      .def_property_readonly("form", [](const QfiResult& q) { return std::string(to_string(q.form)); });
  m.def("qfi_general", &qfi_general, py::arg("init"), py::arg("response"), py::arg("force"), py::arg("omega0"),
        py::arg("window"));
  m.def("qfi_aligned", &qfi_aligned, py::arg("init"), py::arg("response"), py::arg("force"), py::arg("omega0"),
        py::arg("window"));
  m.def("qfi_best_state", &qfi_best_state, py::arg("energy"), py::arg("response"), py::arg("force"),
        py::arg("omega0"), py::arg("window"));
  m.def("fisher_quadrature", &fisher_quadrature, py::arg("theta"), py::arg("init"), py::arg("response"),
        py::arg("force"), py::arg("omega0"), py::arg("window"));
  m.def("short_time_qfi", &short_time_qfi, py::arg("init"), py::arg("force"), py::arg("omega0"), py::arg("window"));
  m.def("markov_qfi", &markov_qfi, py::arg("init"), py::arg("gamma"), py::arg("n_thermal"), py::arg("force"),
        py::arg("omega0"), py::arg("window"));

  py::class_<EstimationResult>(m, "EstimationResult")
      .def_readonly("estimate", &EstimationResult::estimate)
      .def_readonly("empirical_mse", &EstimationResult::empirical_mse)
      .def_readonly("fisher", &EstimationResult::fisher)
      .def_readonly("cramer_rao_ratio", &EstimationResult::cramer_rao_ratio)
      .def_readonly("replications", &EstimationResult::replications);
  m.def("simulate_estimation", &simulate_estimation, py::arg("init"), py::arg("response"), py::arg("force"),
        py::arg("omega0"), py::arg("window"), py::arg("f_true"), py::arg("nu"), py::arg("seed"),
        py::arg("replications") = 2000, py::call_guard<py::gil_scoped_release>());

  // sequential
  py::class_<SeqResult>(m, "SeqResult")
      .def_readonly("total_qfi", &SeqResult::total_qfi)
      .def_readonly("per_step_qfi", &SeqResult::per_step_qfi)
      .def_readonly("tau_used", &SeqResult::tau_used)
      .def_readonly("denominator", &SeqResult::denominator)
      .def_readonly("xi", &SeqResult::xi)
      .def_readonly("c_coeff", &SeqResult::c_coeff);
  py::class_<TauOptimum>(m, "TauOptimum")
      .def_readonly("tau_opt", &TauOptimum::tau_opt)
      .def_readonly("seq", &TauOptimum::seq)
      .def_readonly("at_lower_bound", &TauOptimum::at_lower_bound)
      .def_readonly("at_upper_bound", &TauOptimum::at_upper_bound);
  py::class_<MarkovSeq>(m, "MarkovSeq")
      .def_readonly("tau_opt", &MarkovSeq::tau_opt)
      .def_readonly("total_qfi_bound", &MarkovSeq::total_qfi_bound)
      .def_readonly("noiseless", &MarkovSeq::noiseless);

  m.def(
      "seq_qfi",
      [](double total_window, double tau, double energy, const ResponseFunction& r, const ForceModulation& f,
         double omega0, double start) {
        return seq_qfi(SequentialScheme::make(total_window, tau, start), energy, r, f, omega0);
      },
      py::arg("total_window"), py::arg("tau"), py::arg("energy"), py::arg("response"), py::arg("force"),
      py::arg("omega0"), py::arg("start") = 0.0);
  m.def(
      "optimize_tau",
      [](double total_window, double energy, const ResponseFunction& r, const ForceModulation& f, double omega0,
         std::pair<double, double> bounds, double start) {
        py::gil_scoped_release release;
        return optimize_tau(total_window, energy, r, f, omega0, {bounds.first, bounds.second}, start);
      },
      py::arg("total_window"), py::arg("energy"), py::arg("response"), py::arg("force"), py::arg("omega0"),
      py::arg("tau_bounds"), py::arg("start") = 0.0);
  m.def(
      "xi_and_c",
      [](const ForceModulation& f, double omega0, double total_window, double start) {
        const auto x = xi_and_c(f, omega0, total_window, start);
        return std::make_pair(x.xi, x.c_coeff);
      },
      py::arg("force"), py::arg("omega0"), py::arg("total_window"), py::arg("start") = 0.0);
  m.def("tau_opt_asymptotic", &tau_opt_asymptotic, py::arg("energy"), py::arg("moments"), py::arg("xi"),
        py::arg("c_coeff"));
  m.def("seq_qfi_asymptotic", &seq_qfi_asymptotic, py::arg("energy"), py::arg("moments"), py::arg("xi"),
        py::arg("c_coeff"), py::arg("omega0"), py::arg("omega0_prefactor") = true);
  m.def("markov_seq", &markov_seq, py::arg("energy"), py::arg("gamma"), py::arg("n_thermal"), py::arg("xi"),
        py::arg("omega0") = 1.0, py::arg("omega0_prefactor") = true);

  // correlation
  py::class_<CorrelationResult>(m, "CorrelationResult")
      .def_readonly("total", &CorrelationResult::total)
      .def_readonly("born", &CorrelationResult::born)
      .def_readonly("interaction", &CorrelationResult::interaction);
  py::class_<TimescaleCheck>(m, "TimescaleCheck")
      .def_readonly("decay_scale", &TimescaleCheck::decay_scale)
      .def_readonly("no_decay", &TimescaleCheck::no_decay)
      .def_readonly("born_decay_scale", &TimescaleCheck::born_decay_scale)
      .def_readonly("born_no_decay", &TimescaleCheck::born_no_decay)
      .def_readonly("predicted", &TimescaleCheck::predicted)
      .def_readonly("ratio", &TimescaleCheck::ratio);
  m.def("bath_correlation", &bath_correlation, py::arg("response"), py::arg("probe_noise"), py::arg("t"),
        py::arg("t_prime"), py::arg("omega0"), py::arg("t0") = 0.0);
  m.def("correlation_timescale_check", &correlation_timescale_check, py::arg("response"),
        py::arg("probe_noise") = 0.5, py::arg("samples") = 512);

  // scenario files
  m.def(
      "run_scenario",
      [](const std::string& subcommand, const std::string& config_text, const std::string& format) {
        const auto config = cli::parse_config(config_text);
        const auto f = format.empty() ? cli::default_format(subcommand)
                                      : (format == "csv" ? cli::Format::Csv : cli::Format::Json);
        return cli::execute(subcommand, config, f);
      },
      py::arg("subcommand"), py::arg("config_text"), py::arg("format") = "",
      "Run one CLI subcommand on a JSON scenario given as text; returns the rendered output.");
}
