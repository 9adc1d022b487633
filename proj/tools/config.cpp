#include "config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace nmqfi::cli {

using nlohmann::json;

namespace {

// Maps JSON-pointer paths to the line where the key or array element starts.
// nlohmann::json keeps no source positions, so the text is scanned once.
class LineMap {
 public:
  explicit LineMap(const std::string& text) { scan(text); }

  int line_of(std::string path) const {
    while (true) {
      if (auto it = lines_.find(path); it != lines_.end()) return it->second;
      if (path.empty()) return 0;
      path.erase(path.rfind('/'));
    }
  }

 private:
  struct Frame {
    bool object;
    std::string key;
    int index = 0;
    bool expect_key = true;
    bool element_seen = false;
  };

  std::string path() const {
    std::string p;
    for (const auto& f : stack_) p += "/" + (f.object ? f.key : std::to_string(f.index));
    return p;
  }

  void mark_element(int line) {
    if (stack_.empty()) lines_.emplace("", line);  // the document root
    if (!stack_.empty() && !stack_.back().object && !stack_.back().element_seen) {
      stack_.back().element_seen = true;
      lines_.emplace(path(), line);
    }
  }

  void scan(const std::string& text) {
    int line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
      } else if (c == '"') {
        const int start_line = line;
        std::string s;
        for (++i; i < text.size() && text[i] != '"'; ++i) {
          if (text[i] == '\\' && i + 1 < text.size()) ++i;
          if (text[i] == '\n') ++line;
          s += text[i];
        }
        if (!stack_.empty() && stack_.back().object && stack_.back().expect_key) {
          stack_.back().key = s;
          stack_.back().expect_key = false;
          lines_.emplace(path(), start_line);
        } else {
          mark_element(start_line);
        }
      } else if (c == '{' || c == '[') {
        mark_element(line);
        stack_.push_back({c == '{', {}});
      } else if (c == '}' || c == ']') {
        if (!stack_.empty()) stack_.pop_back();
      } else if (c == ',') {
        if (!stack_.empty()) {
          auto& f = stack_.back();
          if (f.object) {
            f.expect_key = true;
          } else {
            ++f.index;
            f.element_seen = false;
          }
        }
      } else if (!std::isspace(static_cast<unsigned char>(c)) && c != ':') {
        mark_element(line);
      }
    }
  }

  std::vector<Frame> stack_;
  std::map<std::string, int> lines_;
};

// A json value together with its path, for error messages.
class Node {
 public:
  Node(const json& value, std::string path, const LineMap& lines) : v_(value), path_(std::move(path)), lines_(lines) {}

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(message + " (at " + (path_.empty() ? "/" : path_) + ")", lines_.line_of(path_));
  }

  const json& raw() const { return v_; }
  const std::string& path() const { return path_; }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!v_.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : v_.items()) {
      if (!ok.count(key)) child_unchecked(key).fail("unknown key '" + key + "'");
    }
  }

  bool has(const char* key) const { return v_.contains(key); }

  Node operator[](const char* key) const {
    if (!v_.contains(key)) fail(std::string("missing required key '") + key + "'");
    return child_unchecked(key);
  }

  std::optional<Node> optional(const char* key) const {
    if (!v_.contains(key)) return std::nullopt;
    return child_unchecked(key);
  }

  Node at(std::size_t i) const { return {v_.at(i), path_ + "/" + std::to_string(i), lines_}; }

  double number() const {
    if (!v_.is_number()) fail("expected a number");
    const double d = v_.get<double>();
    if (!std::isfinite(d)) fail("expected a finite number");
    return d;
  }
  double number_at_least(double lo) const {
    const double d = number();
    if (!(d >= lo)) fail("value must be >= " + format(lo));
    return d;
  }
  double positive() const {
    const double d = number();
    if (!(d > 0.0)) fail("value must be > 0");
    return d;
  }
  long integer(long lo) const {
    if (!v_.is_number_integer()) fail("expected an integer");
    const long n = v_.get<long>();
    if (n < lo) fail("value must be >= " + std::to_string(lo));
    return n;
  }
  std::string string() const {
    if (!v_.is_string()) fail("expected a string");
    return v_.get<std::string>();
  }
  bool boolean() const {
    if (v_.is_boolean()) return v_.get<bool>();
    if (v_.is_string()) {
      const auto s = v_.get<std::string>();
      if (s == "on") return true;
      if (s == "off") return false;
    }
    fail("expected true/false or \"on\"/\"off\"");
  }
  std::size_t array_size() const {
    if (!v_.is_array()) fail("expected an array");
    return v_.size();
  }

  double number_or(const char* key, double fallback) const {
    auto n = optional(key);
    return n ? n->number() : fallback;
  }

  // [a, b] pair of numbers
  std::pair<double, double> pair() const {
    if (array_size() != 2) fail("expected a two-element array");
    return {at(0).number(), at(1).number()};
  }

  // Explicit list, or {"from", "to", "count", "spacing": "linear"|"log"}.
  std::vector<double> number_list() const {
    std::vector<double> out;
    if (v_.is_array()) {
      for (std::size_t i = 0; i < v_.size(); ++i) out.push_back(at(i).number());
      return out;
    }
    expect_object({"from", "to", "count", "spacing"});
    const double a = (*this)["from"].number(), b = (*this)["to"].number();
    const long n = (*this)["count"].integer(1);
    std::string spacing = "linear";
    if (auto s = optional("spacing")) spacing = s->string();
    if (spacing != "linear" && spacing != "log") (*this)["spacing"].fail("spacing must be 'linear' or 'log'");
    if (spacing == "log" && !(a > 0.0 && b > 0.0)) fail("log spacing needs positive bounds");
    for (long i = 0; i < n; ++i) {
      const double u = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
      out.push_back(spacing == "log" ? a * std::pow(b / a, u) : a + (b - a) * u);
    }
    return out;
  }

 private:
  Node child_unchecked(const std::string& key) const { return {v_.at(key), path_ + "/" + key, lines_}; }
  static std::string format(double d) {
    std::ostringstream os;
    os << d;
    return os.str();
  }

  const json& v_;
  std::string path_;
  const LineMap& lines_;
};

Complex parse_alpha(const Node& state) {
  if (auto a = state.optional("alpha")) {
    const auto [re, im] = a->pair();
    return {re, im};
  }
  return {};
}

ProbeSpec parse_probe(const Node& n) {
  n.expect_object({"omega0", "energy", "state"});
  ProbeSpec p;
  p.omega0 = n["omega0"].positive();
  if (auto e = n.optional("energy")) p.energy = e->number_at_least(0.5);
  if (auto s = n.optional("state")) {
    const Node& st = *s;
    st.expect_object({"kind", "alpha", "n", "r", "angle", "xx", "xp", "pp", "energy"});
    const std::string kind = st["kind"].string();
    if (kind == "vacuum") {
      p.state = StateKind::Vacuum;
      p.init = GaussianProbeInit::vacuum();
    } else if (kind == "coherent") {
      p.state = StateKind::Coherent;
      p.init = GaussianProbeInit::coherent(parse_alpha(st));
    } else if (kind == "thermal") {
      p.state = StateKind::Thermal;
      p.init = GaussianProbeInit::thermal(st["n"].number_at_least(0.0));
      p.init.mean_amplitude = parse_alpha(st);
    } else if (kind == "squeezed") {
      p.state = StateKind::Squeezed;
      p.init = GaussianProbeInit::squeezed(st["r"].number_at_least(0.0), st.number_or("angle", 0.0), parse_alpha(st));
    } else if (kind == "covariance") {
      p.state = StateKind::Covariance;
      p.init = {parse_alpha(st), {st["xx"].number(), st["xp"].number(), st["pp"].number()}};
      try {
        p.init.validate();
      } catch (const DomainError& e) {
        st.fail(e.what());
      }
    } else if (kind == "best") {
      p.state = StateKind::Best;
      if (auto e = st.optional("energy")) p.energy = e->number_at_least(0.5);
      if (!p.energy) st.fail("state 'best' needs an energy");
    } else {
      st["kind"].fail("unknown state kind '" + kind + "'");
    }
  }
  return p;
}

OccupationModel parse_occupation(const Node& n) {
  n.expect_object({"kind", "value"});
  const std::string kind = n["kind"].string();
  if (kind == "zero") return OccupationModel::zero_temperature();
  if (kind == "thermal") return OccupationModel::thermal(n["value"].number_at_least(0.0));
  if (kind == "constant") return OccupationModel::constant(n["value"].number_at_least(0.0));
  n["kind"].fail("occupation kind must be 'zero', 'thermal' or 'constant'");
}

void parse_bath(const Node& n, double omega0, Config& c) {
  n.expect_object({"modes", "spectrum"});
  if (n.has("modes") == n.has("spectrum")) n.fail("bath needs exactly one of 'modes' or 'spectrum'");
  if (auto m = n.optional("modes")) {
    std::vector<BathMode> modes;
    for (std::size_t i = 0; i < m->array_size(); ++i) {
      const Node mode = m->at(i);
      mode.expect_object({"coupling_sq", "frequency", "occupation"});
      modes.push_back({mode["coupling_sq"].number_at_least(0.0), mode["frequency"].number_at_least(0.0),
                       mode.optional("occupation") ? mode["occupation"].number_at_least(0.0) : 0.0});
    }
    c.bath = std::make_shared<const DiscreteBath>(std::move(modes), omega0);
    return;
  }
  const Node s = n["spectrum"];
  s.expect_object({"family", "exponent", "scale", "cutoff", "cutoff_shape", "occupation", "n_modes"});
  ContinuousSpectrum spec;
  const std::string family = s["family"].string();
  if (family == "flat") {
    spec.family = SpectrumFamily::FlatBand;
  } else if (family == "ohmic") {
    spec.family = SpectrumFamily::Ohmic;
    spec.exponent = s["exponent"].positive();
  } else {
    s["family"].fail("family must be 'flat' or 'ohmic'");
  }
  spec.scale = s["scale"].number_at_least(0.0);
  spec.cutoff = s["cutoff"].positive();
  if (auto shape = s.optional("cutoff_shape")) {
    const std::string v = shape->string();
    if (v == "hard") spec.cutoff_shape = CutoffShape::Hard;
    else if (v == "exponential") spec.cutoff_shape = CutoffShape::Exponential;
    else shape->fail("cutoff_shape must be 'hard' or 'exponential'");
  }
  if (auto occ = s.optional("occupation")) spec.occupation = parse_occupation(*occ);
  const long n_modes = s.optional("n_modes") ? s["n_modes"].integer(1) : 512;
  try {
    c.bath = std::make_shared<const DiscreteBath>(discretize(spec, static_cast<int>(n_modes), omega0));
  } catch (const DomainError& e) {
    s.fail(e.what());
  }
  c.spectrum = spec;
}

ForceModulation parse_force(const Node& n) {
  n.expect_object({"kind", "value", "amplitude", "frequency", "phase", "center", "width", "samples", "support"});
  const std::string kind = n["kind"].string();
  try {
    if (kind == "table") {
      if (n.has("support")) n["support"].fail("table forces take their support from the samples");
      const Node s = n["samples"];
      std::vector<std::pair<double, double>> samples;
      for (std::size_t i = 0; i < s.array_size(); ++i) samples.push_back(s.at(i).pair());
      return ForceModulation::table(std::move(samples));
    }
    const auto [ti, tf] = n["support"].pair();
    if (kind == "constant") return ForceModulation::constant(n.number_or("value", 1.0), ti, tf);
    if (kind == "sinusoid")
      return ForceModulation::sinusoid(n.number_or("amplitude", 1.0), n["frequency"].number(), n.number_or("phase", 0.0),
                                       ti, tf);
    if (kind == "gaussian_pulse")
      return ForceModulation::gaussian_pulse(n["center"].number(), n["width"].positive(), n.number_or("amplitude", 1.0),
                                             ti, tf);
  } catch (const DomainError& e) {
    n.fail(e.what());
  }
  n["kind"].fail("force kind must be 'constant', 'sinusoid', 'gaussian_pulse' or 'table'");
}

}  // namespace

Config parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(std::string("JSON syntax error: ") + e.what(), line);
  }
  const LineMap lines(text);
  const Node top(root, "", lines);
  top.expect_object({"description", "probe", "bath", "force", "grid", "window", "sequential", "markov", "qfi",
                     "estimate", "moments", "correlation", "sweep", "response", "options"});

  Config c;
  c.probe = parse_probe(top["probe"]);
  if (auto b = top.optional("bath")) parse_bath(*b, c.probe.omega0, c);
  else c.bath = std::make_shared<const DiscreteBath>(DiscreteBath::noiseless(c.probe.omega0));
  if (auto f = top.optional("force")) c.force = parse_force(*f);

  {
    const Node g = top["grid"];
    g.expect_object({"t_end", "n_steps", "refinement"});
    c.grid.t_end = g["t_end"].positive();
    if (auto n = g.optional("n_steps")) c.grid.n_steps = static_cast<int>(n->integer(2));
    if (auto r = g.optional("refinement")) {
      const std::string v = r->string();
      if (v == "richardson") c.grid.refinement = Refinement::Richardson;
      else if (v == "none") c.grid.refinement = Refinement::None;
      else r->fail("refinement must be 'richardson' or 'none'");
    }
  }
  if (auto w = top.optional("window")) {
    w->expect_object({"t0", "t"});
    Window win{w->number_or("t0", 0.0), (*w)["t"].number()};
    if (!(win.t >= win.t0)) (*w)["t"].fail("window needs t >= t0");
    if (win.length() > c.grid.t_end * (1.0 + 1e-12)) (*w)["t"].fail("window longer than grid.t_end");
    c.window = win;
  }
  if (auto s = top.optional("sequential")) {
    s->expect_object({"T", "t0", "tau", "tau_bounds"});
    SequentialSpec seq;
    seq.total_window = (*s)["T"].positive();
    seq.start = s->number_or("t0", 0.0);
    if (auto tau = s->optional("tau")) {
      if (tau->raw().is_string()) {
        if (tau->string() != "optimize") tau->fail("tau must be a number or \"optimize\"");
      } else {
        seq.tau = tau->positive();
        if (*seq.tau > c.grid.t_end * (1.0 + 1e-12)) tau->fail("tau longer than grid.t_end");
        if (*seq.tau > seq.total_window) tau->fail("tau longer than T");
      }
    }
    if (auto b = s->optional("tau_bounds")) {
      const auto [lo, hi] = b->pair();
      if (!(lo > 0.0 && lo < hi && hi <= seq.total_window)) b->fail("tau_bounds must satisfy 0 < lo < hi <= T");
      if (hi > c.grid.t_end * (1.0 + 1e-12)) b->fail("tau_bounds upper end exceeds grid.t_end");
      seq.bounds = TauBounds{lo, hi};
    }
    c.sequential = seq;
  }
  if (auto m = top.optional("markov")) {
    m->expect_object({"gamma", "n_thermal"});
    c.markov = MarkovSpec{(*m)["gamma"].number_at_least(0.0), m->number_or("n_thermal", 0.0)};
    if (c.markov->n_thermal < 0.0) (*m)["n_thermal"].fail("n_thermal must be >= 0");
  }
  if (auto q = top.optional("qfi")) {
    q->expect_object({"form"});
    c.qfi_form = (*q)["form"].string();
    if (c.qfi_form != "general" && c.qfi_form != "aligned" && c.qfi_form != "best_state" && c.qfi_form != "markov")
      (*q)["form"].fail("form must be 'general', 'aligned', 'best_state' or 'markov'");
  }
  if (auto e = top.optional("estimate")) {
    e->expect_object({"f_true", "nu", "replications"});
    c.f_true = (*e)["f_true"].number();
    c.nu = static_cast<int>((*e)["nu"].integer(1));
    if (auto r = e->optional("replications")) c.replications = static_cast<int>(r->integer(1));
  }
  if (auto m = top.optional("moments")) {
    m->expect_object({"times", "thetas", "force_amplitude"});
    c.moment_times = (*m)["times"].number_list();
    c.moment_thetas = (*m)["thetas"].number_list();
    c.force_amplitude = m->number_or("force_amplitude", 0.0);
  }
  if (auto cr = top.optional("correlation")) {
    cr->expect_object({"t_prime", "times"});
    c.correlation_t_prime = cr->number_or("t_prime", 0.0);
    c.correlation_times = (*cr)["times"].number_list();
  }
  if (auto s = top.optional("sweep")) {
    s->expect_object({"script_e"});
    c.sweep_script_e = (*s)["script_e"].number_list();
    for (std::size_t i = 0; i < c.sweep_script_e.size(); ++i)
      if (!(c.sweep_script_e[i] >= 0.5)) (*s)["script_e"].fail("script_e values must be >= 1/2");
  }
  if (auto r = top.optional("response")) {
    r->expect_object({"times"});
    c.response_times = (*r)["times"].number_list();
  }
  if (auto o = top.optional("options")) {
    o->expect_object({"omega0_prefactor", "seed", "replications"});
    if (auto p = o->optional("omega0_prefactor")) c.omega0_prefactor = p->boolean();
    if (auto s = o->optional("seed")) c.seed = static_cast<std::uint64_t>(s->integer(0));
    if (auto r = o->optional("replications")) c.replications = static_cast<int>(r->integer(1));
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::optional<MarkovSpec> effective_markov(const Config& config) {
  if (config.markov) return config.markov;
  if (!config.spectrum) return std::nullopt;
  const double w0 = config.probe.omega0;
  return MarkovSpec{kTwoPi * config.spectrum->density(w0), config.spectrum->occupation(w0)};
}

}  // namespace nmqfi::cli
