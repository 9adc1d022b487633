#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "scenario_manifest.hpp"

using namespace nmqfi;
using namespace nmqfi::cli;

namespace {

const std::string kDir = NMQFI_SCENARIO_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& args, const std::string& out_file) {
  const std::string cmd = std::string(NMQFI_TOOL_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

const char* kMinimal = R"({
  "probe": {"omega0": 1.0},
  "grid": {"t_end": 1.0, "n_steps": 16}
})";

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(std::strtod(format_double(1.0 / 3).c_str(), nullptr) == 1.0 / 3);
}

TEST_CASE("config validation reports the offending line") {
  CHECK_NOTHROW(parse_config(kMinimal));
  CHECK(error_line(R"({
  "probe": {"omega0": 1.0, "colour": 3},
  "grid": {"t_end": 1.0, "n_steps": 16}
})") == 2);
  CHECK(error_line(R"({
  "probe": {"omega0": 1.0},
  "grid": {"t_end": "long", "n_steps": 16}
})") == 3);
  CHECK(error_line(R"({
  "probe": {"omega0": 1.0},
  "grid": {"t_end": 1.0, "n_steps": 16},
  "bath": {"modes": [
    {"coupling_sq": 0.1, "frequency": 1.0},
    {"coupling_sq": -0.1, "frequency": 1.0}
  ]}
})") == 6);
  CHECK(error_line(R"({"probe": {"omega0": 1.0}})") > 0);  // grid missing
  CHECK(error_line("{ \"probe\": ") > 0);                  // syntax error
  CHECK(error_line(R"({
  "probe": {"omega0": -1.0},
  "grid": {"t_end": 1.0, "n_steps": 16}
})") == 2);
}

TEST_CASE("config contents") {
  const auto c = parse_config(R"({
  "probe": {"omega0": 2.0, "state": {"kind": "squeezed", "r": 0.5, "angle": 0.2}},
  "bath": {"spectrum": {"family": "flat", "scale": 0.01, "cutoff": 4.0, "n_modes": 64,
                        "occupation": {"kind": "constant", "value": 2.0}}},
  "grid": {"t_end": 3.0},
  "moments": {"times": {"from": 1.0, "to": 100.0, "count": 3, "spacing": "log"}, "thetas": [0.0, 1.0]},
  "options": {"omega0_prefactor": "off", "seed": 7}
})");
  CHECK(c.probe.omega0 == 2.0);
  CHECK(c.probe.init.is_pure());
  CHECK(c.bath->size() == 64);
  CHECK(c.spectrum.has_value());
  CHECK(c.grid.n_steps == 0);
  REQUIRE(c.moment_times.size() == 3);
  CHECK(c.moment_times[1] == doctest::Approx(10.0));
  CHECK_FALSE(c.omega0_prefactor);
  CHECK(c.seed == 7);
  // Golden-rule rate from the spectrum: gamma = 2 pi J(omega0), n_T = N(omega0).
  const auto m = effective_markov(c);
  REQUIRE(m.has_value());
  CHECK(m->gamma == doctest::Approx(2 * kPi * 0.01));
  CHECK(m->n_thermal == 2.0);
  CHECK_FALSE(effective_markov(parse_config(kMinimal)).has_value());
}

TEST_CASE("default formats and unknown subcommands") {
  CHECK(default_format("qfi") == Format::Json);
  CHECK(default_format("sequential") == Format::Json);
  CHECK(default_format("moments") == Format::Csv);
  CHECK_THROWS(execute("nope", parse_config(kMinimal), Format::Csv));
}

TEST_CASE("JSON output keys are sorted") {
  const auto c = load_config(kDir + "/noiseless_vacuum_pi.json");
  const std::string text = execute("qfi", c, Format::Json);
  const auto a = text.find("\"abs_d\""), f = text.find("\"form\""), v = text.find("\"value\""),
             w = text.find("\"window\"");
  CHECK(a < f);
  CHECK(f < v);
  CHECK(v < w);
}

TEST_CASE("reruns are byte-identical") {
  const auto c = load_config(kDir + "/noiseless_vacuum_pi.json");
  CHECK(execute("estimate", c, Format::Json) == execute("estimate", c, Format::Json));
  auto c2 = c;
  c2.seed = c.seed + 1;
  CHECK(execute("estimate", c, Format::Json) != execute("estimate", c2, Format::Json));
  const auto s = load_config(kDir + "/sweep_pair.json");
  CHECK(execute("sweep", s, Format::Csv) == execute("sweep", s, Format::Csv));
}

TEST_CASE("tool binary: exit codes, --out, --seed") {
  const auto tmp = std::filesystem::temp_directory_path() / "nmqfi_cli_test";
  std::filesystem::create_directories(tmp);
  const std::string a = (tmp / "a.txt").string(), b = (tmp / "b.txt").string(), log = (tmp / "log.txt").string();

  CHECK(shell("qfi --config " + kDir + "/noiseless_vacuum_pi.json --out " + a, log) == 0);
  const auto doc = manifest::json::parse(slurp(a));
  CHECK(doc["value"].get<double>() == doctest::Approx(8.0).epsilon(1e-9));

  CHECK(shell("estimate --config " + kDir + "/noiseless_vacuum_pi.json --seed 5 --out " + a, log) == 0);
  CHECK(shell("estimate --config " + kDir + "/noiseless_vacuum_pi.json --seed 5 --out " + b, log) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(manifest::json::parse(slurp(a))["seed"] == 5);

  CHECK(shell("qfi --config " + kDir + "/invalid/unknown_key.json", log) == kExitConfig);
  CHECK(slurp(log).find("config line 5") != std::string::npos);
  CHECK(shell("qfi --config " + kDir + "/invalid/misaligned_aligned_form.json", log) == kExitNumerical);
  CHECK(shell("qfi --config " + kDir + "/does_not_exist.json", log) == kExitConfig);
  CHECK(shell("qfi --config " + kDir + "/noiseless_vacuum_pi.json --format xml", log) == kExitConfig);
  CHECK(shell("moments --config " + kDir + "/resonant_vacuum_moments.json --format json", log) == 0);
  std::filesystem::remove_all(tmp);
}

TEST_CASE("limits: exact and narrow-band columns agree for a resonant mode") {
  const auto c = load_config(kDir + "/narrow_band_resonant.json");
  const auto csv = manifest::parse_csv(execute("limits", c, Format::Csv));
  REQUIRE(csv.header == std::vector<std::string>{"tau", "exact", "narrow_band", "markov"});
  for (const auto& row : csv.rows) CHECK(std::abs(row[1] - row[2]) <= 1e-6);
}

TEST_CASE("sweep slope") {
  const auto c = load_config(kDir + "/sweep_pair.json");
  const auto csv = manifest::parse_csv(execute("sweep", c, Format::Csv));
  std::vector<double> e, f;
  for (const auto& row : csv.rows) e.push_back(row[0]), f.push_back(row[csv.column("total_qfi")]);
  CHECK(oracle::loglog_slope(e, f) == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("every shipped scenario passes its manifest checks") {
  const auto outcomes = manifest::run_all(kDir);
  CHECK(outcomes.size() >= 16);
  for (const auto& o : outcomes) {
    INFO(o.name);
    for (const auto& f : o.failures) MESSAGE(f);
    CHECK(o.pass);
  }
  // Every config in the directory is referenced.
  std::set<std::string> used;
  const auto doc = manifest::json::parse(slurp(kDir + "/manifest.json"));
  for (const auto& e : doc["entries"])
    used.insert(e["config"].get<std::string>());
  for (const auto& p : std::filesystem::recursive_directory_iterator(kDir)) {
    if (p.path().extension() != ".json" || p.path().filename() == "manifest.json") continue;
    CHECK_MESSAGE(used.count(std::filesystem::relative(p.path(), kDir).string()), p.path().string());
  }
}
