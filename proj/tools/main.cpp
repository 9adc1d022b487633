#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace nmqfi::cli;
  CLI::App app{"nmqfi: force sensing with a harmonic probe in a Gaussian bath"};
  app.require_subcommand(1, 1);

  RunRequest request;
  std::string format;
  std::uint64_t seed = 0;
  for (const char* name : kSubcommands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", request.config_path, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", request.out_path, "Output file (default: stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed, "Override options.seed");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  request.subcommand = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();
  if (!format.empty()) request.format = format == "csv" ? Format::Csv : Format::Json;
  if (sub->count("--seed")) request.seed = seed;
  return run(request, std::cout, std::cerr);
}
