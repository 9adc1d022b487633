// Runs every scenario listed in the manifest and prints one line each.

#include <cstdio>

#include "scenario_manifest.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : NMQFI_SCENARIO_DIR;
  int failures = 0;
  for (const auto& o : manifest::run_all(dir)) {
    std::printf("%s %s\n", o.pass ? "PASS" : "FAIL", o.name.c_str());
    for (const auto& f : o.failures) std::printf("       %s\n", f.c_str());
    failures += !o.pass;
  }
  return failures;
}
