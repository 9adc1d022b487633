#pragma once

#include <memory>

#include "nmqfi/probe.hpp"
#include "nmqfi/response.hpp"

namespace nmqfi {

/// Everything a single-window computation needs, bundled.
struct Scenario {
  std::shared_ptr<const ResponseFunction> response;
  GaussianProbeInit init;
  ForceModulation force;
  double omega0 = 1.0;
  Window window;

  const DiscreteBath& bath() const { return response->bath(); }
};

}  // namespace nmqfi
