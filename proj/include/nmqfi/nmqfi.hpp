#pragma once

#include "nmqfi/bath.hpp"
#include "nmqfi/common.hpp"
#include "nmqfi/correlation.hpp"
#include "nmqfi/metrology.hpp"
#include "nmqfi/probe.hpp"
#include "nmqfi/quadrature.hpp"
#include "nmqfi/response.hpp"
#include "nmqfi/scenario.hpp"
#include "nmqfi/sequential.hpp"
