#pragma once

#include "slspec/config.hpp"
#include "slspec/error.hpp"
#include "slspec/extrapolation.hpp"
#include "slspec/nevanlinna.hpp"
#include "slspec/parallel.hpp"
#include "slspec/problem.hpp"
#include "slspec/propagator.hpp"
#include "slspec/quadrature.hpp"
#include "slspec/spectral.hpp"
#include "slspec/transform.hpp"

namespace slspec {
inline constexpr const char* kVersion = "0.1.0";
}
