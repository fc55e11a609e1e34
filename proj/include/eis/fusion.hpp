#pragma once

#include "eis/raster.hpp"

namespace eis {

// S = gamma S_E + (1 - gamma) S_I, then normalized. The endpoints return the
// corresponding input exactly; equal inputs pass through unchanged.
SaliencyMap fuse(const SaliencyMap& external, const SaliencyMap& internal, double gamma);

}  // namespace eis
