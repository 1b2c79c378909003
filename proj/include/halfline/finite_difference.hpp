#pragma once

#include <vector>

#include "halfline/types.hpp"

namespace halfline {

// First-derivative weights at z for the given nodes (Fornberg's recursion).
std::vector<double> derivative_weights(double z, const std::vector<double>& nodes);

// Node range [first, first + width) of a stencil of `width` points that is
// centred on node i when possible and shifted inward near the ends.
std::size_t stencil_start(std::size_t i, std::size_t count, std::size_t width);

// dF/dx at every grid node with (2 * half_width + 1)-point stencils; centred in
// the interior, one-sided near the ends.
std::vector<CMatrix> differentiate(const std::vector<double>& grid,
                                   const std::vector<CMatrix>& values, int half_width = 3);

}  // namespace halfline
