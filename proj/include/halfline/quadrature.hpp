#pragma once

#include <vector>

namespace halfline {

struct QuadratureRule {
  std::vector<double> nodes, weights;
};

// Gauss-Legendre rule of the given order on [-1, 1].
QuadratureRule gauss_legendre(int order);

// Composite Gauss-Legendre on [a, b] with ceil((b - a) / panel_width) equal panels.
QuadratureRule composite_gauss(double a, double b, double panel_width, int order);

// Composite trapezoid on `count` equally spaced nodes including both ends.
QuadratureRule trapezoid(double a, double b, int count);

}  // namespace halfline
