#include "halfline/quadrature.hpp"

#include <cmath>

#include "halfline/types.hpp"

namespace halfline {

QuadratureRule gauss_legendre(int order) {
  if (order < 1) throw Error(ErrorKind::BadParams, "Gauss-Legendre order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int j = 2; j <= order; ++j) {
        const double p2 = ((2 * j - 1) * z * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -z;
    rule.nodes[static_cast<std::size_t>(order - 1 - i)] = z;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
  }
  return rule;
}

QuadratureRule composite_gauss(double a, double b, double panel_width, int order) {
  QuadratureRule rule;
  if (!(b > a)) return rule;
  if (!(panel_width > 0.0)) throw Error(ErrorKind::BadParams, "panel width must be > 0");
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / panel_width - 1e-9)));
  const QuadratureRule base = gauss_legendre(order);
  const double h = (b - a) / panels;
  rule.nodes.reserve(static_cast<std::size_t>(panels * order));
  rule.weights.reserve(rule.nodes.capacity());
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < order; ++i) {
      rule.nodes.push_back(mid + 0.5 * h * base.nodes[static_cast<std::size_t>(i)]);
      rule.weights.push_back(0.5 * h * base.weights[static_cast<std::size_t>(i)]);
    }
  }
  return rule;
}

QuadratureRule trapezoid(double a, double b, int count) {
  if (count < 2) throw Error(ErrorKind::BadParams, "trapezoid needs >= 2 nodes");
  QuadratureRule rule;
  const double h = (b - a) / (count - 1);
  for (int i = 0; i < count; ++i) {
    rule.nodes.push_back(a + h * i);
    rule.weights.push_back((i == 0 || i == count - 1) ? 0.5 * h : h);
  }
  return rule;
}

}  // namespace halfline
