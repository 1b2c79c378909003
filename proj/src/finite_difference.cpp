#include "halfline/finite_difference.hpp"

#include <algorithm>
#include <array>

namespace halfline {

std::vector<double> derivative_weights(double z, const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  // c[j][k]: weight of node j for the k-th derivative, k = 0, 1.
  std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
  double c1 = 1.0;
  double c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k)
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k)
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = c[j][1];
  return w;
}

std::size_t stencil_start(std::size_t i, std::size_t count, std::size_t width) {
  const std::size_t half = width / 2;
  if (i < half) return 0;
  if (i + half >= count) return count - width;
  return i - half;
}

std::vector<CMatrix> differentiate(const std::vector<double>& grid,
                                   const std::vector<CMatrix>& values, int half_width) {
  if (grid.size() != values.size())
    throw Error(ErrorKind::ShapeMismatch, "grid and samples differ in length");
  const std::size_t count = grid.size();
  const std::size_t width = std::min<std::size_t>(count, 2 * static_cast<std::size_t>(half_width) + 1);
  if (width < 2) throw Error(ErrorKind::BadParams, "need at least two nodes to differentiate");
  std::vector<CMatrix> out(count);
  std::vector<double> nodes(width);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t s = stencil_start(i, count, width);
    for (std::size_t j = 0; j < width; ++j) nodes[j] = grid[s + j];
    const auto w = derivative_weights(grid[i], nodes);
    CMatrix d = CMatrix::Zero(values[i].rows(), values[i].cols());
    for (std::size_t j = 0; j < width; ++j) d += w[j] * values[s + j];
    out[i] = std::move(d);
  }
  return out;
}

}  // namespace halfline
