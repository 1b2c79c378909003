#pragma once

#include <functional>
#include <string>
#include <vector>

#include "halfline/types.hpp"

namespace halfline {

// Hermitian matrix potential sampled on 0 = x_0 < ... < x_M = x_max and
// identically zero beyond x_max. Between nodes it is a piecewise-cubic
// Hermite interpolant with Fritsch-Carlson limited slopes (entrywise on the
// real and imaginary parts), so a jump in the samples does not overshoot.
class MatrixPotential {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kDiagonalTolerance = 1e-14;

  MatrixPotential() = default;
  MatrixPotential(std::vector<double> grid, std::vector<CMatrix> values);

  static MatrixPotential zero(int n, double x_max, int intervals);
  static MatrixPotential sample(int n, const std::vector<double>& grid,
                                const std::function<CMatrix(double)>& q);
  static MatrixPotential uniform(int n, double x_max, double h,
                                 const std::function<CMatrix(double)>& q);

  Eigen::Index channels() const { return n_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<CMatrix>& values() const { return values_; }
  double x_max() const { return grid_.back(); }
  bool is_diagonal() const { return diagonal_; }
  bool is_zero() const { return zero_; }

  // Writes Q(x) into `out` (pre-sized n x n); no allocation on the hot path.
  void evaluate(double x, CMatrix& out) const;
  CMatrix operator()(double x) const;

  // sup_x ||Q(x)||_F over the samples.
  double sup_norm() const;

  // Scalar potential of channel j (diagonal entry).
  MatrixPotential channel(Eigen::Index j) const;

 private:
  Eigen::Index n_ = 0;
  std::vector<double> grid_;
  std::vector<CMatrix> values_;
  std::vector<CMatrix> slopes_;
  bool diagonal_ = true;
  bool zero_ = true;
};

// Diagonal potential assembled from per-ray scalar samples on a shared grid.
MatrixPotential star_potential(const std::vector<double>& grid,
                               const std::vector<std::vector<double>>& rays);

// Analytic shapes used by the CLI and the tests: Q(x) = profile(x) * amplitude.
struct PotentialPreset {
  enum class Shape { ConstantWell, Gaussian, Sech2 };
  Shape shape = Shape::Gaussian;
  CMatrix amplitude;     // hermitian n x n
  double center = 0.0;   // gaussian/sech2 centre; constant well start
  double width = 1.0;    // gaussian/sech2 width; constant well length

  double profile(double x) const;
};

PotentialPreset::Shape parse_preset_shape(const std::string& name);
const char* to_string(PotentialPreset::Shape shape);

// Sum of presets sampled on a uniform grid of step h over [0, x_max].
MatrixPotential sample_presets(const std::vector<PotentialPreset>& presets, int n, double x_max,
                               double h);

}  // namespace halfline
