#include "halfline/potential.hpp"

#include <algorithm>
#include <cmath>

#include "halfline/linalg.hpp"

namespace halfline {

namespace {

// Fritsch-Carlson slope at an interior node from the two adjacent secants.
double limited_slope(double left, double right) {
  if (left * right <= 0.0) return 0.0;
  const double harmonic = 2.0 * left * right / (left + right);
  return harmonic;
}

double end_slope(double secant) { return secant; }

}  // namespace

MatrixPotential::MatrixPotential(std::vector<double> grid, std::vector<CMatrix> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.size() < 2 || grid_.size() != values_.size())
    throw Error(ErrorKind::ShapeMismatch, "potential needs >= 2 nodes and one sample per node");
  if (grid_.front() != 0.0) throw Error(ErrorKind::BadParams, "potential grid must start at 0");
  for (std::size_t i = 1; i < grid_.size(); ++i)
    if (!(grid_[i] > grid_[i - 1]))
      throw Error(ErrorKind::BadParams, "potential grid must be strictly increasing", grid_[i]);
  n_ = values_.front().rows();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const CMatrix& q = values_[i];
    if (q.rows() != n_ || q.cols() != n_)
      throw Error(ErrorKind::ShapeMismatch, "potential samples must all be n x n");
    const double defect = hermiticity_defect(q);
    if (!(defect <= kHermitianTolerance))
      throw Error(ErrorKind::BadParams, "potential sample is not hermitian", grid_[i]);
    for (Eigen::Index r = 0; r < n_; ++r)
      for (Eigen::Index c = 0; c < n_; ++c) {
        if (r != c && std::abs(q(r, c)) >= kDiagonalTolerance) diagonal_ = false;
        if (q(r, c) != 0.0) zero_ = false;
      }
  }

  const std::size_t m = grid_.size();
  slopes_.assign(m, CMatrix::Zero(n_, n_));
  for (Eigen::Index r = 0; r < n_; ++r) {
    for (Eigen::Index c = 0; c < n_; ++c) {
      for (int part = 0; part < 2; ++part) {
        auto comp = [&](std::size_t i) {
          return part == 0 ? values_[i](r, c).real() : values_[i](r, c).imag();
        };
        auto secant = [&](std::size_t i) {  // over [x_i, x_{i+1}]
          return (comp(i + 1) - comp(i)) / (grid_[i + 1] - grid_[i]);
        };
        for (std::size_t i = 0; i < m; ++i) {
          double d;
          if (i == 0) d = end_slope(secant(0));
          else if (i == m - 1) d = end_slope(secant(m - 2));
          else d = limited_slope(secant(i - 1), secant(i));
          if (part == 0) slopes_[i](r, c).real(d);
          else slopes_[i](r, c).imag(d);
        }
      }
    }
  }
}

MatrixPotential MatrixPotential::zero(int n, double x_max, int intervals) {
  std::vector<double> grid(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) grid[static_cast<std::size_t>(i)] = x_max * i / intervals;
  grid.back() = x_max;
  return MatrixPotential(std::move(grid), std::vector<CMatrix>(grid.size(), CMatrix::Zero(n, n)));
}

MatrixPotential MatrixPotential::sample(int n, const std::vector<double>& grid,
                                        const std::function<CMatrix(double)>& q) {
  std::vector<CMatrix> values;
  values.reserve(grid.size());
  for (double x : grid) {
    CMatrix v = q(x);
    if (v.rows() != n || v.cols() != n)
      throw Error(ErrorKind::ShapeMismatch, "sampled potential has the wrong size");
    values.push_back(hermitian_part(v));
  }
  return MatrixPotential(grid, std::move(values));
}

MatrixPotential MatrixPotential::uniform(int n, double x_max, double h,
                                         const std::function<CMatrix(double)>& q) {
  if (!(h > 0.0) || !(x_max > 0.0)) throw Error(ErrorKind::BadParams, "x_max and h must be > 0");
  const int intervals = std::max(1, static_cast<int>(std::lround(x_max / h)));
  std::vector<double> grid(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) grid[static_cast<std::size_t>(i)] = x_max * i / intervals;
  return sample(n, grid, q);
}

void MatrixPotential::evaluate(double x, CMatrix& out) const {
  if (zero_ || x < 0.0 || x > grid_.back()) {
    out.setZero();
    return;
  }
  auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
  std::size_t i = (it == grid_.begin()) ? 0 : static_cast<std::size_t>(it - grid_.begin()) - 1;
  if (i >= grid_.size() - 1) i = grid_.size() - 2;
  const double x0 = grid_[i];
  const double h = grid_[i + 1] - x0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  out.noalias() = h00 * values_[i];
  out.noalias() += (h10 * h) * slopes_[i];
  out.noalias() += h01 * values_[i + 1];
  out.noalias() += (h11 * h) * slopes_[i + 1];
}

CMatrix MatrixPotential::operator()(double x) const {
  CMatrix out(n_, n_);
  evaluate(x, out);
  return out;
}

double MatrixPotential::sup_norm() const {
  double s = 0.0;
  for (const auto& q : values_) s = std::max(s, q.norm());
  return s;
}

MatrixPotential MatrixPotential::channel(Eigen::Index j) const {
  std::vector<CMatrix> v;
  v.reserve(values_.size());
  for (const auto& q : values_) v.push_back(CMatrix::Constant(1, 1, q(j, j)));
  return MatrixPotential(grid_, std::move(v));
}

MatrixPotential star_potential(const std::vector<double>& grid,
                               const std::vector<std::vector<double>>& rays) {
  const auto n = static_cast<Eigen::Index>(rays.size());
  std::vector<CMatrix> values(grid.size(), CMatrix::Zero(n, n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& ray = rays[static_cast<std::size_t>(j)];
    if (ray.size() != grid.size())
      throw Error(ErrorKind::ShapeMismatch, "ray samples must match the shared grid");
    for (std::size_t i = 0; i < grid.size(); ++i) values[i](j, j) = ray[i];
  }
  return MatrixPotential(grid, std::move(values));
}

double PotentialPreset::profile(double x) const {
  switch (shape) {
    case Shape::ConstantWell:
      return (x >= center && x <= center + width) ? 1.0 : 0.0;
    case Shape::Gaussian: {
      const double u = (x - center) / width;
      return std::exp(-u * u);
    }
    case Shape::Sech2: {
      const double c = std::cosh((x - center) / width);
      return 1.0 / (c * c);
    }
  }
  return 0.0;
}

PotentialPreset::Shape parse_preset_shape(const std::string& name) {
  if (name == "constant_well") return PotentialPreset::Shape::ConstantWell;
  if (name == "gaussian") return PotentialPreset::Shape::Gaussian;
  if (name == "sech2") return PotentialPreset::Shape::Sech2;
  throw Error(ErrorKind::BadParams, "unknown potential preset '" + name + "'");
}

const char* to_string(PotentialPreset::Shape shape) {
  switch (shape) {
    case PotentialPreset::Shape::ConstantWell: return "constant_well";
    case PotentialPreset::Shape::Gaussian: return "gaussian";
    case PotentialPreset::Shape::Sech2: return "sech2";
  }
  return "unknown";
}

MatrixPotential sample_presets(const std::vector<PotentialPreset>& presets, int n, double x_max,
                               double h) {
  for (const auto& p : presets)
    if (p.amplitude.rows() != n || p.amplitude.cols() != n)
      throw Error(ErrorKind::ShapeMismatch, "preset amplitude must be n x n");
  return MatrixPotential::uniform(n, x_max, h, [&](double x) {
    CMatrix q = CMatrix::Zero(n, n);
    for (const auto& p : presets) q += p.profile(x) * p.amplitude;
    return q;
  });
}

}  // namespace halfline
