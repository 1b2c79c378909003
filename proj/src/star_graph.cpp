#include "halfline/star_graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "halfline/linalg.hpp"
#include "halfline/parallel.hpp"

namespace halfline {

namespace {

Complex i_power(int m) {
  static const Complex table[4] = {1.0, kI, -1.0, -kI};
  return table[((m % 4) + 4) % 4];
}

double wrap(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

std::size_t mirror(std::size_t i, std::size_t count) { return count - 1 - i; }

void check_symmetric_grid(const std::vector<double>& kgrid) {
  const std::size_t m = kgrid.size();
  if (m < 4 || m % 2 != 0) throw Error(ErrorKind::BadParams, "k-grid must have an even node count");
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(kgrid[i] + kgrid[mirror(i, m)]) > 1e-12 * std::abs(kgrid.back()))
      throw Error(ErrorKind::BadParams, "k-grid must be symmetric about 0", kgrid[i]);
}

std::vector<double> uniform_grid(double end, double step) {
  const int steps = std::max(7, static_cast<int>(std::lround(end / step)));
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) grid[static_cast<std::size_t>(i)] = end * i / steps;
  return grid;
}

// Analytic continuation of F (F -> 1 at infinity, analytic for Im k > 0) to z
// in the upper half-plane by the Cauchy integral over the midpoint grid. The
// 1/(k+i) and 1/(k+i)^2 tails are fitted and continued in closed form.
Complex cauchy_continuation(const std::vector<double>& kgrid, const std::vector<Complex>& f,
                            Complex z) {
  const std::size_t m = kgrid.size();
  const double dk = (kgrid.back() - kgrid.front()) / static_cast<double>(m - 1);
  const double k_end = kgrid.back();
  std::vector<std::size_t> fit;
  for (std::size_t j = 0; j < m; ++j)
    if (std::abs(kgrid[j]) >= 0.6 * k_end) fit.push_back(j);
  CMatrix basis(static_cast<Eigen::Index>(fit.size()), 2);
  CVector rhs(static_cast<Eigen::Index>(fit.size()));
  for (std::size_t r = 0; r < fit.size(); ++r) {
    const Complex w = 1.0 / (kgrid[fit[r]] + kI);
    basis(static_cast<Eigen::Index>(r), 0) = w;
    basis(static_cast<Eigen::Index>(r), 1) = w * w;
    rhs(static_cast<Eigen::Index>(r)) = f[fit[r]] - 1.0;
  }
  const CVector c = basis.colPivHouseholderQr().solve(rhs);
  Complex integral = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const Complex w = 1.0 / (kgrid[j] + kI);
    const Complex rest = f[j] - 1.0 - c(0) * w - c(1) * w * w;
    integral += rest / (kgrid[j] - z);
  }
  const Complex wz = 1.0 / (z + kI);
  return 1.0 + c(0) * wz + c(1) * wz * wz + integral * dk / (2.0 * kPi * kI);
}

}  // namespace

RayTraces ray_traces(const MatrixPotential& ray, const std::vector<double>& kgrid,
                     const ForwardOptions& options, int threads) {
  if (ray.channels() != 1) throw Error(ErrorKind::ShapeMismatch, "ray potential must be scalar");
  RayTraces t;
  const std::size_t m = kgrid.size();
  t.F.resize(m);
  t.Fx.resize(m);
  t.Fbar.resize(m);
  t.Fxbar.resize(m);
  parallel_for(m, threads, [&](std::size_t i) {
    const JostFunctions jf = compute_jost_pair(ray, kgrid[i], options);
    t.F[i] = jf.F_plus(0, 0);
    t.Fx[i] = jf.Fx_plus(0, 0);
    t.Fbar[i] = jf.F_minus(0, 0);
    t.Fxbar[i] = jf.Fx_minus(0, 0);
  });
  return t;
}

GraphScattering graph_scattering(const CVector& F, const CVector& Fx, const CVector& Fbar,
                                 double k) {
  const auto n = static_cast<int>(F.size());
  if (Fx.size() != n || Fbar.size() != n)
    throw Error(ErrorKind::ShapeMismatch, "one Jost trace per ray required");
  for (int j = 0; j < n; ++j)
    if (std::abs(F(j)) < 1e-12) {
      std::ostringstream msg;
      msg << "Jost function of ray " << j << " vanishes at k = " << k;
      throw Error(ErrorKind::JostZeroOnAxis, msg.str(), k);
    }
  Complex prod = 1.0, log_sum = 0.0;
  for (int j = 0; j < n; ++j) {
    prod *= F(j);
    log_sum += Fx(j) / F(j);
  }
  GraphScattering g;
  g.M = i_power(n - 1) / static_cast<double>(n) * prod * log_sum;
  g.S.resize(n, n);
  const Complex common = 2.0 * i_power(n) * k * prod / (static_cast<double>(n) * g.M);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g.S(i, j) = common / (F(i) * F(j));
      if (i == j) g.S(i, j) -= Fbar(i) / F(i);
    }
  return g;
}

StarForward star_forward(const MatrixPotential& q, const std::vector<double>& kgrid,
                         const ForwardOptions& options, int threads) {
  if (!q.is_diagonal()) throw Error(ErrorKind::BadParams, "star potential must be diagonal");
  const Eigen::Index n = q.channels();
  StarForward out;
  out.kgrid = kgrid;
  for (Eigen::Index j = 0; j < n; ++j) out.rays.push_back(ray_traces(q.channel(j), kgrid, options, threads));
  out.S.resize(kgrid.size());
  out.M.resize(kgrid.size());
  CVector f(n), fx(n), fb(n);
  for (std::size_t i = 0; i < kgrid.size(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& r = out.rays[static_cast<std::size_t>(j)];
      f(j) = r.F[i];
      fx(j) = r.Fx[i];
      fb(j) = r.Fbar[i];
    }
    const GraphScattering g = graph_scattering(f, fx, fb, kgrid[i]);
    out.S[i] = g.S;
    out.M[i] = g.M;
  }
  return out;
}

void RayScatteringData::validate() const {
  if (n < 2) throw Error(ErrorKind::BadParams, "a star needs at least two rays");
  if (rays.size() != R.size()) throw Error(ErrorKind::ShapeMismatch, "one R per listed ray");
  for (int j : rays)
    if (j < 0 || j >= n) throw Error(ErrorKind::BadParams, "ray index out of range", j);
  for (const auto& r : R) {
    if (r.size() != kgrid.size()) throw Error(ErrorKind::ShapeMismatch, "R must match the k-grid");
    for (const auto& v : r)
      if (std::abs(v) > 1.0 + 1e-8)
        throw Error(ErrorKind::BadParams, "|R| exceeds 1 on the real axis", std::abs(v));
  }
  if (b.size() != kappa.size()) throw Error(ErrorKind::ShapeMismatch, "one b row per kappa");
  for (const auto& row : b) {
    if (row.size() != rays.size()) throw Error(ErrorKind::ShapeMismatch, "one b entry per ray");
    for (double v : row)
      if (v < -1e-12) throw Error(ErrorKind::BadParams, "normalisation entries must be >= 0", v);
  }
  if (!orders.empty() && orders.size() != kappa.size())
    throw Error(ErrorKind::ShapeMismatch, "one order per kappa");
}

RayScatteringData partial_data(const ScatteringData& full, const std::vector<int>& rays) {
  RayScatteringData p;
  p.n = static_cast<int>(full.channels());
  p.kgrid = full.kgrid;
  p.rays = rays;
  for (int j : rays) {
    std::vector<Complex> r(full.kgrid.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = full.S[i](j, j);
    p.R.push_back(std::move(r));
  }
  for (const auto& bs : full.bound_states) {
    p.kappa.push_back(bs.kappa);
    p.orders.push_back(bs.order);
    std::vector<double> row;
    for (int j : rays) row.push_back(bs.C2(j, j).real());
    p.b.push_back(std::move(row));
  }
  return p;
}

RayInversion diagonal_marchenko(const std::vector<double>& kgrid, const std::vector<Complex>& R,
                                const std::vector<double>& kappa, const std::vector<double>& b,
                                Complex u_hat, const InverseOptions& options) {
  if (R.size() != kgrid.size() || b.size() != kappa.size())
    throw Error(ErrorKind::ShapeMismatch, "reflection or normalisation data has the wrong size");
  ScatteringData data;
  data.kgrid = kgrid;
  data.U_hat = CMatrix::Constant(1, 1, u_hat);
  for (const auto& r : R) data.S.push_back(CMatrix::Constant(1, 1, r));
  for (std::size_t l = 0; l < kappa.size(); ++l) {
    if (b[l] == 0.0) continue;
    BoundState bs;
    bs.kappa = kappa[l];
    bs.C2 = CMatrix::Constant(1, 1, b[l]);
    data.bound_states.push_back(bs);
  }
  RayInversion out;
  const double t_max = options.g.t_max;
  const double x_end = options.x_end > 0.0 ? std::min(options.x_end, t_max) : t_max;
  const GKernel g = build_g(data, options.g, &out.diagnostics);
  const auto tk = transform_kernel(g, uniform_grid(x_end, options.x_step), t_max, options.nystrom,
                                   options.threads);
  out.q = recover_potential(tk, &out.diagnostics);
  out.jost = std::make_shared<KernelJost>(g, t_max, options.nystrom, options.jost_delta);
  const std::size_t m = kgrid.size();
  out.F.resize(m);
  out.Fx.resize(m);
  out.Fbar.resize(m);
  out.Fxbar.resize(m);
  CMatrix f, fx;
  for (std::size_t i = 0; i < m; ++i) {
    out.jost->traces(kgrid[i], f, fx);
    out.F[i] = f(0, 0);
    out.Fx[i] = fx(0, 0);
  }
  for (std::size_t i = 0; i < m; ++i) {
    out.Fbar[i] = out.F[mirror(i, m)];
    out.Fxbar[i] = out.Fx[mirror(i, m)];
  }
  return out;
}

int zero_order_at_origin(const std::vector<double>& kgrid, const std::vector<double>& modulus) {
  std::size_t a = kgrid.size(), b = kgrid.size();
  for (std::size_t i = 0; i < kgrid.size(); ++i) {
    if (kgrid[i] <= 0.0) continue;
    if (a == kgrid.size() || kgrid[i] < kgrid[a]) {
      b = a;
      a = i;
    } else if (b == kgrid.size() || kgrid[i] < kgrid[b]) {
      b = i;
    }
  }
  if (b == kgrid.size()) return 0;
  const double slope = std::log(modulus[b] / modulus[a]) / std::log(kgrid[b] / kgrid[a]);
  return slope < 0.5 ? 0 : static_cast<int>(std::lround(slope));
}

NormalizedDispersion normalized_dispersion(const std::vector<double>& kgrid,
                                           const std::vector<Complex>& M, int n,
                                           const std::vector<double>& kappa,
                                           const std::vector<int>& orders,
                                           const DispersionOptions& options) {
  if (M.size() != kgrid.size()) throw Error(ErrorKind::ShapeMismatch, "one M sample per k node");
  NormalizedDispersion out;
  out.M_hat.resize(M.size());
  std::vector<double> modulus(M.size());
  std::size_t smallest = 0;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double k = kgrid[i];
    Complex v = M[i] / (i_power(n) * (k + kI));
    for (std::size_t l = 0; l < kappa.size(); ++l) {
      const int m = orders.empty() ? 1 : orders[l];
      v *= std::pow((k + kI * kappa[l]) / (k - kI * kappa[l]), m);
    }
    out.M_hat[i] = v;
    modulus[i] = std::abs(M[i]);
    if (std::abs(k) < std::abs(kgrid[smallest])) smallest = i;
  }
  out.virtual_order = zero_order_at_origin(kgrid, modulus);
  const double at_origin = std::abs(out.M_hat[smallest]);
  double at_ends = std::max(std::abs(out.M_hat.front() - 1.0), std::abs(out.M_hat.back() - 1.0));
  out.diagnostics.set("m_hat_min_abs_k", at_origin);
  out.diagnostics.set("m_hat_end_deviation", at_ends);
  out.diagnostics.set("virtual_order", out.virtual_order);
  if (at_origin < options.virtual_error) {
    std::ostringstream msg;
    msg << "|M_hat| = " << at_origin << " at the smallest |k| (virtual level)";
    throw Error(ErrorKind::VirtualLevelSuspected, msg.str(), at_origin);
  }
  if (at_origin < options.virtual_warning || out.virtual_order > 0) {
    std::ostringstream msg;
    msg << "VirtualLevelWarning: |M_hat| = " << at_origin << " at k = " << kgrid[smallest];
    out.diagnostics.warn(msg.str());
  }
  return out;
}

std::vector<double> hilbert_phase(const std::vector<double>& kgrid, const std::vector<double>& f) {
  const std::size_t m = kgrid.size();
  if (f.size() != m || m < 3) throw Error(ErrorKind::ShapeMismatch, "one sample per k node");
  const double dk = (kgrid.back() - kgrid.front()) / static_cast<double>(m - 1);
  const double lo = kgrid.front() - 0.5 * dk;
  const double hi = kgrid.back() + 0.5 * dk;
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double k = kgrid[i];
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      sum += (f[j] - f[i]) / (kgrid[j] - k);
    }
    double slope;
    if (i == 0) slope = (f[1] - f[0]) / dk;
    else if (i == m - 1) slope = (f[m - 1] - f[m - 2]) / dk;
    else slope = (f[i + 1] - f[i - 1]) / (2.0 * dk);
    sum += slope;
    const double pv = sum * dk + f[i] * std::log((hi - k) / (k - lo));
    out[i] = -pv / kPi;
  }
  return out;
}

std::vector<double> argument_reconstruction(const std::vector<double>& kgrid,
                                            const std::vector<double>& modulus, int n,
                                            const std::vector<double>& kappa,
                                            const std::vector<int>& orders, int virtual_order,
                                            const ArgumentOptions& options) {
  const std::size_t m = kgrid.size();
  if (modulus.size() != m) throw Error(ErrorKind::ShapeMismatch, "one |M| sample per k node");
  std::vector<double> r(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(modulus[i] > 0.0)) throw Error(ErrorKind::BadParams, "|M| must be positive on the grid", kgrid[i]);
    const double k = kgrid[i];
    const double norm = std::hypot(k, 1.0);
    r[i] = std::log(modulus[i]) - std::log(norm) - virtual_order * std::log(std::abs(k) / norm);
  }
  const double tail = std::max(std::abs(r.front()), std::abs(r.back()));
  if (tail > options.tail_tolerance) {
    std::ostringstream msg;
    msg << "ln|M_hat| = " << tail << " at the grid ends (tolerance " << options.tail_tolerance << ")";
    throw Error(ErrorKind::TailNotDecayed, msg.str(), tail);
  }
  auto h = hilbert_phase(kgrid, r);
  if (options.tail_correction) {
    // ln|M_hat| ~ a / k^2 beyond the grid; its contribution in closed form.
    const double dk = (kgrid.back() - kgrid.front()) / static_cast<double>(m - 1);
    const double lim = kgrid.back() + 0.5 * dk;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double k2 = kgrid[i] * kgrid[i];
      if (std::abs(kgrid[i]) < 0.8 * kgrid.back()) continue;
      num += r[i] / k2;
      den += 1.0 / (k2 * k2);
    }
    const double a = den > 0.0 ? num / den : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double k = kgrid[i];
      const double tail = std::abs(k) < 1e-3 * lim
                              ? 2.0 * k / (3.0 * lim * lim * lim)
                              : (std::log((lim + k) / (lim - k)) / k - 2.0 / lim) / k;
      h[i] -= a * tail / kPi;
    }
  }
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double k = kgrid[i];
    double a = std::arg(i_power(n) * (k + kI)) + h[i];
    for (std::size_t l = 0; l < kappa.size(); ++l) {
      const int ord = orders.empty() ? 1 : orders[l];
      a += ord * std::arg((k - kI * kappa[l]) / (k + kI * kappa[l]));
    }
    if (virtual_order > 0) a += virtual_order * std::arg(k / (k + kI));
    out[i] = wrap(a);
  }
  return out;
}

GraphRecoveryResult recover_last_ray(const RayScatteringData& partial,
                                     const StarRecoveryOptions& options) {
  partial.validate();
  const int n = partial.n;
  if (static_cast<int>(partial.rays.size()) != n - 1)
    throw Error(ErrorKind::BadParams, "partial data must cover exactly n - 1 rays");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int j : partial.rays) {
    if (seen[static_cast<std::size_t>(j)]) throw Error(ErrorKind::BadParams, "duplicate ray index", j);
    seen[static_cast<std::size_t>(j)] = true;
  }
  const int last = static_cast<int>(std::find(seen.begin(), seen.end(), false) - seen.begin());
  const auto& kgrid = partial.kgrid;
  check_symmetric_grid(kgrid);
  const std::size_t m = kgrid.size();
  const std::size_t given = partial.rays.size();
  const Complex u_hat = 2.0 / n - 1.0;
  std::vector<int> orders = partial.orders;
  if (orders.empty()) orders.assign(partial.kappa.size(), 1);

  GraphRecoveryResult out;
  out.q_given.resize(static_cast<std::size_t>(n));

  // (1) scalar inversions of the given rays
  std::vector<RayInversion> inv(given);
  for (std::size_t r = 0; r < given; ++r) {
    std::vector<double> b(partial.kappa.size());
    for (std::size_t l = 0; l < b.size(); ++l) b[l] = partial.b[l][r];
    inv[r] = diagonal_marchenko(kgrid, partial.R[r], partial.kappa, b, u_hat, options.inverse);
    std::ostringstream prefix;
    prefix << "ray" << partial.rays[r] << ".";
    out.diagnostics.merge(inv[r].diagnostics, prefix.str());
    out.q_given[static_cast<std::size_t>(partial.rays[r])] = inv[r].q;
  }

  // (2) T = (R_i + Fbar_i/F_i) F_i^2 = 2 i^n k prod F / (n M), common to all rays
  std::vector<Complex> t(m);
  double t_spread = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    Complex sum = 0.0;
    std::vector<Complex> each(given);
    for (std::size_t r = 0; r < given; ++r) {
      each[r] = (partial.R[r][i] + inv[r].Fbar[i] / inv[r].F[i]) * inv[r].F[i] * inv[r].F[i];
      sum += each[r];
    }
    t[i] = sum / static_cast<double>(given);
    for (const auto& e : each) t_spread = std::max(t_spread, std::abs(e - t[i]));
  }
  out.diagnostics.set("t_spread", t_spread);

  // Full S in ray order; row/column `last` filled below.
  out.S_full.assign(m, CMatrix::Zero(n, n));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < given; ++a)
      for (std::size_t c = 0; c < given; ++c) {
        const int ja = partial.rays[a], jc = partial.rays[c];
        out.S_full[i](ja, jc) = a == c ? partial.R[a][i] : t[i] / (inv[a].F[i] * inv[c].F[i]);
      }

  // (3) |M| from the column norms: |S_in| = 2|k| prod_{j != n} |F_j| / (n |F_i| |M|)
  std::vector<double> modulus(m);
  for (std::size_t i = 0; i < m; ++i) {
    double prod = 1.0;
    for (std::size_t r = 0; r < given; ++r) prod *= std::abs(inv[r].F[i]);
    double acc = 0.0;
    for (std::size_t c = 0; c < given; ++c) {
      double col = 0.0;
      for (std::size_t a = 0; a < given; ++a)
        col += std::norm(out.S_full[i](partial.rays[a], partial.rays[c]));
      const double s_in = std::sqrt(std::max(1.0 - col, 1e-300));
      acc += 2.0 * std::abs(kgrid[i]) * prod / (n * std::abs(inv[c].F[i]) * s_in);
    }
    modulus[i] = acc / static_cast<double>(given);
  }

  // (4) arg M from |M| and the zeros
  const int virtual_order = zero_order_at_origin(kgrid, modulus);
  const auto arg = argument_reconstruction(kgrid, modulus, n, partial.kappa, orders, virtual_order,
                                           options.argument);
  out.M.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.M[i] = std::polar(modulus[i], arg[i]);
  {
    DispersionOptions dopt;
    dopt.virtual_error = 0.0;  // a virtual level only degrades the diagnostics here
    const auto nd = normalized_dispersion(kgrid, out.M, n, partial.kappa, orders, dopt);
    out.diagnostics.merge(nd.diagnostics, "dispersion.");
  }

  // (5) S_in = 2 i^n k prod_{j != n} F_j / (n F_i M); F_n cancels.
  std::vector<Complex> p(m);
  for (std::size_t i = 0; i < m; ++i) {
    Complex prod = 1.0;
    for (std::size_t r = 0; r < given; ++r) prod *= inv[r].F[i];
    p[i] = 2.0 * i_power(n) * kgrid[i] * prod / (static_cast<double>(n) * out.M[i]);
    for (std::size_t c = 0; c < given; ++c) {
      const Complex s = p[i] / inv[c].F[i];
      out.S_full[i](partial.rays[c], last) = s;
      out.S_full[i](last, partial.rays[c]) = s;
    }
  }

  // (6) S_nn from orthogonality of the last column to the known columns,
  // rescaled to the column norm.
  std::vector<Complex> s_nn(m);
  double worst_completion = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const CMatrix& s = out.S_full[i];
    Complex num = 0.0;
    double den = 0.0;
    for (std::size_t c = 0; c < given; ++c) {
      const int jc = partial.rays[c];
      Complex beta = 0.0;
      for (std::size_t a = 0; a < given; ++a) {
        const int ja = partial.rays[a];
        beta += std::conj(s(ja, jc)) * s(ja, last);
      }
      const Complex alpha = std::conj(s(last, jc));
      num -= std::conj(alpha) * beta;
      den += std::norm(alpha);
    }
    if (den < options.completion_threshold)
      throw Error(ErrorKind::UnitaryCompletionDegenerate,
                  "last-row entries vanish; orthogonality does not fix S_nn", kgrid[i]);
    Complex z = num / den;
    double known = 0.0;
    for (std::size_t a = 0; a < given; ++a) known += std::norm(s(partial.rays[a], last));
    const double target = std::sqrt(std::max(0.0, 1.0 - known));
    if (std::abs(z) > 0.0) z *= target / std::abs(z);
    s_nn[i] = z;
    out.S_full[i](last, last) = z;
    worst_completion = std::max(worst_completion, unitarity_defect(out.S_full[i]));
  }
  out.diagnostics.set("completion_unitarity_defect", worst_completion);

  // (7) S_nn(k) F_n(k) + F_n(-k) = P(k) at k and -k
  out.F_n.assign(m, Complex(0.0));
  std::vector<bool> solved(m, false);
  int singular = 0;
  for (std::size_t i = m / 2; i < m; ++i) {
    const std::size_t j = mirror(i, m);
    const Complex det = s_nn[i] * s_nn[j] - 1.0;
    if (std::abs(det) < options.det_threshold) {
      ++singular;
      continue;
    }
    out.F_n[i] = (p[i] * s_nn[j] - p[j]) / det;
    out.F_n[j] = (s_nn[i] * p[j] - p[i]) / det;
    solved[i] = solved[j] = true;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (solved[i]) continue;
    std::size_t lo = i, hi = i;
    while (lo > 0 && !solved[lo]) --lo;
    while (hi + 1 < m && !solved[hi]) ++hi;
    if (!solved[lo] && !solved[hi])
      throw Error(ErrorKind::SystemSingular, "F_n system singular at every node");
    if (!solved[lo]) out.F_n[i] = out.F_n[hi];
    else if (!solved[hi]) out.F_n[i] = out.F_n[lo];
    else {
      const double w = (kgrid[i] - kgrid[lo]) / (kgrid[hi] - kgrid[lo]);
      out.F_n[i] = (1.0 - w) * out.F_n[lo] + w * out.F_n[hi];
    }
  }
  out.diagnostics.set("fn_singular_nodes", singular);

  // (8) F'_n from the dispersion function
  out.Fx_n.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    Complex prod = out.F_n[i], sum = 0.0;
    for (std::size_t r = 0; r < given; ++r) {
      prod *= inv[r].F[i];
      sum += inv[r].Fx[i] / inv[r].F[i];
    }
    const Complex ratio = static_cast<double>(n) * out.M[i] / (i_power(n - 1) * prod) - sum;
    out.Fx_n[i] = out.F_n[i] * ratio;
  }

  // (9) normalisation of the last ray from continuity at the vertex,
  // b_{l,n} |F_n(i kappa)|^2 = b_{l,j} |F_j(i kappa)|^2, then its scalar inversion.
  out.b_n.assign(partial.kappa.size(), 0.0);
  for (std::size_t l = 0; l < partial.kappa.size(); ++l) {
    const Complex z = kI * partial.kappa[l];
    const double fn = std::norm(cauchy_continuation(kgrid, out.F_n, z));
    double acc = 0.0;
    int used = 0;
    CMatrix f, fx;
    for (std::size_t r = 0; r < given; ++r) {
      if (partial.b[l][r] <= 0.0) continue;
      inv[r].jost->traces(z, f, fx);
      acc += partial.b[l][r] * std::norm(f(0, 0)) / fn;
      ++used;
    }
    out.b_n[l] = used > 0 ? acc / used : 0.0;
  }
  const RayInversion last_ray = diagonal_marchenko(kgrid, s_nn, partial.kappa, out.b_n, u_hat, options.inverse);
  out.diagnostics.merge(last_ray.diagnostics, "last_ray.");
  out.q_n = last_ray.q;
  out.q_given[static_cast<std::size_t>(last)] = last_ray.q;
  return out;
}

}  // namespace halfline
