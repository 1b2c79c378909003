#include "halfline/marchenko.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "halfline/boundary_conditions.hpp"
#include "halfline/finite_difference.hpp"
#include "halfline/linalg.hpp"
#include "halfline/parallel.hpp"

namespace halfline {

GKernel::GKernel(double dt, std::vector<CMatrix> g, std::vector<CMatrix> dg)
    : dt_(dt), g_(std::move(g)), dg_(std::move(dg)) {
  if (!(dt_ > 0.0) || g_.size() < 2 || g_.size() != dg_.size())
    throw Error(ErrorKind::ShapeMismatch, "G kernel needs dt > 0 and matching samples");
}

GKernel GKernel::from_function(Eigen::Index n, double t_end, double dt,
                               const std::function<CMatrix(double)>& g,
                               const std::function<CMatrix(double)>& dg) {
  const auto count = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9)) + 1;
  const double h = t_end / static_cast<double>(count - 1);
  std::vector<CMatrix> v(count), d(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = h * static_cast<double>(i);
    v[i] = g(t);
    d[i] = dg(t);
    if (v[i].rows() != n || d[i].rows() != n)
      throw Error(ErrorKind::ShapeMismatch, "G samples have the wrong size");
  }
  return GKernel(h, std::move(v), std::move(d));
}

void GKernel::evaluate(double t, CMatrix& out) const {
  const double s_all = t / dt_;
  if (t < 0.0 || s_all > static_cast<double>(g_.size() - 1)) {
    out.setZero();
    return;
  }
  auto i = static_cast<std::size_t>(s_all);
  if (i >= g_.size() - 1) i = g_.size() - 2;
  const double s = s_all - static_cast<double>(i);
  const double s2 = s * s;
  const double s3 = s2 * s;
  out.noalias() = (2 * s3 - 3 * s2 + 1) * g_[i];
  out.noalias() += ((s3 - 2 * s2 + s) * dt_) * dg_[i];
  out.noalias() += (-2 * s3 + 3 * s2) * g_[i + 1];
  out.noalias() += ((s3 - s2) * dt_) * dg_[i + 1];
}

CMatrix GKernel::operator()(double t) const {
  CMatrix out(channels(), channels());
  evaluate(t, out);
  return out;
}

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

// Checks that the grid is k_j = (j - N/2 + 1/2) dk and returns dk.
double midpoint_spacing(const std::vector<double>& kgrid) {
  const std::size_t m = kgrid.size();
  if (m < 4 || m % 2 != 0)
    throw Error(ErrorKind::BadParams, "k-grid must have an even number (>= 4) of nodes");
  const double dk = (kgrid.back() - kgrid.front()) / static_cast<double>(m - 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double expect = (static_cast<double>(i) - 0.5 * static_cast<double>(m - 1)) * dk;
    if (std::abs(kgrid[i] - expect) > 1e-9 * dk * static_cast<double>(m))
      throw Error(ErrorKind::BadParams, "k-grid must be uniform and symmetric about 0", kgrid[i]);
  }
  return dk;
}

}  // namespace

GKernel build_g(const ScatteringData& data, const GOptions& options, Diagnostics* diagnostics) {
  if (!(options.t_max > 0.0)) throw Error(ErrorKind::BadParams, "t_max must be > 0", options.t_max);
  const Eigen::Index n = data.channels();
  const std::size_t nk = data.kgrid.size();
  if (data.S.size() != nk) throw Error(ErrorKind::ShapeMismatch, "one S sample per k node required");
  const double dk = midpoint_spacing(data.kgrid);
  const double k_end = data.kgrid.back();

  // Tail model per entry, fitted on |k| >= fraction * k_end; coarse grids get
  // fewer terms (at least four nodes per term).
  std::vector<std::size_t> fit;
  for (std::size_t j = 0; j < nk; ++j)
    if (std::abs(data.kgrid[j]) >= options.tail_fit_fraction * k_end) fit.push_back(j);
  const int p = std::min(std::max(0, options.tail_terms), static_cast<int>(fit.size() / 4));
  if (diagnostics) diagnostics->set("g_tail_terms", p);
  CMatrix basis(static_cast<Eigen::Index>(fit.size()), p);
  for (std::size_t r = 0; r < fit.size(); ++r) {
    const Complex z = 1.0 / (1.0 + kI * data.kgrid[fit[r]]);
    Complex zm = z;
    for (int m = 0; m < p; ++m, zm *= z) basis(static_cast<Eigen::Index>(r), m) = zm;
  }
  Eigen::ColPivHouseholderQR<CMatrix> qr;
  if (p > 0) qr.compute(basis);

  const std::size_t entries = static_cast<std::size_t>(n * n);
  std::vector<std::vector<Complex>> residual(entries, std::vector<Complex>(nk));
  std::vector<CVector> coeff(entries);
  double tail_left = 0.0, tail_right = 0.0, raw_end = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t e = static_cast<std::size_t>(r * n + c);
      auto& res = residual[e];
      for (std::size_t j = 0; j < nk; ++j) res[j] = data.S[j](r, c) - data.U_hat(r, c);
      raw_end = std::max(raw_end, std::max(std::abs(res.front()), std::abs(res.back())));
      coeff[e] = CVector::Zero(p);
      if (p > 0) {
        CVector rhs(static_cast<Eigen::Index>(fit.size()));
        for (std::size_t q = 0; q < fit.size(); ++q) rhs(static_cast<Eigen::Index>(q)) = res[fit[q]];
        coeff[e] = qr.solve(rhs);
        for (std::size_t j = 0; j < nk; ++j) {
          const Complex z = 1.0 / (1.0 + kI * data.kgrid[j]);
          Complex zm = z, model = 0.0;
          for (int m = 0; m < p; ++m, zm *= z) model += coeff[e](m) * zm;
          res[j] -= model;
        }
      }
      tail_left += std::norm(res.front());
      tail_right += std::norm(res.back());
    }
  }
  const double tail = std::sqrt(std::max(tail_left, tail_right));
  if (diagnostics) {
    diagnostics->set("g_tail_raw", raw_end);
    diagnostics->set("g_tail_residual", tail);
  }
  if (!(tail <= options.tail_bound)) {
    std::ostringstream msg;
    msg << "||S - U_hat|| after the tail model is " << tail << " at |k| = " << k_end
        << " (bound " << options.tail_bound << "); extend the k-grid";
    throw Error(ErrorKind::TailTooLarge, msg.str(), tail);
  }

  const auto count = static_cast<std::size_t>(std::ceil(2.0 * options.t_max / options.dt - 1e-9)) + 1;
  const double dt = 2.0 * options.t_max / static_cast<double>(count - 1);
  std::vector<CMatrix> g(count, CMatrix::Zero(n, n)), dg(count, CMatrix::Zero(n, n));
  const double scale = dk / (2.0 * kPi);

  parallel_for(count, options.threads, [&](std::size_t i) {
    const double t = dt * static_cast<double>(i);
    std::vector<Complex> acc(entries, 0.0), dacc(entries, 0.0);
    for (std::size_t j = 0; j < nk; ++j) {
      const double k = data.kgrid[j];
      const Complex phase = std::polar(scale, k * t);
      const Complex dphase = (kI * k) * phase;
      for (std::size_t e = 0; e < entries; ++e) {
        acc[e] += residual[e][j] * phase;
        dacc[e] += residual[e][j] * dphase;
      }
    }
    const double et = std::exp(-t);
    for (std::size_t e = 0; e < entries; ++e) {
      Complex v = acc[e], d = dacc[e];
      for (int m = 1; m <= p; ++m) {
        const double f = std::pow(t, m - 1) * et / factorial(m - 1);
        const double df = (m > 1 ? (m - 1) * std::pow(t, m - 2) * et / factorial(m - 1) : 0.0) - f;
        v += coeff[e](m - 1) * f;
        d += coeff[e](m - 1) * df;
      }
      const auto r = static_cast<Eigen::Index>(e) / n;
      const auto c = static_cast<Eigen::Index>(e) % n;
      for (const auto& bs : data.bound_states) {
        const double decay = std::exp(-bs.kappa * t);
        v += bs.C2(r, c) * decay;
        d += -bs.kappa * bs.C2(r, c) * decay;
      }
      g[i](r, c) = v;
      dg[i](r, c) = d;
    }
  });

  double asym = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    asym = std::max(asym, hermiticity_defect(g[i]));
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = r; c < n; ++c) {
        const Complex a = 0.5 * (g[i](r, c) + std::conj(g[i](c, r)));
        const Complex b = 0.5 * (dg[i](r, c) + std::conj(dg[i](c, r)));
        g[i](r, c) = a;
        g[i](c, r) = std::conj(a);
        dg[i](r, c) = b;
        dg[i](c, r) = std::conj(b);
      }
  }
  if (diagnostics) {
    diagnostics->set("g_hermiticity_defect", asym);
    diagnostics->set("g_at_t_end", g.back().norm());
  }
  return GKernel(dt, std::move(g), std::move(dg));
}

CMatrix KernelSlice::at(const GKernel& g, double y) const {
  const Eigen::Index n = g.channels();
  CMatrix gv(n, n);
  g.evaluate(x + y, gv);
  CMatrix out = -gv;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    g.evaluate(nodes[j] + y, gv);
    out.noalias() -= weights[j] * K[j] * gv;
  }
  return out;
}

KernelSlice solve_marchenko(const GKernel& g, double x, const QuadratureRule& rule,
                            double max_condition) {
  const Eigen::Index n = g.channels();
  const std::size_t m = rule.nodes.size();
  KernelSlice slice;
  slice.x = x;
  slice.nodes = rule.nodes;
  slice.weights = rule.weights;
  if (m == 0) return slice;
  const Eigen::Index size = n * static_cast<Eigen::Index>(m);

  // Row-block unknown X = [K_1 ... K_m] solves X A = -b with
  // A_(j,i) = delta_ji I + w_j G(t_j + t_i), b_i = G(x + t_i). Solved transposed.
  CMatrix at(size, size);
  CMatrix rhs(size, n);
  CMatrix gv(n, n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      g.evaluate(rule.nodes[j] + rule.nodes[i], gv);
      CMatrix block = rule.weights[j] * gv;
      if (i == j) block += CMatrix::Identity(n, n);
      at.block(static_cast<Eigen::Index>(i) * n, static_cast<Eigen::Index>(j) * n, n, n) =
          block.transpose();
    }
    g.evaluate(x + rule.nodes[j], gv);
    rhs.middleRows(static_cast<Eigen::Index>(j) * n, n) = -gv.transpose();
  }
  Eigen::PartialPivLU<CMatrix> lu(at);
  const double rcond = lu.rcond();
  slice.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(slice.condition <= max_condition)) {
    std::ostringstream msg;
    msg << "Nystrom matrix condition " << slice.condition << " at x = " << x;
    throw Error(ErrorKind::IllConditioned, msg.str(), slice.condition);
  }
  const CMatrix sol = lu.solve(rhs);
  const double rnorm = rhs.norm();
  slice.residual = rnorm > 0.0 ? (at * sol - rhs).norm() / rnorm : (at * sol - rhs).norm();
  slice.K.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    slice.K[j] = sol.middleRows(static_cast<Eigen::Index>(j) * n, n).transpose();
  return slice;
}

KernelSlice solve_marchenko(const GKernel& g, double x, double t_max,
                            const NystromOptions& options) {
  if (2.0 * t_max > g.t_end() + 1e-9)
    throw Error(ErrorKind::BadParams, "G must be available on [0, 2 t_max]", t_max);
  return solve_marchenko(g, x, composite_gauss(x, t_max, options.panel_width, options.order),
                         options.max_condition);
}

TransformKernel transform_kernel(const GKernel& g, const std::vector<double>& xgrid,
                                 double t_max, const NystromOptions& options, int threads) {
  TransformKernel tk;
  tk.xgrid = xgrid;
  const std::size_t m = xgrid.size();
  tk.diagonal.resize(m);
  tk.residual.resize(m);
  tk.condition.resize(m);
  parallel_for(m, threads, [&](std::size_t i) {
    const double x = xgrid[i];
    if (x >= t_max) {
      tk.diagonal[i] = CMatrix::Zero(g.channels(), g.channels());
      tk.residual[i] = 0.0;
      tk.condition[i] = 1.0;
      return;
    }
    const KernelSlice s = solve_marchenko(g, x, t_max, options);
    tk.diagonal[i] = s.at(g, x);
    tk.residual[i] = s.residual;
    tk.condition[i] = s.condition;
  });
  return tk;
}

MatrixPotential recover_potential(const TransformKernel& k, Diagnostics* diagnostics) {
  const auto d = differentiate(k.xgrid, k.diagonal, 3);
  std::vector<CMatrix> q(d.size());
  double asym = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const CMatrix raw = -2.0 * d[i];
    asym = std::max(asym, hermiticity_defect(raw));
    q[i] = hermitian_part(raw);
  }
  if (diagnostics) diagnostics->set("q_hat_asymmetry", asym);
  return MatrixPotential(k.xgrid, std::move(q));
}

KernelJost::KernelJost(const GKernel& g, double t_max, const NystromOptions& options,
                       double delta)
    : n_(g.channels()) {
  constexpr int kSlices = 4;
  const double reach = t_max - (kSlices - 1) * delta;
  if (!(reach > 0.0)) throw Error(ErrorKind::BadParams, "t_max too small for the kernel traces");
  s_rule_ = composite_gauss(0.0, reach, options.panel_width, options.order);
  std::vector<double> xs(kSlices);
  for (int i = 0; i < kSlices; ++i) xs[static_cast<std::size_t>(i)] = i * delta;
  const auto w = derivative_weights(0.0, xs);
  std::vector<KernelSlice> slices;
  for (double x : xs) slices.push_back(solve_marchenko(g, x, t_max, options));
  const std::size_t m = s_rule_.nodes.size();
  l0_.resize(m);
  lx_.resize(m);
  for (std::size_t q = 0; q < m; ++q) {
    const double s = s_rule_.nodes[q];
    CMatrix dl = CMatrix::Zero(n_, n_);
    for (int i = 0; i < kSlices; ++i) {
      const CMatrix l = slices[static_cast<std::size_t>(i)].at(g, xs[static_cast<std::size_t>(i)] + s);
      if (i == 0) l0_[q] = l;
      dl += w[static_cast<std::size_t>(i)] * l;
    }
    lx_[q] = dl;
  }
}

void KernelJost::traces(Complex k, CMatrix& f, CMatrix& fx) const {
  f = CMatrix::Identity(n_, n_);
  CMatrix integral = CMatrix::Zero(n_, n_);
  for (std::size_t q = 0; q < s_rule_.nodes.size(); ++q) {
    const Complex e = s_rule_.weights[q] * std::exp(kI * k * s_rule_.nodes[q]);
    f += e * l0_[q];
    integral += e * lx_[q];
  }
  fx = (kI * k) * f + integral;
}

JostFunctions reconstruct_jost_from_kernel(const KernelJost& kernel, double k) {
  JostFunctions jf;
  jf.k = k;
  kernel.traces(k, jf.F_plus, jf.Fx_plus);
  kernel.traces(-k, jf.F_minus, jf.Fx_minus);
  jf.has_plus = jf.has_minus = true;
  return jf;
}

CMatrix recover_boundary_conditions(const ScatteringData& data, const KernelJost& kernel,
                                    const std::vector<double>& wavenumbers,
                                    Diagnostics* diagnostics) {
  std::vector<std::size_t> picked;
  for (double w : wavenumbers) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < data.kgrid.size(); ++j)
      if (std::abs(data.kgrid[j] - w) < std::abs(data.kgrid[best] - w)) best = j;
    if (std::find(picked.begin(), picked.end(), best) == picked.end()) picked.push_back(best);
  }
  std::vector<CMatrix> us;
  for (std::size_t j : picked) {
    const double k = data.kgrid[j];
    const JostFunctions jf = reconstruct_jost_from_kernel(kernel, k);
    const CMatrix psi = jf.F_minus + jf.F_plus * data.S[j];
    const CMatrix psix = jf.Fx_minus + jf.Fx_plus * data.S[j];
    const CMatrix den = psi + kI * psix;
    if (!(condition_number(den) <= 1e12)) continue;
    us.push_back((psi - kI * psix) * den.inverse());
  }
  if (us.empty())
    throw Error(ErrorKind::NonInvertibleTrace, "Psi + i Psi_x is singular at every chosen node");
  CMatrix mean = CMatrix::Zero(us.front().rows(), us.front().cols());
  for (const auto& u : us) mean += u;
  mean /= static_cast<double>(us.size());
  const CMatrix u = polar_unitary(mean);
  double spread = 0.0;
  for (const auto& v : us) spread = std::max(spread, (v - u).norm());
  if (diagnostics) {
    diagnostics->set("u_spread", spread);
    if (spread > 1e-2) {
      std::ostringstream msg;
      msg << "ConsistencyWarning: boundary unitary varies by " << spread << " across k nodes";
      diagnostics->warn(msg.str());
    }
  }
  return u;
}

bool is_diagonal_data(const ScatteringData& data) {
  auto diag = [](const CMatrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (r != c && m(r, c) != 0.0) return false;
    return true;
  };
  if (!diag(data.U_hat)) return false;
  for (const auto& s : data.S)
    if (!diag(s)) return false;
  for (const auto& b : data.bound_states)
    if (!diag(b.C2)) return false;
  return true;
}

ScatteringData channel_data(const ScatteringData& data, Eigen::Index j) {
  ScatteringData out;
  out.kgrid = data.kgrid;
  out.U_hat = CMatrix::Constant(1, 1, data.U_hat(j, j));
  out.S.reserve(data.S.size());
  for (const auto& s : data.S) out.S.push_back(CMatrix::Constant(1, 1, s(j, j)));
  for (const auto& b : data.bound_states) {
    if (b.C2(j, j) == 0.0) continue;
    BoundState bs;
    bs.kappa = b.kappa;
    bs.order = 1;
    bs.C2 = CMatrix::Constant(1, 1, b.C2(j, j));
    out.bound_states.push_back(bs);
  }
  return out;
}

InverseResult invert(const ScatteringData& data, const InverseOptions& options) {
  const Eigen::Index n = data.channels();
  const double t_max = options.g.t_max;
  if (!(t_max > 0.0)) throw Error(ErrorKind::BadParams, "t_max must be > 0", t_max);
  const double x_end = options.x_end > 0.0 ? std::min(options.x_end, t_max) : t_max;

  InverseResult result;
  if (options.split_diagonal && n > 1 && is_diagonal_data(data)) {
    std::vector<InverseResult> parts;
    for (Eigen::Index j = 0; j < n; ++j) {
      parts.push_back(invert(channel_data(data, j), options));
      std::ostringstream prefix;
      prefix << "channel" << j << ".";
      result.diagnostics.merge(parts.back().diagnostics, prefix.str());
    }
    const auto& grid = parts.front().Q_hat.grid();
    std::vector<CMatrix> q(grid.size(), CMatrix::Zero(n, n));
    result.kernel.xgrid = parts.front().kernel.xgrid;
    result.kernel.diagonal.assign(grid.size(), CMatrix::Zero(n, n));
    result.kernel.residual.assign(grid.size(), 0.0);
    result.kernel.condition.assign(grid.size(), 0.0);
    result.U_recovered = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& part = parts[static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < grid.size(); ++i) {
        q[i](j, j) = part.Q_hat.values()[i](0, 0);
        result.kernel.diagonal[i](j, j) = part.kernel.diagonal[i](0, 0);
        result.kernel.residual[i] = std::max(result.kernel.residual[i], part.kernel.residual[i]);
        result.kernel.condition[i] = std::max(result.kernel.condition[i], part.kernel.condition[i]);
      }
      result.U_recovered(j, j) = part.U_recovered(0, 0);
    }
    result.Q_hat = MatrixPotential(grid, std::move(q));
    result.U_hat_recovered = high_energy_limit(result.U_recovered);
    return result;
  }

  const GKernel g = build_g(data, options.g, &result.diagnostics);
  const auto steps = std::max(7, static_cast<int>(std::lround(x_end / options.x_step)));
  std::vector<double> xgrid(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) xgrid[static_cast<std::size_t>(i)] = x_end * i / steps;
  result.kernel = transform_kernel(g, xgrid, t_max, options.nystrom, options.threads);
  result.diagnostics.set("nystrom_max_residual",
                         *std::max_element(result.kernel.residual.begin(), result.kernel.residual.end()));
  result.diagnostics.set("nystrom_max_condition",
                         *std::max_element(result.kernel.condition.begin(), result.kernel.condition.end()));
  result.Q_hat = recover_potential(result.kernel, &result.diagnostics);

  const KernelJost kj(g, t_max, options.nystrom, options.jost_delta);
  result.U_recovered = recover_boundary_conditions(data, kj, options.u_wavenumbers, &result.diagnostics);
  result.diagnostics.set("u_unitarity_defect", unitarity_defect(result.U_recovered));
  result.U_hat_recovered = high_energy_limit(result.U_recovered);
  return result;
}

}  // namespace halfline
