#include "doctest.h"

#include <cmath>

#include "halfline/linalg.hpp"
#include "halfline/marchenko.hpp"

using namespace halfline;

namespace {

GKernel exponential_kernel(const CMatrix& m, double kappa, double t_end) {
  return GKernel::from_function(
      m.rows(), t_end, 0.005, [&](double t) { return CMatrix(m * std::exp(-kappa * t)); },
      [&](double t) { return CMatrix(-kappa * m * std::exp(-kappa * t)); });
}

// One-bound-state closed form K(x,y) = -C2 e^{-kappa(x+y)} / (1 + C2/(2 kappa) e^{-2 kappa x}).
double separable_k(double c2, double kappa, double x, double y) {
  return -c2 * std::exp(-kappa * (x + y)) / (1.0 + c2 / (2 * kappa) * std::exp(-2 * kappa * x));
}

}  // namespace

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const auto r = gauss_legendre(10);
  double s0 = 0, s18 = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    s0 += r.weights[i];
    s18 += r.weights[i] * std::pow(r.nodes[i], 18);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s18 == doctest::Approx(2.0 / 19).epsilon(1e-13));
  const auto c = composite_gauss(0.5, 3.0, 0.25, 6);
  double e = 0;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) e += c.weights[i] * std::exp(c.nodes[i]);
  CHECK(e == doctest::Approx(std::exp(3.0) - std::exp(0.5)).epsilon(1e-13));
}

TEST_CASE("zero kernel gives zero transform") {
  const auto g = exponential_kernel(CMatrix::Zero(2, 2), 1.0, 8.0);
  const auto s = solve_marchenko(g, 0.3, 4.0);
  for (const auto& k : s.K) CHECK(k.norm() == 0.0);
}

TEST_CASE("scalar separable kernel on 200 nodes") {
  const double c2 = 2.0, kappa = 1.0, t_max = 14.0;
  const auto g = exponential_kernel(CMatrix::Constant(1, 1, c2), kappa, 2 * t_max);
  for (double x : {0.0, 0.4, 1.5, 3.0}) {
    const auto rule = composite_gauss(x, t_max, (t_max - x) / 20, 10);
    REQUIRE(rule.nodes.size() == 200);
    const auto s = solve_marchenko(g, x, rule);
    double err = 0;
    for (std::size_t j = 0; j < s.nodes.size(); ++j)
      err = std::max(err, std::abs(s.K[j](0, 0) - separable_k(c2, kappa, x, s.nodes[j])));
    CHECK(err <= 1e-8);
    CHECK(std::abs(s.at(g, x)(0, 0) - separable_k(c2, kappa, x, x)) <= 1e-8);
  }
}

TEST_CASE("matrix separable kernel") {
  CMatrix b(2, 2);
  b << 0.8, Complex(0.3, -0.2), Complex(-0.1, 0.4), 0.5;
  const CMatrix m = b * b.adjoint();
  const double t_max = 14.0;
  const auto g = exponential_kernel(m, 1.0, 2 * t_max);
  const CMatrix id = CMatrix::Identity(2, 2);
  for (double x : {0.0, 0.7, 2.0}) {
    const auto s = solve_marchenko(g, x, t_max);
    const CMatrix inv = (id + 0.5 * std::exp(-2 * x) * m).inverse();
    double err = 0;
    for (std::size_t j = 0; j < s.nodes.size(); ++j) {
      const CMatrix expect = -std::exp(-(x + s.nodes[j])) * inv * m;
      err = std::max(err, (s.K[j] - expect).norm());
    }
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("potential from the one-bound-state kernel") {
  // K(x,x) = -2 e^{-2x} / (1 + e^{-2x}) -> Q = -2 d/dx K(x,x) = -2 sech^2 x
  const double t_max = 14.0;
  const auto g = exponential_kernel(CMatrix::Constant(1, 1, 2.0), 1.0, 2 * t_max);
  std::vector<double> xs;
  for (int i = 0; i <= 150; ++i) xs.push_back(0.02 * i);
  const auto tk = transform_kernel(g, xs, t_max);
  const auto q = recover_potential(tk);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double c = std::cosh(xs[i]);
    CHECK(std::abs(q.values()[i](0, 0) + 2.0 / (c * c)) <= 1e-5);
  }
}

TEST_CASE("kernel jost traces match the forward integrator") {
  // Reflectionless sech^2 potential with one bound state.
  const double t_max = 14.0;
  const auto g = exponential_kernel(CMatrix::Constant(1, 1, 2.0), 1.0, 2 * t_max);
  const KernelJost kj(g, t_max, {});
  const auto q = MatrixPotential::uniform(1, t_max, 1e-3, [](double x) {
    const double c = std::cosh(x);
    return CMatrix::Constant(1, 1, -2.0 / (c * c));
  });
  for (double k : {0.5, 1.0, 3.0}) {
    const auto from_kernel = reconstruct_jost_from_kernel(kj, k);
    const auto direct = compute_jost(q, k, JostSign::Plus);
    CHECK(std::abs(from_kernel.F_plus(0, 0) - direct.F_plus(0, 0)) <= 1e-4);
    CHECK(std::abs(from_kernel.Fx_plus(0, 0) - direct.Fx_plus(0, 0)) <= 1e-4);
  }
}

TEST_CASE("free data inverts to zero with the right boundary condition") {
  const auto q = MatrixPotential::zero(1, 2.0, 10);
  for (auto kind : {StandardKind::Dirichlet, StandardKind::Neumann}) {
    const auto bc = standard_bc(kind, 1);
    const auto data = scattering_pipeline(q, bc, symmetric_kgrid(20.0, 200), 0.0);
    InverseOptions opt;
    opt.g.t_max = 3.0;
    const auto r = invert(data, opt);
    CHECK(r.Q_hat.sup_norm() <= 1e-10);
    CHECK((r.U_recovered - bc.U()).norm() <= 1e-10);
  }
}

TEST_CASE("truncated data is rejected") {
  // Robin data decays like 1/k; without the tail model the end value is large.
  const auto q = MatrixPotential::zero(1, 1.0, 4);
  const auto bc = standard_bc(StandardKind::Robin, 1, {1.0});
  const auto data = scattering_pipeline(q, bc, symmetric_kgrid(10.0, 100), 0.0);
  GOptions opt;
  opt.t_max = 2.0;
  opt.tail_terms = 0;
  CHECK_THROWS_AS(build_g(data, opt), Error);
  opt.tail_terms = 3;
  CHECK_NOTHROW(build_g(data, opt));
}

TEST_CASE("scalar round trip with a bound state") {
  const double x_max = 4.0;
  const auto q = MatrixPotential::uniform(1, x_max, 1e-3, [](double x) {
    const double u = (x - 1.5) / 0.5;
    return CMatrix::Constant(1, 1, -3.0 * std::exp(-u * u));
  });
  const auto bc = standard_bc(StandardKind::Robin, 1, {0.7});
  const auto data = scattering_pipeline(q, bc, symmetric_kgrid(30.0, 600), default_kappa_max(q, bc));
  REQUIRE(data.bound_states.size() == 1);
  InverseOptions opt;
  opt.g.t_max = 1.5 * x_max;
  opt.x_end = x_max;
  const auto r = invert(data, opt);
  double err = 0;
  for (std::size_t i = 0; i < r.Q_hat.grid().size(); ++i) {
    const double x = r.Q_hat.grid()[i];
    if (x <= 0.8 * x_max) err = std::max(err, std::abs(r.Q_hat.values()[i](0, 0) - q(x)(0, 0)));
  }
  CHECK(err <= 5e-3);
  CHECK((r.U_recovered - bc.U()).norm() <= 1e-3);
}
