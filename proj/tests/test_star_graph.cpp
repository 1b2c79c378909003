#include "doctest.h"

#include <cmath>

#include "halfline/boundary_conditions.hpp"
#include "halfline/linalg.hpp"
#include "halfline/star_graph.hpp"

using namespace halfline;

namespace {

CMatrix all_ones(int n) { return CMatrix::Ones(n, n); }

// Star data assembled from per-ray integrations, with the bound states taken
// from the matrix problem.
ScatteringData star_data(const MatrixPotential& q, const std::vector<double>& kgrid) {
  const int n = static_cast<int>(q.channels());
  const auto bc = standard_bc(StandardKind::Kirchhoff, n);
  const auto sf = star_forward(q, kgrid, {}, 4);
  ScatteringData data;
  data.kgrid = kgrid;
  data.S = sf.S;
  data.U_hat = high_energy_limit(bc.U());
  data.bound_states = bound_states(q, bc, default_kappa_max(q, bc)).states;
  return data;
}

}  // namespace

TEST_CASE("free star scattering") {
  for (int n : {2, 3, 4}) {
    const double k = 1.7;
    const CVector f = CVector::Ones(n);
    const CVector fx = CVector::Constant(n, kI * k);
    const auto g = graph_scattering(f, fx, f, k);
    CHECK(std::abs(g.M - std::pow(kI, n) * k) <= 1e-14);
    CHECK((g.S - (2.0 / n * all_ones(n) - CMatrix::Identity(n, n))).norm() <= 1e-14);
  }
}

TEST_CASE("zero Jost trace is rejected") {
  CVector f = CVector::Ones(3);
  f(1) = 0.0;
  CHECK_THROWS_AS(graph_scattering(f, f, f, 1.0), Error);
}

TEST_CASE("per-ray assembly agrees with the matrix integrator") {
  const auto q = MatrixPotential::uniform(3, 2.0, 1e-3, [](double x) {
    CMatrix m = CMatrix::Zero(3, 3);
    m(0, 0) = -2.0 * std::exp(-4 * (x - 0.7) * (x - 0.7));
    m(1, 1) = 1.5 * std::exp(-x);
    m(2, 2) = -1.0 * std::cos(2 * x);
    return m;
  });
  const auto bc = standard_bc(StandardKind::Kirchhoff, 3);
  const auto kgrid = symmetric_kgrid(8.0, 20);
  const auto data = scattering_pipeline(q, bc, kgrid, default_kappa_max(q, bc));
  const auto sf = star_forward(q, kgrid);
  double worst = 0;
  for (std::size_t i = 0; i < kgrid.size(); ++i) {
    worst = std::max(worst, (sf.S[i] - data.S[i]).norm());
    worst = std::max(worst, unitarity_defect(sf.S[i]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("hilbert phase of an outer function") {
  // (k+i)/(k+2i) is analytic and zero-free for Im k > 0 and tends to 1.
  const auto kgrid = symmetric_kgrid(400.0, 8000);
  std::vector<double> f(kgrid.size());
  for (std::size_t i = 0; i < kgrid.size(); ++i)
    f[i] = std::log(std::abs((kgrid[i] + kI) / (kgrid[i] + 2.0 * kI)));
  const auto h = hilbert_phase(kgrid, f);
  double err = 0;
  for (std::size_t i = 0; i < kgrid.size(); ++i)
    if (std::abs(kgrid[i]) <= 5.0)
      err = std::max(err, std::abs(h[i] - std::arg((kgrid[i] + kI) / (kgrid[i] + 2.0 * kI))));
  CHECK(err <= 1e-4);
}

TEST_CASE("argument of the free dispersion function") {
  const auto kgrid = symmetric_kgrid(20.0, 400);
  std::vector<double> modulus(kgrid.size());
  for (std::size_t i = 0; i < kgrid.size(); ++i) modulus[i] = std::abs(kgrid[i]);
  CHECK(zero_order_at_origin(kgrid, modulus) == 1);
  const auto a = argument_reconstruction(kgrid, modulus, 3, {}, {}, 1);
  double err = 0;
  for (std::size_t i = 0; i < kgrid.size(); ++i)
    err = std::max(err, std::abs(std::remainder(a[i] - std::arg(-kI * kgrid[i]), 2 * kPi)));
  CHECK(err <= 1e-10);

  std::vector<Complex> m(kgrid.size());
  for (std::size_t i = 0; i < kgrid.size(); ++i) m[i] = -kI * kgrid[i];
  const auto nd = normalized_dispersion(kgrid, m, 3, {}, {});
  CHECK(nd.virtual_order == 1);
  CHECK_FALSE(nd.diagnostics.warnings.empty());
  DispersionOptions strict;
  strict.virtual_error = 0.1;
  CHECK_THROWS_AS(normalized_dispersion(kgrid, m, 3, {}, {}, strict), Error);
}

TEST_CASE("undecayed modulus is rejected") {
  const auto kgrid = symmetric_kgrid(10.0, 100);
  std::vector<double> modulus(kgrid.size());
  for (std::size_t i = 0; i < kgrid.size(); ++i) modulus[i] = 2.0 * std::hypot(kgrid[i], 1.0);
  CHECK_THROWS_AS(argument_reconstruction(kgrid, modulus, 3, {}, {}, 0), Error);
}

TEST_CASE("free star recovers a free last ray") {
  const auto q = MatrixPotential::zero(3, 2.0, 10);
  const auto kgrid = symmetric_kgrid(20.0, 200);
  const auto part = partial_data(star_data(q, kgrid), {0, 2});
  StarRecoveryOptions opt;
  opt.inverse.g.t_max = 3.0;
  const auto r = recover_last_ray(part, opt);
  CHECK(r.q_n.sup_norm() <= 1e-6);
  double err = 0;
  for (std::size_t i = 0; i < kgrid.size(); ++i) err = std::max(err, std::abs(r.F_n[i] - 1.0));
  CHECK(err <= 1e-6);
}

TEST_CASE("last ray of a star with a bound state") {
  const double x_max = 3.0;
  const auto q = MatrixPotential::uniform(3, x_max, 1e-3, [](double x) {
    CMatrix m = CMatrix::Zero(3, 3);
    const double u = (x - 1.2) / 0.5;
    m(2, 2) = -4.0 * std::exp(-u * u);
    return m;
  });
  const auto kgrid = symmetric_kgrid(25.0, 500);
  const auto data = star_data(q, kgrid);
  REQUIRE(data.bound_states.size() == 1);
  StarRecoveryOptions opt;
  opt.inverse.g.t_max = 1.5 * x_max;
  opt.inverse.x_end = x_max;
  opt.inverse.threads = 4;
  const auto r = recover_last_ray(partial_data(data, {0, 1}), opt);
  double err = 0;
  for (std::size_t i = 0; i < r.q_n.grid().size(); ++i) {
    const double x = r.q_n.grid()[i];
    if (x <= 0.8 * x_max) err = std::max(err, std::abs(r.q_n.values()[i](0, 0) - q(x)(2, 2)));
  }
  CHECK(err <= 1e-2);
  CHECK(r.b_n[0] == doctest::Approx(data.bound_states[0].C2(2, 2).real()).epsilon(1e-2));
}
