#include "doctest.h"

#include <cmath>

#include "halfline/darboux.hpp"
#include "halfline/linalg.hpp"

using namespace halfline;

namespace {

MatrixPotential free_potential(int n, double x_max) {
  return MatrixPotential::zero(n, x_max, static_cast<int>(std::lround(x_max / 1e-3)));
}

CMatrix scalar(Complex z) { return CMatrix::Constant(1, 1, z); }

TestFunction scalar_test(std::function<double(double)> f, std::function<double(double)> df,
                         std::function<double(double)> d2f) {
  return {[=](double x) { return CVector::Constant(1, f(x)); },
          [=](double x) { return CVector::Constant(1, df(x)); },
          [=](double x) { return CVector::Constant(1, d2f(x)); }};
}

// Lowest eigenvalue of -y'' + q y = lambda y on [0, L] with y(0) = a, y'(0) = b
// and a0 y(L) + a1 y'(L) = 0 (classical RK4 shooting plus bisection).
double shoot(std::function<double(double)> q, double len, double a, double b,
             std::function<double(double, double, double)> end, double lo, double hi) {
  auto miss = [&](double lam) {
    const int steps = 4000;
    const double h = len / steps;
    double y = a, yp = b, x = 0.0;
    auto f = [&](double xx, double yy) { return (q(xx) - lam) * yy; };
    for (int i = 0; i < steps; ++i) {
      const double k1y = yp, k1p = f(x, y);
      const double k2y = yp + 0.5 * h * k1p, k2p = f(x + 0.5 * h, y + 0.5 * h * k1y);
      const double k3y = yp + 0.5 * h * k2p, k3p = f(x + 0.5 * h, y + 0.5 * h * k2y);
      const double k4y = yp + h * k3p, k4p = f(x + h, y + h * k3y);
      y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
      yp += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
      x += h;
    }
    return end(len, y, yp);
  };
  // first sign change on a coarse scan, then bisection
  const int scan = 400;
  double prev = miss(lo), left = lo;
  for (int i = 1; i <= scan; ++i) {
    const double lam = lo + (hi - lo) * i / scan;
    const double cur = miss(lam);
    if ((prev < 0) != (cur < 0)) {
      double l = left, r = lam, fl = prev;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (l + r);
        const double fm = miss(mid);
        if ((fm < 0) == (fl < 0)) {
          l = mid;
          fl = fm;
        } else {
          r = mid;
        }
      }
      return 0.5 * (l + r);
    }
    prev = cur;
    left = lam;
  }
  return std::nan("");
}

}  // namespace

TEST_CASE("choose_U0") {
  const auto dir = standard_bc(StandardKind::Dirichlet, 1);
  CHECK((choose_U0(dir, CMatrix::Identity(1, 1)) - CMatrix::Identity(1, 1)).norm() == 0.0);
  const auto neu = standard_bc(StandardKind::Neumann, 2);
  CHECK((choose_U0(neu) - CMatrix::Identity(2, 2)).norm() == 0.0);

  CMatrix u = CMatrix::Zero(2, 2);
  u(0, 0) = kI;
  u(1, 1) = -1.0;
  CMatrix o = CMatrix::Zero(2, 2);
  o(0, 0) = kI;
  o(1, 1) = 1.0;
  CHECK_NOTHROW(choose_U0(make_bc(u), o));
  CHECK_THROWS_AS(choose_U0(neu, CMatrix(-CMatrix::Identity(2, 2))), Error);
}

TEST_CASE("free frames") {
  const auto q = free_potential(2, 1.0);
  const auto id = CMatrix::Identity(2, 2);
  const auto f1 = zero_energy_frame(q, id);
  for (std::size_t i = 0; i < f1.grid.size(); i += 100) {
    CHECK((f1.Xi0[i] - id).norm() < 1e-14);
    CHECK(f1.Xi0x[i].norm() < 1e-14);
  }
  const auto f2 = zero_energy_frame(q, -id);
  for (std::size_t i = 0; i < f2.grid.size(); i += 100) {
    CHECK((f2.Xi0[i] + kI * f2.grid[i] * id).norm() < 1e-12);
    CHECK((f2.Xi0x[i] + kI * id).norm() < 1e-12);
  }
  const auto v = darboux_potential(f2);
  CHECK(v.singular.front());
  CHECK(v.singular_points.size() == 1);
  for (std::size_t i = 100; i < v.grid.size(); i += 100)
    CHECK((v.V[i] - id / v.grid[i]).norm() < 1e-10);
  const auto res = riccati_residual(v, q);
  for (std::size_t i = 0; i < res.size(); ++i)
    if (v.grid[i] >= 0.1 && i + 3 < res.size()) {
      REQUIRE(std::isfinite(res[i]));
      CHECK(res[i] <= 1e-6);
    }
}

TEST_CASE("constant well frame is cos 2x") {
  const auto q = MatrixPotential::uniform(1, 1.0, 1e-3, [](double) { return scalar(-4.0); });
  const auto frame = zero_energy_frame(q, CMatrix::Identity(1, 1));
  for (std::size_t i = 0; i < frame.grid.size(); i += 50)
    CHECK(std::abs(frame.Xi0[i](0, 0) - std::cos(2 * frame.grid[i])) < 1e-10);
  const auto v = darboux_potential(frame);
  // V = -2 tan 2x
  for (std::size_t i = 0; i < v.grid.size(); i += 50)
    if (std::abs(v.grid[i] - kPi / 4) > 0.05)
      CHECK(std::abs(v.V[i](0, 0) + 2 * std::tan(2 * v.grid[i])) < 1e-8);
  CHECK(max_finite(riccati_residual(v, q)) <= 1e-6);
}

TEST_CASE("robin frame V = 1/(1+x) and factorisation") {
  // U0 = -i: A0 = (1 - i)/2, B0 = (1 + i)/2 -> V(0) = B0/A0 = i(1+i)/(1-i)... = 1
  const auto bc = standard_bc(StandardKind::Robin, 1, {-kPi / 2});
  const auto q = free_potential(1, 2.0);
  const auto v = darboux_potential(zero_energy_frame(q, choose_U0(bc)));
  for (std::size_t i = 0; i < v.grid.size(); i += 100)
    CHECK(std::abs(v.V[i](0, 0) - 1.0 / (1.0 + v.grid[i])) < 1e-10);
  CHECK(max_finite(riccati_residual(v, q)) <= 1e-6);

  // psi = e^{-x}(1 + 2x): psi(0) = 1, psi'(0) = 1 = V(0) psi(0)
  const auto psi = scalar_test([](double x) { return std::exp(-x) * (1 + 2 * x); },
                               [](double x) { return std::exp(-x) * (1 - 2 * x); },
                               [](double x) { return std::exp(-x) * (2 * x - 3); });
  const auto rep = factorization_check(v, bc, q, {psi});
  CHECK(rep.interior <= 1e-6);
  CHECK(rep.boundary <= 1e-9);
  CHECK(rep.initial_condition <= 1e-9);

  const auto bad = scalar_test([](double x) { return std::exp(-x); },
                               [](double x) { return -std::exp(-x); },
                               [](double x) { return std::exp(-x); });
  CHECK_THROWS_AS(factorization_check(v, bc, q, {bad}), Error);
}

TEST_CASE("neumann factorisation with cos") {
  const auto bc = standard_bc(StandardKind::Neumann, 2);
  const auto q = free_potential(2, 3.0);
  const auto v = darboux_potential(zero_energy_frame(q, choose_U0(bc)));
  TestFunction f{[](double x) { CVector e = CVector::Zero(2); e(0) = std::cos(x); return e; },
                 [](double x) { CVector e = CVector::Zero(2); e(0) = -std::sin(x); return e; },
                 [](double x) { CVector e = CVector::Zero(2); e(0) = -std::cos(x); return e; }};
  const auto rep = factorization_check(v, bc, q, {f});
  CHECK(rep.interior <= 1e-8);
  CHECK(rep.boundary <= 1e-8);
  CHECK(rep.initial_condition <= 1e-8);
}

TEST_CASE("partner operator") {
  {
    const auto bc = standard_bc(StandardKind::Neumann, 2);
    const auto q = free_potential(2, 1.0);
    const auto v = darboux_potential(zero_energy_frame(q, choose_U0(bc)));
    const auto p = partner_operator(v, bc, q);
    CHECK(p.Q.sup_norm() < 1e-12);
    CHECK((p.bc.U() + CMatrix::Identity(2, 2)).norm() < 1e-12);
  }
  {
    const auto bc = standard_bc(StandardKind::Robin, 1, {-kPi / 2});
    const auto q = free_potential(1, 2.0);
    const auto v = darboux_potential(zero_energy_frame(q, choose_U0(bc)));
    const auto p = partner_operator(v, bc, q);
    for (std::size_t i = 0; i < p.Q.grid().size(); i += 100) {
      const double x = p.Q.grid()[i];
      CHECK(std::abs(p.Q.values()[i](0, 0) - 2.0 / ((1 + x) * (1 + x))) < 1e-8);
    }
    // P = I here, so the partner is Dirichlet at the origin
    CHECK((p.bc.U() + CMatrix::Identity(1, 1)).norm() < 1e-12);
  }
}

TEST_CASE("partner is isospectral on a truncated interval") {
  // Original: -psi'' on [0, L], psi'(0) = psi(0), psi(L) = 0.
  // Partner: -phi'' + 2/(1+x)^2 phi, phi(0) = 0, phi'(L) + V(L) phi(L) = 0.
  const double len = 2.0;
  const auto bc = standard_bc(StandardKind::Robin, 1, {-kPi / 2});
  const auto q = free_potential(1, len);
  const auto v = darboux_potential(zero_energy_frame(q, choose_U0(bc)));
  const auto p = partner_operator(v, bc, q);
  const double v_end = v.V.back()(0, 0).real();

  const double original = shoot([](double) { return 0.0; }, len, 1.0, 1.0,
                                [](double, double y, double) { return y; }, 0.01, 10.0);
  const double partner = shoot([&](double x) { return p.Q(x)(0, 0).real(); }, len, 0.0, 1.0,
                               [&](double, double y, double yp) { return yp + v_end * y; }, 0.01,
                               10.0);
  REQUIRE(std::isfinite(original));
  CHECK(std::abs(original - partner) < 1e-5);
}
