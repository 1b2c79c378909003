#pragma once

// Adaptive Dormand-Prince 5(4) for matrix-valued states y' = f(x, y).
// Integration direction follows the sign of (x1 - x0). The right-hand side is
// called as rhs(x, y, dydx) and must write into the pre-sized dydx.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "halfline/types.hpp"

namespace halfline {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-13;
  double initial_step = 1e-3;
  double max_step = 0.0;  // 0: unlimited
  long max_steps = 5'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

template <typename State>
class Dopri5 {
 public:
  explicit Dopri5(OdeOptions options = {}) : opt_(options) {}

  // Advances y from x0 to x1. `step` carries the step-size estimate between
  // consecutive calls (pass the same variable when integrating node to node).
  template <typename Rhs>
  void integrate(Rhs&& rhs, double x0, double x1, State& y, double& step) {
    if (x0 == x1) return;
    const double dir = x1 > x0 ? 1.0 : -1.0;
    double h = std::abs(step) > 0.0 ? std::abs(step) : opt_.initial_step;
    double x = x0;
    ensure_workspace(y);
    rhs(x, y, k_[0]);
    bool last_rejected = false;
    while (dir * (x1 - x) > 0.0) {
      if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
      bool final_step = false;
      if (h >= std::abs(x1 - x)) {
        h = std::abs(x1 - x);
        final_step = true;
      }
      const double hs = dir * h;
      take_step(rhs, x, y, hs);
      const double err = error_norm(y);
      if (err <= 1.0) {
        ++stats_.accepted;
        x = final_step ? x1 : x + hs;
        y = y_new_;
        std::swap(k_[0], k_[6]);  // FSAL
        double factor = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
        factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 5.0);
        if (!final_step) h *= factor;
        else step = h * factor;
        last_rejected = false;
      } else {
        ++stats_.rejected;
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        last_rejected = true;
      }
      if (h < 1e-14 * std::max(1.0, std::abs(x)) ||
          stats_.accepted + stats_.rejected > opt_.max_steps) {
        std::ostringstream msg;
        msg << "step size underflow or step budget exhausted at x = " << x;
        throw Error(ErrorKind::IntegratorFailure, msg.str(), x);
      }
      if (!final_step) step = h;
    }
  }

  const OdeStats& stats() const { return stats_; }

 private:
  void ensure_workspace(const State& y) {
    for (auto& k : k_) k.resize(y.rows(), y.cols());
    y_stage_.resize(y.rows(), y.cols());
    y_new_.resize(y.rows(), y.cols());
    err_.resize(y.rows(), y.cols());
  }

  template <typename Rhs>
  void take_step(Rhs& rhs, double x, const State& y, double h) {
    // Dormand-Prince tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    y_stage_ = y + (h * a21) * k_[0];
    rhs(x + c2 * h, y_stage_, k_[1]);
    y_stage_ = y + h * (a31 * k_[0] + a32 * k_[1]);
    rhs(x + c3 * h, y_stage_, k_[2]);
    y_stage_ = y + h * (a41 * k_[0] + a42 * k_[1] + a43 * k_[2]);
    rhs(x + c4 * h, y_stage_, k_[3]);
    y_stage_ = y + h * (a51 * k_[0] + a52 * k_[1] + a53 * k_[2] + a54 * k_[3]);
    rhs(x + c5 * h, y_stage_, k_[4]);
    y_stage_ = y + h * (a61 * k_[0] + a62 * k_[1] + a63 * k_[2] + a64 * k_[3] + a65 * k_[4]);
    rhs(x + h, y_stage_, k_[5]);
    y_new_ = y + h * (b1 * k_[0] + b3 * k_[2] + b4 * k_[3] + b5 * k_[4] + b6 * k_[5]);
    rhs(x + h, y_new_, k_[6]);
    err_ = h * (e1 * k_[0] + e3 * k_[2] + e4 * k_[3] + e5 * k_[4] + e6 * k_[5] + e7 * k_[6]);
  }

  // Mixed absolute/relative test against the largest entry of the state, so
  // entries that are structurally tiny do not dictate the step.
  double error_norm(const State& y) const {
    const double magnitude = std::max(y.cwiseAbs().maxCoeff(), y_new_.cwiseAbs().maxCoeff());
    return err_.cwiseAbs().maxCoeff() / (opt_.atol + opt_.rtol * magnitude);
  }

  OdeOptions opt_;
  OdeStats stats_;
  std::array<State, 7> k_;
  State y_stage_, y_new_, err_;
};

}  // namespace halfline
