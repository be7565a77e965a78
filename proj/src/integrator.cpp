#include "pilotscat/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

namespace pilotscat {

State2 StepRecord::at(double t) const {
  const double h = t1 - t0;
  if (h == 0.0) return y0;
  const double s = (t - t0) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  State2 y;
  for (int i = 0; i < 2; ++i) y[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
  return y;
}

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// fifth minus fourth order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

State2 axpy(const State2& y, double h, std::initializer_list<std::pair<double, const State2*>> terms) {
  State2 r = y;
  for (const auto& [c, k] : terms)
    for (int i = 0; i < 2; ++i) r[i] += h * c * (*k)[i];
  return r;
}

}  // namespace

void Dp45::start(double t, const State2& y, double h0) {
  t_ = t;
  y_ = y;
  k1_ = f_(t, y);
  if (h0 > 0.0) {
    h_ = h0;
    return;
  }
  const double scale = opt_.atol + opt_.rtol * std::max(std::abs(y[0]), std::abs(y[1]));
  const double speed = std::max({std::abs(k1_[0]), std::abs(k1_[1]), 1e-300});
  h_ = 0.01 * scale / speed;
  h_ = std::max(h_, 1e-6);
  if (opt_.h_max > 0.0) h_ = std::min(h_, opt_.h_max);
}

bool Dp45::step(double t_end, double h_cap, StepRecord& rec) {
  const double dir = t_end >= t_ ? 1.0 : -1.0;
  for (;;) {
    double h = h_;
    if (h_cap > 0.0) h = std::min(h, h_cap);
    if (opt_.h_max > 0.0) h = std::min(h, opt_.h_max);
    const double remaining = std::abs(t_end - t_);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    const double floor = std::max(opt_.h_min, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t_));
    if (h < floor && !last) return false;
    const double hs = dir * h;
    const State2& k1 = k1_;
    const State2 k2 = f_(t_ + c2 * hs, axpy(y_, hs, {{a21, &k1}}));
    const State2 k3 = f_(t_ + c3 * hs, axpy(y_, hs, {{a31, &k1}, {a32, &k2}}));
    const State2 k4 = f_(t_ + c4 * hs, axpy(y_, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State2 k5 = f_(t_ + c5 * hs, axpy(y_, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State2 k6 = f_(t_ + hs, axpy(y_, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State2 y1 = axpy(y_, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const double t1 = last ? t_end : t_ + hs;
    const State2 k7 = f_(t1, y1);
    // Euclidean norms: the tolerance is on the position vector, independent of axis orientation
    double e2 = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      e2 += e * e;
    }
    const double sc = opt_.atol + opt_.rtol * std::max(std::hypot(y_[0], y_[1]), std::hypot(y1[0], y1[1]));
    const double err = std::sqrt(e2) / sc;
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    if (err <= 1.0) {
      rec = {t_, t1, y_, y1, k1_, k7};
      t_ = t1;
      y_ = y1;
      k1_ = k7;
      // keep the step estimate from a truncated final step
      if (!last || h >= h_) h_ = h * fac;
      return true;
    }
    h_ = h * std::max(fac, 0.2);
    if (h_ < floor) return false;
  }
}

}  // namespace pilotscat
