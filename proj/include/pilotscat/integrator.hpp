#pragma once

#include <array>
#include <functional>

namespace pilotscat {

// Dormand-Prince 5(4) for a 2D autonomous-in-form system y' = f(t, y).
using State2 = std::array<double, 2>;
using Rhs2 = std::function<State2(double, const State2&)>;

struct StepperOptions {
  double rtol = 1e-8;
  double atol = 1e-6;
  double h_min = 1e-14;  // [fs], relative to |t| as well (see Dp45::step)
  double h_max = 0.0;    // 0: unbounded
};

// One accepted step with the data needed for cubic Hermite dense output.
struct StepRecord {
  double t0, t1;
  State2 y0, y1;
  State2 f0, f1;

  State2 at(double t) const;
};

class Dp45 {
 public:
  Dp45(Rhs2 f, const StepperOptions& opt) : f_(std::move(f)), opt_(opt) {}

  // Resets the state; h0 = 0 picks a starting step from the derivative scale.
  void start(double t, const State2& y, double h0 = 0.0);

  // Attempts steps until one is accepted, never stepping past t_end and
  // never taking |h| > h_cap (if h_cap > 0). Returns false on step underflow.
  bool step(double t_end, double h_cap, StepRecord& rec);

  double t() const { return t_; }
  const State2& y() const { return y_; }
  double h() const { return h_; }

 private:
  Rhs2 f_;
  StepperOptions opt_;
  double t_ = 0.0, h_ = 0.0;
  State2 y_{}, k1_{};
};

}  // namespace pilotscat
