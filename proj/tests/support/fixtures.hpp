#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "pilotscat/detail/amplitude.hpp"
#include "pilotscat/wavefield.hpp"

namespace fixtures {

using namespace pilotscat;

inline BeamSpec fig2_beam() {
  BeamSpec b;
  b.k0 = 887.7;
  b.D = 1000.0;
  b.l = 10000.0;
  b.l0 = 30000.0;
  b.Z1 = -1.0;
  b.mass = 1.0;
  return b;
}

inline TargetSpec fig2_target() {
  TargetSpec t;
  t.Z = 79.0;
  t.a = 0.257;
  t.d = 420.0;
  return t;
}

inline WaveModel fig2_model(WaveMode mode = WaveMode::diffuse, ModelOptions opt = {}) {
  return make_model(fig2_beam(), fig2_target(), mode, opt);
}

// psi in extended precision through plain scalar arithmetic; used as the
// value oracle for finite differences.
inline std::complex<long double> psi_ld(const WaveModel& m, long double z, long double R, double t) {
  const auto P = detail::params_of<long double>(m, t);
  return detail::psi_total(P, m.bragg, z, R);
}

// Fourth-order central difference of psi along one axis.
inline std::complex<long double> fd_grad(const WaveModel& m, long double z, long double R, double t, int axis,
                                         long double h) {
  auto at = [&](long double s) {
    return axis == 0 ? psi_ld(m, z + s * h, R, t) : psi_ld(m, z, R + s * h, t);
  };
  return (at(-2) - 8.0L * at(-1) + 8.0L * at(1) - at(2)) / (12.0L * h);
}

}  // namespace fixtures
