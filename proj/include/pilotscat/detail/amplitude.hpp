#pragma once

// Closed-form amplitudes written once over the number type. Real is a plain
// floating type or a Jet over one; derivatives then come for free.
//
// The fast carrier phases are split off: psi_in = A_in e^{i k0 z} and
// psi_out = A_out e^{i k0 r}. A_in and A_out vary on the scale of l, D.

#include <cmath>
#include <array>
#include <complex>

#include "pilotscat/jet.hpp"
#include "pilotscat/wavefield.hpp"

namespace pilotscat::detail {

template <class R>
struct num {
  using base = R;
  using real = R;
  using complex = std::complex<R>;
};
template <class T, int N, int O>
struct num<Jet<T, N, O>> {
  using base = T;
  using real = Jet<T, N, O>;
  using complex = Jet<std::complex<T>, N, O>;
};

template <class R>
using base_t = typename num<R>::base;
template <class R>
using complex_t = typename num<R>::complex;

template <class R>
complex_t<R> make_complex(const R& re, const R& im) {
  if constexpr (is_jet<R>::value) {
    return to_complex(re) + to_complex(im) * std::complex<base_t<R>>(0, 1);
  } else {
    return {re, im};
  }
}

template <class R>
complex_t<R> as_complex(const R& x) {
  if constexpr (is_jet<R>::value) {
    return to_complex(x);
  } else {
    return complex_t<R>(x);
  }
}

// e^{i x}
template <class R>
complex_t<R> expi(const R& x) {
  using T = base_t<R>;
  if constexpr (is_jet<R>::value) {
    const std::complex<T> e = std::polar(T(1), x.v);
    const std::complex<T> i(0, 1);
    return chain(to_complex(x), e, i * e, -e);
  } else {
    return std::polar(T(1), x);
  }
}

template <class T>
struct ModelParams {
  T k0, l, D, l0, v0, hm, t;
  T tau;
  T c3, c4;
  T coupling;
  T a, d;
  T sd;  // diffuse amplitude
  std::complex<T> B;
  WaveMode mode;
};

// pi^{-3/4} (D / (D^2 + i tau)) (l / (l^2 + i tau))^{1/2} e^{i k0 l0 - i hbar k0^2 t / 2m}
template <class T>
std::complex<T> packet_prefactor(T k0, T l, T D, T l0, T hm, T t, T tau) {
  using C = std::complex<T>;
  const T norm = std::pow(T(units::pi), T(-0.75));
  const C trans = D / C(D * D, tau);
  const C longi = std::sqrt(l / C(l * l, tau));
  const T phase = k0 * l0 - T(0.5) * hm * k0 * k0 * t;
  return norm * trans * longi * std::polar(T(1), phase);
}

template <class T>
ModelParams<T> params_of(const WaveModel& m, double t) {
  ModelParams<T> p{};
  p.k0 = T(m.beam.k0);
  p.l = T(m.beam.l);
  p.D = T(m.beam.D);
  p.l0 = T(m.beam.l0);
  p.hm = T(m.hbar_over_m());
  p.v0 = p.hm * p.k0;
  p.t = T(t);
  p.tau = m.exact_spreading ? p.hm * p.t : T(0);
  p.c3 = T(m.c3);
  p.c4 = T(m.c4);
  p.coupling = T(m.coupling);
  p.a = m.target ? T(m.target->a) : T(1);
  p.d = m.target ? T(m.target->d) : T(0);
  p.sd = T(m.diffuse_amplitude);
  p.B = packet_prefactor<T>(p.k0, p.l, p.D, p.l0, p.hm, p.t, p.tau);
  p.mode = m.mode;
  return p;
}

// Gaussian factor exp(-x^2 / (2 (w^2 + i tau))), real when tau = 0.
template <class R, class T>
complex_t<R> gauss(const R& x, T w, T tau) {
  using std::exp;
  if (tau == T(0)) return as_complex(exp(x * x * (T(-0.5) / (w * w))));
  const std::complex<T> c = std::complex<T>(T(-0.5)) / std::complex<T>(w * w, tau);
  return exp(x * x * c);
}

template <class R, class T>
complex_t<R> amplitude_in(const ModelParams<T>& p, const R& z, const R& R_) {
  const T shift = p.l0 - p.v0 * p.t;
  return gauss(R_, p.D, p.tau) * gauss(z + shift, p.l, p.tau) * p.B;
}

// f(r, theta) = k0^-2 [c3 D s + sqrt(c3^2 D^2 s^2 + r^2 - 2 c4 D R + c4^2 D^2) - z]^-1,
// s = R / r. For z > 0 the difference sqrt(..) - z is formed without cancellation.
template <class R, class T>
R fit_function(const ModelParams<T>& p, const R& z, const R& R_, const R& r) {
  using std::sqrt;
  const R s = R_ / r;
  const R a = s * (p.c3 * p.D);
  const R rest = R_ * R_ - R_ * (T(2) * p.c4 * p.D) + p.c4 * p.c4 * p.D * p.D;
  const R X = a * a + z * z + rest;
  const R sq = sqrt(X);
  R diff = value_of(z) > T(0) ? (a * a + rest) / (sq + z) : sq - z;
  return T(1) / ((a + diff) * (p.k0 * p.k0));
}

template <class R, class T>
complex_t<R> bragg_bracket(const ModelParams<T>& p, const BraggTable& table, const R& z, const R& R_,
                           const R& r) {
  using std::atan2;
  using std::sqrt;
  const R theta = atan2(R_, z);
  R re = R(std::sqrt(p.d / p.a));
  R im = R(T(0));
  const R ra = r / p.a;
  for (const auto& e : table.entries) {
    const T tq = T(e.theta);
    const T sq = std::sin(tq);
    const R dth = theta - tq;
    const R rd = r * dth;
    const R U = ra * sinc(rd * (T(0.5) * p.k0 * sq));
    // Phi = atan(1/x) continued through x = 0: e^{i Phi} = -(x + i) / sqrt(1 + x^2),
    // which equals the printed branch for x < 0 (around the Bragg angle).
    const R x = rd * dth * (T(0.5) * p.k0 * sq * sq) - T(3);
    const R w = U / sqrt(x * x + T(1));
    re = re - w * x;
    im = im - w;
  }
  return make_complex(re, im);
}

template <class R, class T>
complex_t<R> amplitude_out(const ModelParams<T>& p, const BraggTable& table, const R& z, const R& R_,
                           const R& r) {
  using C = std::complex<T>;
  if (p.mode == WaveMode::free || p.coupling == T(0)) return as_complex(R(T(0)));
  const T shift = p.l0 - p.v0 * p.t;
  const complex_t<R> env = gauss(r + shift, p.l, p.tau);
  const R f = fit_function(p, z, R_, r);
  if (p.mode == WaveMode::bragg) {
    const C pre = T(2) * p.B * p.coupling * (p.D / p.a);
    return env * f * bragg_bracket(p, table, z, R_, r) * pre;
  }
  const C pre = p.B * p.coupling * p.sd;
  return env * f * pre;
}

template <class R>
struct Amplitudes {
  complex_t<R> in;
  complex_t<R> out;
};

template <class R, class T = base_t<R>>
Amplitudes<R> amplitudes(const ModelParams<T>& p, const BraggTable& table, const R& z, const R& R_) {
  using std::sqrt;
  const R r = sqrt(z * z + R_ * R_);
  return {amplitude_in(p, z, R_), amplitude_out(p, table, z, R_, r)};
}

// Full psi = A_in e^{i k0 z} + A_out e^{i k0 r}.
template <class R, class T = base_t<R>>
complex_t<R> psi_total(const ModelParams<T>& p, const BraggTable& table, const R& z, const R& R_) {
  using std::sqrt;
  const R r = sqrt(z * z + R_ * R_);
  const auto in = amplitude_in(p, z, R_) * expi(z * p.k0);
  if (p.mode == WaveMode::free || p.coupling == T(0)) return in;
  return in + amplitude_out(p, table, z, R_, r) * expi(r * p.k0);
}

// r - z without cancellation on the forward side.
template <class R>
R r_minus_z(const R& z, const R& R_, const R& r) {
  if (value_of(z) > base_t<R>(0)) return R_ * R_ / (r + z);
  return r - z;
}

// psi e^{-i k0 z} = A_in + A_out e^{i k0 (r - z)}. Same modulus as psi and
// its phase gradient differs by the constant k0 along z, without the
// large carrier phase.
template <class R, class T = base_t<R>>
complex_t<R> slow_field(const ModelParams<T>& p, const BraggTable& table, const R& z, const R& R_) {
  using std::sqrt;
  const auto in = amplitude_in(p, z, R_);
  if (p.mode == WaveMode::free || p.coupling == T(0)) return in;
  const R r = sqrt(z * z + R_ * R_);
  return in + amplitude_out(p, table, z, R_, r) * expi(r_minus_z(z, R_, r) * p.k0);
}

// Bragg bracket and its (z, R) gradient in plain doubles.
struct BracketGrad {
  std::complex<double> v, dz, dR;
};

inline BracketGrad bragg_bracket_grad(const WaveModel& m, double z, double R, double r) {
  const double a = m.target->a, k0 = m.beam.k0;
  const double theta = std::atan2(R, z);
  const double r2 = r * r;
  // d theta / d(z, R), d r / d(z, R)
  const double th_z = -R / r2, th_R = z / r2, r_z = z / r, r_R = R / r;
  double re = std::sqrt(m.target->d / a), im = 0.0;
  double re_r = 0.0, re_t = 0.0, im_r = 0.0, im_t = 0.0;
  for (const auto& e : m.bragg.entries) {
    const double kap = 0.5 * k0 * e.sin_theta;
    const double mu = kap * e.sin_theta;
    const double dth = theta - e.theta;
    const double u = r * dth * kap;
    double S, S1;  // sinc and its derivative
    if (std::abs(u) < 1e-3) {
      const double u2 = u * u;
      S = 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
      S1 = u * (-1.0 / 3.0 + u2 / 30.0);
    } else {
      const double sn = std::sin(u), cs = std::cos(u);
      S = sn / u;
      S1 = (cs - S) / u;
    }
    const double U = r / a * S;
    const double U_r = S / a + r / a * S1 * dth * kap;
    const double U_t = r / a * S1 * r * kap;
    const double x = r * dth * dth * mu - 3.0;
    const double x_r = dth * dth * mu, x_t = 2.0 * r * dth * mu;
    const double g = 1.0 / std::sqrt(x * x + 1.0);
    const double g3x = x * g * g * g;
    const double w = U * g;
    const double w_r = U_r * g - U * g3x * x_r, w_t = U_t * g - U * g3x * x_t;
    re -= w * x;
    im -= w;
    re_r -= w_r * x + w * x_r;
    re_t -= w_t * x + w * x_t;
    im_r -= w_r;
    im_t -= w_t;
  }
  using C = std::complex<double>;
  const C d_r(re_r, im_r), d_t(re_t, im_t);
  return {C(re, im), d_r * r_z + d_t * th_z, d_r * r_R + d_t * th_R};
}

// Velocity kernel (the trajectory hot path).
// Works with the ratio rho = A_out e^{i k0 (r - z)} / A_in, so the phase of
// B(t) drops out and one exponential and one sincos are evaluated per point
// (plus one sincos per order in bragg mode).
// Returns Im(grad Phi / Phi) and |Phi| (0 on underflow).
struct PhaseGradient {
  double gz, gR;
  double abs_phi;
};

inline PhaseGradient phase_gradient(const WaveModel& m, double t, double z, double R) {
  using C = std::complex<double>;
  const double k0 = m.beam.k0, l = m.beam.l, D = m.beam.D;
  const double hm = m.hbar_over_m();
  const double tau = m.exact_spreading ? hm * t : 0.0;
  // -1 / (2 (w^2 + i tau)) without a library complex division
  auto coef = [&](double w) {
    const double w2 = w * w, n = w2 * w2 + tau * tau;
    return C(-0.5 * w2 / n, 0.5 * tau / n);
  };
  const C cD = coef(D), cl = coef(l);
  const double shift = m.beam.l0 - hm * k0 * t;
  const double xz = z + shift;
  const C e_in = cD * (R * R) + cl * (xz * xz);
  const C lin_z = 2.0 * cl * xz, lin_R = 2.0 * cD * R;
  // |A_in| = |B| e^{Re e_in}, |B| = pi^{-3/4} D (D^4 + tau^2)^{-1/2} (l^2 / (l^4 + tau^2))^{1/4}
  const double absB = 0.42377720812375763 * D / std::sqrt(D * D * D * D + tau * tau) *
                      std::sqrt(l / std::sqrt(l * l * l * l + tau * tau));
  const double abs_in = absB * std::exp(e_in.real());
  if (m.mode == WaveMode::free || m.coupling == 0.0) return {lin_z.imag(), lin_R.imag(), abs_in};

  const double r = std::sqrt(z * z + R * R);
  const double rz = z / r, rR = R / r;
  const double xr = r + shift;
  const double cD3 = m.c3 * D;
  const double a = cD3 * R / r;
  const double rest = R * R - 2.0 * m.c4 * D * R + m.c4 * m.c4 * D * D;
  const double X = a * a + z * z + rest;
  const double sq = std::sqrt(X);
  const double diff = z > 0.0 ? (a * a + rest) / (sq + z) : sq - z;
  const double den = a + diff;
  const double r3 = r * r * r;
  const double a_z = -cD3 * R * z / r3, a_R = cD3 * z * z / r3;
  const double X_z = 2.0 * a * a_z + 2.0 * z, X_R = 2.0 * a * a_R + 2.0 * R - 2.0 * m.c4 * D;
  const double den_z = a_z + X_z / (2.0 * sq) - 1.0, den_R = a_R + X_R / (2.0 * sq);
  const double rmz = z > 0.0 ? R * R / (r + z) : r - z;
  C lout_z = 2.0 * cl * xr * rz + C(-den_z / den, k0 * (rz - 1.0));
  C lout_R = 2.0 * cl * xr * rR + C(-den_R / den, k0 * rR);
  // rho = pre Bk e^{E}; Bk = 1 outside bragg mode
  const bool bragg = m.mode == WaveMode::bragg;
  const double amp = bragg ? 2.0 * D / m.target->a : m.diffuse_amplitude;
  const double pre = m.coupling * amp / (den * k0 * k0);
  const BracketGrad bk = bragg ? bragg_bracket_grad(m, z, R, r) : BracketGrad{C(1.0), C(0.0), C(0.0)};
  const C E = cl * (xr * xr) - e_in;
  const double ex = std::exp(E.real());
  const double ph = E.imag() + k0 * rmz;
  const C unit(std::cos(ph), std::sin(ph));
  const double abs_bk = std::abs(bk.v);
  const double mag = std::abs(pre) * abs_bk * ex;
  // (lin + rho lout) / (1 + rho), normalised by the larger term
  C num, nz, nR;
  double scale;
  if (mag <= 1.0) {
    // rho lout = rho0 (Bk lout0 + grad Bk)
    const C rho0 = (pre * ex) * unit;
    num = 1.0 + rho0 * bk.v;
    nz = lin_z + rho0 * (bk.v * lout_z + bk.dz);
    nR = lin_R + rho0 * (bk.v * lout_R + bk.dR);
    scale = abs_in;
  } else {
    lout_z += bk.dz / bk.v;
    lout_R += bk.dR / bk.v;
    const C irho = std::conj(unit) / ((pre * ex) * bk.v);
    num = 1.0 + irho;
    nz = irho * lin_z + lout_z;
    nR = irho * lin_R + lout_R;
    scale = absB * std::abs(pre) * abs_bk * std::exp(cl.real() * xr * xr);
  }
  const double n2 = std::norm(num);
  // Im(x / num) = Im(x conj(num)) / |num|^2
  auto im_div = [&](const C& x) { return (x.imag() * num.real() - x.real() * num.imag()) / n2; };
  return {im_div(nz), im_div(nR), scale * std::sqrt(n2)};
}

// Field in a frame attached to a base point P = (z0, R0), with the common
// carrier e^{i k0 (z0 + dz)} removed:
//   psi~(d) = A_in(P + d) + A_out(P + d) e^{i phi0} e^{i k0 (dr - dz)},
// phi0 = k0 (r0 - z0). Rounding in phi0 shifts the field by a constant
// phase between the two terms only, so positions of nodes and stagnation
// points relative to P are resolved to the working precision of d.
template <class R, class T = base_t<R>>
complex_t<R> psi_local(const ModelParams<T>& p, const BraggTable& table, T z0, T R0, const R& dz, const R& dR,
                       const std::complex<T>& carrier0) {
  using std::sqrt;
  const R z = dz + z0;
  const R Rr = dR + R0;
  const R r = sqrt(z * z + Rr * Rr);
  const T r0 = std::sqrt(z0 * z0 + R0 * R0);
  // r - r0 = ((2 z0 + dz) dz + (2 R0 + dR) dR) / (r + r0)
  const R dr = ((dz + T(2) * z0) * dz + (dR + T(2) * R0) * dR) / (r + r0);
  const auto in = amplitude_in(p, z, Rr);
  if (p.mode == WaveMode::free || p.coupling == T(0)) return in;
  return in + amplitude_out(p, table, z, Rr, r) * expi((dr - dz) * p.k0) * carrier0;
}

template <class T>
std::complex<T> local_carrier(const ModelParams<T>& p, T z0, T R0) {
  const T r0 = std::sqrt(z0 * z0 + R0 * R0);
  const T rmz = z0 > T(0) ? R0 * R0 / (r0 + z0) : r0 - z0;
  return std::polar(T(1), p.k0 * rmz);
}

}  // namespace pilotscat::detail
