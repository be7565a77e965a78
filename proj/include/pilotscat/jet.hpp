#pragma once

// Forward-mode automatic differentiation carrying value, gradient and
// (optionally) Hessian with respect to N independent variables.
//
// The wavefunction models are written once as templates over the number
// type; instantiating them with Jet gives the exact analytic derivatives of
// the closed-form expressions, up to rounding.

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <type_traits>

namespace pilotscat {

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class T>
struct real_of {
  using type = T;
};
template <class T>
struct real_of<std::complex<T>> {
  using type = T;
};
template <class T>
using real_of_t = typename real_of<T>::type;

template <class S, int N, int Order = 2>
struct Jet {
  static_assert(Order == 1 || Order == 2);
  using scalar_type = S;
  static constexpr int size = N;
  static constexpr int order = Order;

  S v{};
  std::array<S, N> d{};
  std::array<S, N * N> h{};

  constexpr Jet() = default;
  constexpr Jet(S value) : v(value) {}  // NOLINT: implicit constant promotion

  static constexpr Jet variable(S value, int index) {
    Jet j(value);
    j.d[index] = S(1);
    return j;
  }

  constexpr S hess(int i, int j) const { return h[i * N + j]; }
};

template <class T>
struct is_jet : std::false_type {};
template <class S, int N, int O>
struct is_jet<Jet<S, N, O>> : std::true_type {};

template <class U>
concept PlainScalar = std::is_arithmetic_v<U> || is_complex<U>::value;

template <class A, class B>
using promote_t = std::conditional_t<is_complex<A>::value || is_complex<B>::value,
                                     std::complex<real_of_t<A>>, real_of_t<A>>;

// Unary chain rule: y = f(x) with f0 = f(x.v), f1 = f'(x.v), f2 = f''(x.v).
template <class S, int N, int O>
constexpr Jet<S, N, O> chain(const Jet<S, N, O>& x, S f0, S f1, S f2) {
  Jet<S, N, O> y(f0);
  for (int i = 0; i < N; ++i) y.d[i] = f1 * x.d[i];
  if constexpr (O == 2) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) y.h[i * N + j] = f1 * x.h[i * N + j] + f2 * x.d[i] * x.d[j];
  }
  return y;
}

template <class T, int N, int O>
constexpr Jet<std::complex<T>, N, O> to_complex(const Jet<T, N, O>& x) {
  Jet<std::complex<T>, N, O> y(x.v);
  for (int i = 0; i < N; ++i) y.d[i] = x.d[i];
  if constexpr (O == 2)
    for (int k = 0; k < N * N; ++k) y.h[k] = x.h[k];
  return y;
}

template <class T, int N, int O>
constexpr Jet<T, N, O> real(const Jet<std::complex<T>, N, O>& x) {
  Jet<T, N, O> y(x.v.real());
  for (int i = 0; i < N; ++i) y.d[i] = x.d[i].real();
  if constexpr (O == 2)
    for (int k = 0; k < N * N; ++k) y.h[k] = x.h[k].real();
  return y;
}

template <class T, int N, int O>
constexpr Jet<T, N, O> imag(const Jet<std::complex<T>, N, O>& x) {
  Jet<T, N, O> y(x.v.imag());
  for (int i = 0; i < N; ++i) y.d[i] = x.d[i].imag();
  if constexpr (O == 2)
    for (int k = 0; k < N * N; ++k) y.h[k] = x.h[k].imag();
  return y;
}

// ---- arithmetic between jets of the same scalar type

template <class S, int N, int O>
constexpr Jet<S, N, O> operator-(const Jet<S, N, O>& a) {
  Jet<S, N, O> y(-a.v);
  for (int i = 0; i < N; ++i) y.d[i] = -a.d[i];
  if constexpr (O == 2)
    for (int k = 0; k < N * N; ++k) y.h[k] = -a.h[k];
  return y;
}

template <class S, int N, int O>
constexpr Jet<S, N, O> operator+(const Jet<S, N, O>& a, const Jet<S, N, O>& b) {
  Jet<S, N, O> y(a.v + b.v);
  for (int i = 0; i < N; ++i) y.d[i] = a.d[i] + b.d[i];
  if constexpr (O == 2)
    for (int k = 0; k < N * N; ++k) y.h[k] = a.h[k] + b.h[k];
  return y;
}

template <class S, int N, int O>
constexpr Jet<S, N, O> operator-(const Jet<S, N, O>& a, const Jet<S, N, O>& b) {
  Jet<S, N, O> y(a.v - b.v);
  for (int i = 0; i < N; ++i) y.d[i] = a.d[i] - b.d[i];
  if constexpr (O == 2)
    for (int k = 0; k < N * N; ++k) y.h[k] = a.h[k] - b.h[k];
  return y;
}

template <class S, int N, int O>
constexpr Jet<S, N, O> operator*(const Jet<S, N, O>& a, const Jet<S, N, O>& b) {
  Jet<S, N, O> y(a.v * b.v);
  for (int i = 0; i < N; ++i) y.d[i] = a.d[i] * b.v + a.v * b.d[i];
  if constexpr (O == 2) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        y.h[i * N + j] = a.h[i * N + j] * b.v + a.d[i] * b.d[j] + a.d[j] * b.d[i] + a.v * b.h[i * N + j];
  }
  return y;
}

template <class S, int N, int O>
constexpr Jet<S, N, O> reciprocal(const Jet<S, N, O>& x) {
  const S inv = S(1) / x.v;
  return chain(x, inv, -inv * inv, S(2) * inv * inv * inv);
}

template <class S, int N, int O>
constexpr Jet<S, N, O> operator/(const Jet<S, N, O>& a, const Jet<S, N, O>& b) {
  return a * reciprocal(b);
}

// ---- mixed real/complex jets

template <class T, int N, int O>
constexpr auto operator+(const Jet<std::complex<T>, N, O>& a, const Jet<T, N, O>& b) { return a + to_complex(b); }
template <class T, int N, int O>
constexpr auto operator+(const Jet<T, N, O>& a, const Jet<std::complex<T>, N, O>& b) { return to_complex(a) + b; }
template <class T, int N, int O>
constexpr auto operator-(const Jet<std::complex<T>, N, O>& a, const Jet<T, N, O>& b) { return a - to_complex(b); }
template <class T, int N, int O>
constexpr auto operator-(const Jet<T, N, O>& a, const Jet<std::complex<T>, N, O>& b) { return to_complex(a) - b; }
template <class T, int N, int O>
constexpr auto operator*(const Jet<std::complex<T>, N, O>& a, const Jet<T, N, O>& b) { return a * to_complex(b); }
template <class T, int N, int O>
constexpr auto operator*(const Jet<T, N, O>& a, const Jet<std::complex<T>, N, O>& b) { return to_complex(a) * b; }
template <class T, int N, int O>
constexpr auto operator/(const Jet<std::complex<T>, N, O>& a, const Jet<T, N, O>& b) { return a / to_complex(b); }
template <class T, int N, int O>
constexpr auto operator/(const Jet<T, N, O>& a, const Jet<std::complex<T>, N, O>& b) { return to_complex(a) / b; }

// ---- jets with plain scalars

template <class S, int N, int O, PlainScalar U>
constexpr auto lift(const Jet<S, N, O>& a) {
  using R = promote_t<S, U>;
  if constexpr (std::is_same_v<R, S>) {
    return a;
  } else {
    return to_complex(a);
  }
}

template <class S, int N, int O, PlainScalar U>
constexpr auto operator+(const Jet<S, N, O>& a, U b) {
  using R = promote_t<S, U>;
  auto y = lift<S, N, O, U>(a);
  y.v += R(b);
  return y;
}
template <class S, int N, int O, PlainScalar U>
constexpr auto operator+(U b, const Jet<S, N, O>& a) { return a + b; }

template <class S, int N, int O, PlainScalar U>
constexpr auto operator-(const Jet<S, N, O>& a, U b) {
  using R = promote_t<S, U>;
  auto y = lift<S, N, O, U>(a);
  y.v -= R(b);
  return y;
}
template <class S, int N, int O, PlainScalar U>
constexpr auto operator-(U b, const Jet<S, N, O>& a) {
  using R = promote_t<S, U>;
  auto y = -lift<S, N, O, U>(a);
  y.v += R(b);
  return y;
}

template <class S, int N, int O, PlainScalar U>
constexpr auto operator*(const Jet<S, N, O>& a, U b) {
  using R = promote_t<S, U>;
  auto y = lift<S, N, O, U>(a);
  const R c(b);
  y.v *= c;
  for (auto& e : y.d) e *= c;
  if constexpr (O == 2)
    for (auto& e : y.h) e *= c;
  return y;
}
template <class S, int N, int O, PlainScalar U>
constexpr auto operator*(U b, const Jet<S, N, O>& a) { return a * b; }

template <class S, int N, int O, PlainScalar U>
constexpr auto operator/(const Jet<S, N, O>& a, U b) {
  using R = promote_t<S, U>;
  return a * (R(1) / R(b));
}
template <class S, int N, int O, PlainScalar U>
constexpr auto operator/(U b, const Jet<S, N, O>& a) {
  return reciprocal(a) * b;
}

// ---- elementary functions

template <class S, int N, int O>
Jet<S, N, O> exp(const Jet<S, N, O>& x) {
  using std::exp;
  const S e = exp(x.v);
  return chain(x, e, e, e);
}

template <class S, int N, int O>
Jet<S, N, O> log(const Jet<S, N, O>& x) {
  using std::log;
  const S inv = S(1) / x.v;
  return chain(x, log(x.v), inv, -inv * inv);
}

template <class S, int N, int O>
Jet<S, N, O> sqrt(const Jet<S, N, O>& x) {
  using std::sqrt;
  const S s = sqrt(x.v);
  const S f1 = S(0.5) / s;
  return chain(x, s, f1, -f1 / (S(2) * x.v));
}

template <class S, int N, int O>
Jet<S, N, O> sin(const Jet<S, N, O>& x) {
  using std::cos;
  using std::sin;
  const S s = sin(x.v);
  return chain(x, s, cos(x.v), -s);
}

template <class S, int N, int O>
Jet<S, N, O> cos(const Jet<S, N, O>& x) {
  using std::cos;
  using std::sin;
  const S c = cos(x.v);
  return chain(x, c, -sin(x.v), -c);
}

template <class T, int N, int O>
Jet<T, N, O> atan(const Jet<T, N, O>& x) {
  const T q = T(1) / (T(1) + x.v * x.v);
  return chain(x, std::atan(x.v), q, T(-2) * x.v * q * q);
}

// Derivatives come from whichever of atan(y/x), -atan(x/y) is well
// conditioned; both differ from atan2 by a locally constant offset.
template <class T, int N, int O>
Jet<T, N, O> atan2(const Jet<T, N, O>& y, const Jet<T, N, O>& x) {
  Jet<T, N, O> a = std::abs(x.v) >= std::abs(y.v) ? atan(y / x) : -atan(x / y);
  a.v = std::atan2(y.v, x.v);
  return a;
}

// sin(x)/x with its first two derivatives; series near the removable
// singularity.
template <class T>
constexpr std::array<T, 3> sinc_derivs(T x) {
  const T x2 = x * x;
  if (std::abs(x) < T(1e-3)) {
    const T f0 = T(1) - x2 / T(6) + x2 * x2 / T(120) - x2 * x2 * x2 / T(5040);
    const T f1 = x * (T(-1) / T(3) + x2 / T(30) - x2 * x2 / T(840));
    const T f2 = T(-1) / T(3) + x2 / T(10) - x2 * x2 / T(168);
    return {f0, f1, f2};
  }
  const T s = std::sin(x);
  const T c = std::cos(x);
  return {s / x, (x * c - s) / x2, ((T(2) - x2) * s - T(2) * x * c) / (x2 * x)};
}

template <class T, int N, int O>
Jet<T, N, O> sinc(const Jet<T, N, O>& x) {
  const auto f = sinc_derivs(x.v);
  return chain(x, f[0], f[1], f[2]);
}

template <class T>
  requires std::is_floating_point_v<T>
T sinc(T x) {
  return sinc_derivs(x)[0];
}

template <class T>
  requires std::is_floating_point_v<T>
T real(const std::complex<T>& z) {
  return z.real();
}
template <class T>
  requires std::is_floating_point_v<T>
T imag(const std::complex<T>& z) {
  return z.imag();
}

// Value / derivative accessors that also accept plain scalars.
template <class X>
constexpr auto value_of(const X& x) {
  if constexpr (is_jet<X>::value) {
    return x.v;
  } else {
    return x;
  }
}

}  // namespace pilotscat
