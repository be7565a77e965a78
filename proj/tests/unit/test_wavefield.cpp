#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "pilotscat/errors.hpp"
#include "pilotscat/wavefield.hpp"
#include "support/fixtures.hpp"

using namespace pilotscat;
using fixtures::fig2_beam;
using fixtures::fig2_model;
using fixtures::fig2_target;

namespace {

constexpr double pi = units::pi;

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// 1D Fourier synthesis of a Gaussian momentum profile
//   (2 pi)^{-1/2} pi^{-1/4} s^{-1/2} int exp(-(k - k0)^2 / 2 s^2 + i k x - i hm k^2 t / 2) dk
// by the trapezoid rule over +-14 s.
cplx synth1d(double x, double k0, double s, double hm, double t) {
  const int n = 6000;
  const double lo = k0 - 14.0 * s;
  const double dk = 28.0 * s / n;
  cplx sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double k = lo + i * dk;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double kk = k - k0;
    // the carrier k0 x and k0^2 t are factored out to keep the phase small
    const double ph = kk * x - 0.5 * hm * t * (kk * kk + 2.0 * k0 * kk);
    sum += w * std::exp(cplx(-kk * kk / (2.0 * s * s), ph));
  }
  const double carrier = k0 * x - 0.5 * hm * t * k0 * k0;
  return sum * dk * std::polar(1.0, carrier) / (std::sqrt(2.0 * pi) * std::pow(pi, 0.25) * std::sqrt(s));
}

}  // namespace

TEST_CASE("lattice: zero fluctuation grid has (Nperp+1)^2 (Nz+1) sites spaced a") {
  TargetSpec t = fig2_target();
  t.d = t.a;  // Nz = 1
  t.deltaA = 0.0;
  const Lattice lat = build_lattice(t, 7, 2);
  REQUIRE(lat.positions.size() == 18);
  std::vector<double> xs;
  for (const auto& p : lat.positions) xs.push_back(p.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  REQUIRE(xs.size() == 3);
  CHECK(xs[1] - xs[0] == doctest::Approx(t.a));
  CHECK(xs[2] - xs[1] == doctest::Approx(t.a));
}

TEST_CASE("lattice: plane count and deterministic offsets") {
  CHECK(fig2_target().Nz() == 1634);
  TargetSpec t = fig2_target();
  t.d = 10 * t.a;
  t.deltaA = 0.1;
  const Lattice a = build_lattice(t, 42, 4);
  const Lattice b = build_lattice(t, 42, 4);
  const Lattice c = build_lattice(t, 43, 4);
  REQUIRE(a.positions.size() == 25 * 11);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    same = same && a.positions[i].x == b.positions[i].x && a.positions[i].y == b.positions[i].y &&
           a.positions[i].z == b.positions[i].z;
    differ = differ || a.positions[i].x != c.positions[i].x;
    // within the cell of its nominal site
    const double hx = 0.5 * t.deltaA * t.a;
    const double nx = std::round(a.positions[i].x / t.a) * t.a;
    CHECK(std::abs(a.positions[i].x - nx) <= hx);
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("model: coupling sign and magnitude") {
  const WaveModel m = fig2_model();
  CHECK(m.coupling < 0.0);
  CHECK(m.coupling == doctest::Approx(-79.0 / 0.0529177210903).epsilon(1e-8));
  CHECK(m.v0() == doctest::Approx(102.77).epsilon(1e-3));
  CHECK_THROWS_AS(make_model(fig2_beam(), std::nullopt, WaveMode::diffuse), ValidationError);
  BeamSpec slow = fig2_beam();
  slow.k0 = 0.001;
  CHECK_THROWS_AS(make_model(slow, fig2_target(), WaveMode::diffuse), ValidationError);
}

TEST_CASE("psi_in: packet centre and one-sigma offset") {
  const WaveModel m = fig2_model();
  const BeamSpec b = m.beam;
  const double centre = std::pow(pi, -0.75) / (b.D * std::sqrt(b.l));
  const auto c = eval_psi_in({-b.l0, 0.0}, 0.0, m);
  CHECK(std::abs(c.value) == doctest::Approx(centre).epsilon(1e-13));
  const auto o = eval_psi_in({-b.l0 + b.l, 0.0}, 0.0, m);
  CHECK(std::abs(o.value) == doctest::Approx(std::exp(-0.5) * centre).epsilon(1e-13));
}

TEST_CASE("psi_in: agrees with momentum-space synthesis") {
  // Separable synthesis: two transverse axes and one longitudinal.
  BeamSpec b = fig2_beam();
  b.D = 1.0;
  b.l = 3.0;
  b.l0 = 12.0;
  b.k0 = 400.0;
  for (bool spreading : {false, true}) {
    ModelOptions opt;
    opt.exact_spreading = spreading;
    const WaveModel m = make_model(b, fig2_target(), WaveMode::free, opt);
    const double hm = m.hbar_over_m();
    for (double t : {0.0, 0.05, 0.11}) {
      if (!spreading && t > 0.0) continue;
      for (auto [z, R] : {std::pair{-12.0, 0.0}, {-11.0, 0.7}, {-13.5, 1.6}, {-12.0 + m.v0() * t, 0.3}}) {
        const cplx got = eval_psi_in({z, R}, t, m).value;
        // transverse: x = R, y = 0; each axis is a k0 = 0 Gaussian of width 1/D
        const cplx tx = synth1d(R, 0.0, 1.0 / b.D, hm, t);
        const cplx ty = synth1d(0.0, 0.0, 1.0 / b.D, hm, t);
        // longitudinal: centred at -l0 (phase e^{i k l0} shifts the origin)
        const cplx tz = synth1d(z + b.l0, b.k0, 1.0 / b.l, hm, t);
        const cplx want = tx * ty * tz;
        INFO("t=" << t << " z=" << z << " R=" << R);
        CHECK(rel(got, want) < 1e-4);
      }
    }
  }
}

TEST_CASE("psi_in: unit norm over R^3") {
  const WaveModel m = fig2_model(WaveMode::free);
  const BeamSpec b = m.beam;
  // |psi|^2 factorizes; integrate each factor by the midpoint rule over 12 sigma.
  const int n = 4000;
  double sz = 0.0, sr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = -b.l0 - 12.0 * b.l + (i + 0.5) * 24.0 * b.l / n;
    sz += std::norm(eval_psi_in({z, 0.0}, 0.0, m).value) * 24.0 * b.l / n;
    const double R = (i + 0.5) * 12.0 * b.D / n;
    sr += std::norm(eval_psi_in({-b.l0, R}, 0.0, m).value) * 2.0 * pi * R * 12.0 * b.D / n;
  }
  const double centre = std::norm(eval_psi_in({-b.l0, 0.0}, 0.0, m).value);
  CHECK(sz * sr / centre == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("fit function") {
  ModelOptions zero;
  zero.c3 = 0.0;
  zero.c4 = 0.0;
  const WaveModel m0 = fig2_model(WaveMode::diffuse, zero);
  const double k0 = m0.k0();
  for (double th : {0.1, 0.7, 1.5, 2.4, pi}) {
    for (double r : {3.0, 500.0, 1e5}) {
      const double want = 1.0 / (2.0 * k0 * k0 * std::pow(std::sin(th / 2.0), 2) * r);
      CHECK(eval_f_geom(r, th, m0) == doctest::Approx(want).epsilon(1e-12));
    }
  }
  const WaveModel m = fig2_model();
  for (double th : {0.3, 1.0, 2.0}) {
    const double r = 1e9;
    const double want = 1.0 / (2.0 * k0 * k0 * std::pow(std::sin(th / 2.0), 2));
    CHECK(eval_f_geom(r, th, m) * r == doctest::Approx(want).epsilon(1e-5));
  }
  const double near = eval_f_geom(m.beam.D, pi / 2, m);
  CHECK(std::isfinite(near));
  CHECK(near > 0.0);
  CHECK_THROWS_AS(eval_f_geom(10.0, 0.0, m), DomainError);
  CHECK_THROWS_AS(eval_f_geom(0.0, 1.0, m), DomainError);
}

TEST_CASE("effective Fraunhofer sum: single atom and extended-precision resummation") {
  const WaveModel m = fig2_model();
  Lattice one;
  one.positions.push_back({0.0, 0.0, 0.0});
  const CylPoint p{300.0, 400.0};
  const double t = 250.0;
  const double xi = p.r() + m.beam.l0 - m.v0() * t;
  const cplx env = std::exp(-xi * xi / (2.0 * m.beam.l * m.beam.l));
  CHECK(rel(eval_S_eff_direct(one, p, t, m), env) < 1e-14);

  TargetSpec tg = fig2_target();
  tg.d = 9 * tg.a;
  tg.deltaA = 0.05;
  const Lattice lat = build_lattice(tg, 3, 8);  // 81 * 10 atoms
  REQUIRE(lat.positions.size() == 810);
  for (double th : {0.4, 1.3, 2.6}) {
    const CylPoint q{50.0 * std::cos(th), 50.0 * std::sin(th)};
    const long double r = 50.0L;
    const long double st = std::sin(static_cast<long double>(th)), ct = std::cos(static_cast<long double>(th));
    std::complex<long double> want = 0.0L;
    const long double xi0 = r + m.beam.l0 - static_cast<long double>(m.v0()) * 290.0L;
    for (const auto& a : lat.positions) {
      const long double x = a.x, y = a.y, z = a.z;
      const long double path = -(x * st + z * ct) + z + (x * x + y * y + z * z) / (2.0L * r);
      const long double e = -(x * x + y * y) / (2.0L * m.beam.D * m.beam.D) -
                            (xi0 + path) * (xi0 + path) / (2.0L * m.beam.l * m.beam.l);
      want += std::exp(e) * std::polar(1.0L, static_cast<long double>(m.k0()) * path);
    }
    const cplx got = eval_S_eff_direct(lat, q, 290.0, m);
    const cplx w(static_cast<double>(want.real()), static_cast<double>(want.imag()));
    CHECK(rel(got, w) < 1e-10);
  }
}

namespace {

double fit_exponent(const std::vector<double>& n, const std::vector<double>& s) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(n[i]);
    my += std::log(s[i]);
  }
  mx /= n.size();
  my /= n.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sxy += (std::log(n[i]) - mx) * (std::log(s[i]) - my);
    sxx += (std::log(n[i]) - mx) * (std::log(n[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("effective Fraunhofer sum: coherent growth on Bragg directions, sqrt(N) elsewhere") {
  const WaveModel m = fig2_model();
  const double r = 1e12;
  const double t = (r + m.beam.l0) / m.v0();  // envelope centred on the sphere
  std::vector<double> ns, coh, inc;
  for (int planes : {64, 128, 256, 512, 1024}) {
    TargetSpec tg = fig2_target();
    tg.d = planes * tg.a;
    tg.deltaA = 0.0;
    const Lattice column = build_lattice(tg, 1, 0);
    const double th = m.bragg.entries[0].theta;
    coh.push_back(std::abs(eval_S_eff_direct(column, {r * std::cos(th), r * std::sin(th)}, t, m)));

    tg.deltaA = 0.2;
    double mean = 0.0;
    std::size_t count = 0;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int j = 0; j < 20; ++j) {
      BeamSpec b = m.beam;
      b.k0 *= 1.0 + 1e-3 * u(rng);
      const WaveModel mj = make_model(b, tg, WaveMode::diffuse);
      const Lattice rough = build_lattice(tg, 100 + j, 4);
      count = rough.positions.size();
      const double tj = (r + mj.beam.l0) / mj.v0();
      mean += std::abs(eval_S_eff_direct(rough, {r * std::cos(1.0), r * std::sin(1.0)}, tj, mj)) / 20.0;
    }
    const double n = static_cast<double>(count);
    CHECK(mean / std::sqrt(n) > 0.5);
    CHECK(mean / std::sqrt(n) < 1.5);
    ns.push_back(n);
    inc.push_back(mean);
  }
  std::vector<double> planes_n = {65, 129, 257, 513, 1025};
  CHECK(fit_exponent(planes_n, coh) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(fit_exponent(ns, inc) > 0.4);
  CHECK(fit_exponent(ns, inc) < 0.6);
}

TEST_CASE("psi_out: pulse has not emerged at t = 0") {
  const WaveModel m = fig2_model();
  for (double th : {0.3, 1.5, 2.8}) {
    for (double r : {3.0 * m.beam.l, 5.0 * m.beam.l}) {
      const CylPoint p{r * std::cos(th), r * std::sin(th)};
      const double peak =
          std::exp(log_peak_amplitude(0.0, m)) * std::abs(m.coupling) * m.diffuse_amplitude * eval_f_geom(r, th, m);
      CHECK(std::abs(eval_psi_out(p, 0.0, m).value) < 1e-3 * peak);
    }
  }
  CHECK_THROWS_AS(eval_psi_out({0.0, 0.0}, 1.0, m), DomainError);
}

TEST_CASE("psi_out diffuse: independent re-evaluation along a ray at 90 degrees") {
  const WaveModel m = fig2_model();
  const BeamSpec b = m.beam;
  const double t = b.l0 / m.v0();
  const double c3 = 0.3, c4 = 0.8;
  for (double r : {50.0, 800.0, 3000.0, 12000.0}) {
    // theta = pi/2: s = 1, c = 0
    const double f = 1.0 / (b.k0 * b.k0 *
                            (c3 * b.D + std::sqrt(c3 * c3 * b.D * b.D + r * r - 2.0 * r * c4 * b.D + c4 * c4 * b.D * b.D)));
    const double C = -79.0 * 18.897261246257703;
    const double S = (b.D / 0.257) * std::sqrt(420.0 / 0.257);
    const double xi = r + b.l0 - m.v0() * t;
    const double want = std::pow(pi, -0.75) / (b.D * std::sqrt(b.l)) * std::abs(C) * S * std::exp(-xi * xi / (2 * b.l * b.l)) * f;
    const double got = std::abs(eval_psi_out({0.0, r}, t, m).value);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("psi_out diffuse: magnitude is f * envelope times a constant") {
  const WaveModel m = fig2_model();
  const double t = 1.3 * m.beam.l0 / m.v0();
  const double r = 9000.0;
  const double xi = r + m.beam.l0 - m.v0() * t;
  const double env = std::exp(-xi * xi / (2.0 * m.beam.l * m.beam.l));
  double first = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double th = 0.01 + i * (pi - 0.02) / 63.0;
    const double v = std::abs(eval_psi_out({r * std::cos(th), r * std::sin(th)}, t, m).value) /
                     (eval_f_geom(r, th, m) * env);
    if (i == 0) first = v;
    CHECK(std::abs(v / first - 1.0) < 1e-12);
  }
}

TEST_CASE("psi_out bragg: no transverse phase gradient of the q-th term on its Bragg angle") {
  WaveModel m = fig2_model(WaveMode::bragg);
  REQUIRE(m.bragg.q_max() == 72);
  const auto all = m.bragg.entries;
  const double t = 1.5 * m.beam.l0 / m.v0();
  for (int q : {1, 2, 5}) {
    m.bragg.entries = {all[q - 1]};
    const double th = all[q - 1].theta;
    const double r = 0.5 * m.v0() * t;
    const CylPoint p{r * std::cos(th), r * std::sin(th)};
    const auto f = eval_psi_out(p, t, m);
    const cplx g_t = -std::sin(th) * f.grad_z + std::cos(th) * f.grad_R;
    CHECK(std::abs((g_t / f.value).imag()) < 1e-9 * m.k0());
  }
}

TEST_CASE("gradients match finite differences in every lattice mode") {
  for (WaveMode mode : {WaveMode::free, WaveMode::diffuse, WaveMode::bragg}) {
    for (bool spreading : {false, true}) {
      ModelOptions opt;
      opt.exact_spreading = spreading;
      const WaveModel m = fig2_model(mode, opt);
      std::mt19937_64 rng(17);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const double h = 0.02 / m.k0();
      int checked = 0;
      for (int i = 0; i < 60; ++i) {
        const double t = (0.5 + u(rng)) * m.beam.l0 / m.v0();
        double z, R;
        if (i % 2 == 0 || mode == WaveMode::free) {
          z = -m.beam.l0 + m.v0() * t + (u(rng) - 0.5) * 4.0 * m.beam.l;
          R = 3.0 * m.beam.D * u(rng);
        } else {
          const double r = std::max(1.0, m.v0() * t - m.beam.l0 + (u(rng) - 0.5) * 4.0 * m.beam.l);
          const double th = 0.02 + (pi - 0.04) * u(rng);
          z = r * std::cos(th);
          R = r * std::sin(th);
        }
        const auto an = eval_psi({z, R}, t, m);
        if (std::abs(an.value) < 1e-6 * std::exp(log_peak_amplitude(t, m))) continue;
        const auto gz = fixtures::fd_grad(m, z, R, t, 0, h);
        const auto gR = fixtures::fd_grad(m, z, R, t, 1, h);
        const cplx fz(static_cast<double>(gz.real()), static_cast<double>(gz.imag()));
        const cplx fR(static_cast<double>(gR.real()), static_cast<double>(gR.imag()));
        const double norm = std::sqrt(std::norm(fz) + std::norm(fR));
        const double err = std::sqrt(std::norm(an.grad_z - fz) + std::norm(an.grad_R - fR)) / norm;
        INFO("mode=" << to_string(mode) << " z=" << z << " R=" << R << " t=" << t);
        CHECK(err < 1e-6);
        ++checked;
      }
      CHECK(checked > 20);
    }
  }
}

TEST_CASE("pulse profile") {
  const double D = 1.0;
  // empty domain beyond the cut-off
  CHECK(pulse_profile_I(0.6, 1.0, pi / 2, D) == 0.0);
  CHECK(pulse_profile_I(0.26, 2.0, 0.5, D) == 0.0);

  for (double th : {0.6, pi / 2, 2.2}) {
    const double r = 2000.0 * D;
    const double s = std::sin(th);
    const double i0 = pulse_profile_I(0.0, r, th, D);
    REQUIRE(i0 > 0.0);
    for (double x = -2.0 * D * s; x <= 2.0 * D * s + 1e-12; x += 0.25 * D * s) {
      const double ratio = pulse_profile_I(x, r, th, D) / i0;
      INFO("theta=" << th << " xi=" << x);
      CHECK(ratio == doctest::Approx(pulse_profile_asymptote(x, th, D)).epsilon(0.05));
    }
  }
  // dispersion in xi at 90 degrees is of order D
  const double r = 5000.0;
  double m0 = 0, m2 = 0;
  for (int i = -400; i <= 400; ++i) {
    const double x = i * 0.02;
    const double w = pulse_profile_I(x, r, pi / 2, D);
    m0 += w;
    m2 += w * x * x;
  }
  const double sigma = std::sqrt(m2 / m0);
  CHECK(sigma > 0.5 * D);
  CHECK(sigma < 2.0 * D);
}

TEST_CASE("semiclassical wave") {
  SemiclassicalParams sp;
  const double tc = sp.decoherence_time();
  CHECK(tc == doctest::Approx(100.0 / sp.hbar_over_m()));
  // outgoing wave suppressed for distant impact parameters
  const double t = 40.0 / sp.v0();
  const std::array<double, 3> p{0.0, 0.0, -40.0};
  const double centre = std::abs(eval_psi_semiclassical({1000.0, 0.0, 0.0}, 0.0, 1000.0, sp).value);
  const auto far = eval_psi_semiclassical({40.0, 0.0, 0.0}, t, 1000.0, sp);
  CHECK(std::abs(far.value) / centre < 1e-100);
  // nonzero outgoing amplitude on the front r = v0 t for b = 10 fm, away from the incident packet
  const auto near = eval_psi_semiclassical({-40.0 * std::sin(2.5), 0.0, 40.0 * std::cos(2.5)}, t, 10.0, sp);
  CHECK(std::abs(near.value) / centre > 1e-3);
  (void)p;
  CHECK_THROWS_AS(eval_psi_semiclassical({0.0, 0.0, 0.0}, 0.0, 10.0, sp), DomainError);
}

TEST_CASE("semiclassical gradients match finite differences") {
  SemiclassicalParams sp;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-3 / sp.k0;
  for (int i = 0; i < 100; ++i) {
    const double b = 12.0 + 3.0 * u(rng);
    const double t = 0.8 * sp.decoherence_time() * u(rng);
    std::array<double, 3> p{b + 15.0 * u(rng), 5.0 * u(rng), sp.v0() * t + 15.0 * u(rng)};
    const auto an = eval_psi_semiclassical(p, t, b, sp);
    double num = 0, den = 0;
    for (int k = 0; k < 3; ++k) {
      auto at = [&](double s) {
        auto q = p;
        q[k] += s * h;
        return eval_psi_semiclassical(q, t, b, sp).value;
      };
      const cplx fd = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
      num += std::norm(an.grad[k] - fd);
      den += std::norm(fd);
    }
    CHECK(std::sqrt(num / den) < 1e-6);
  }
}
