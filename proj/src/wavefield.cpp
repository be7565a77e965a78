#include "pilotscat/wavefield.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pilotscat/detail/amplitude.hpp"
#include "pilotscat/errors.hpp"
#include "pilotscat/jet.hpp"

namespace pilotscat {

namespace {

using J1 = Jet<double, 2, 1>;

void check_point(const CylPoint& p) {
  if (!(p.R >= 0.0) || !std::isfinite(p.z) || !std::isfinite(p.R)) throw DomainError("point must have finite z and R >= 0");
}

ComplexField to_field(const Jet<cplx, 2, 1>& j) { return {j.v, j.d[0], j.d[1]}; }

}  // namespace

bool BeamSpec::fast_packet() const { return k0 >= 100.0 * std::max(1.0 / l, 1.0 / D); }

void BeamSpec::validate() const {
  std::ostringstream os;
  if (!(k0 > 0.0)) os << "k0 must be > 0; ";
  if (!(l > 0.0)) os << "l must be > 0; ";
  if (!(D > 0.0)) os << "D must be > 0; ";
  if (!(l0 > 0.0)) os << "l0 must be > 0; ";
  if (!(mass > 0.0)) os << "mass must be > 0; ";
  if (Z1 == 0.0) os << "Z1 must be nonzero; ";
  if (l > 0.0 && D > 0.0 && k0 > 0.0 && !fast_packet()) os << "k0 must be >= 100 max(1/l, 1/D); ";
  if (l > 0.0 && l0 > 0.0 && l0 < 3.0 * l) os << "l0 must be >= 3 l (packet must start outside the target); ";
  if (!os.str().empty()) throw ValidationError("beam: " + os.str());
}

int TargetSpec::Nz() const { return static_cast<int>(std::lround(d / a)); }

int TargetSpec::transverse_count(double D) const {
  if (Nperp > 0) return Nperp;
  // Even, and covering the transverse Gaussian to about 3 D on each side.
  int n = static_cast<int>(std::ceil(6.0 * D / a));
  return n + (n % 2);
}

void TargetSpec::validate() const {
  std::ostringstream os;
  if (!(Z > 0.0)) os << "Z must be > 0; ";
  if (!(a > 0.0)) os << "a must be > 0; ";
  if (!(d > 0.0)) os << "d must be > 0; ";
  if (!(deltaA >= 0.0 && deltaA < 0.5)) os << "deltaA must be in [0, 0.5); ";
  if (Nperp < 0) os << "Nperp must be >= 0; ";
  if (!(r0 > 0.0)) os << "r0 must be > 0; ";
  if (a > 0.0 && d > 0.0 && Nz() < 1) os << "d must be at least a; ";
  if (!os.str().empty()) throw ValidationError("target: " + os.str());
}

void SemiclassicalParams::validate() const {
  std::ostringstream os;
  if (!(k0 > 0.0)) os << "k0 must be > 0; ";
  if (!(D > 0.0)) os << "D must be > 0; ";
  if (!(l > 0.0)) os << "l must be > 0; ";
  if (!(mass > 0.0)) os << "mass must be > 0; ";
  if (!os.str().empty()) throw ValidationError("semiclassical: " + os.str());
}

Lattice build_lattice(const TargetSpec& target, std::uint64_t seed, int Nperp) {
  Lattice lat;
  lat.seed = seed;
  const int nz = target.Nz();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double amp = target.deltaA * target.a;
  lat.positions.reserve(static_cast<std::size_t>(Nperp + 1) * (Nperp + 1) * (nz + 1));
  for (int iz = 0; iz <= nz; ++iz) {
    const double z = (iz - 0.5 * nz) * target.a;
    for (int ix = 0; ix <= Nperp; ++ix) {
      const double x = (ix - 0.5 * Nperp) * target.a;
      for (int iy = 0; iy <= Nperp; ++iy) {
        const double y = (iy - 0.5 * Nperp) * target.a;
        Vec3 p{x, y, z};
        if (amp > 0.0) {
          p.x += amp * u(rng);
          p.y += amp * u(rng);
          p.z += amp * u(rng);
        }
        lat.positions.push_back(p);
      }
    }
  }
  return lat;
}

Lattice build_lattice(const TargetSpec& target, std::uint64_t seed) {
  return build_lattice(target, seed, target.Nperp > 0 ? target.Nperp : 2);
}

double CylPoint::r() const { return std::hypot(z, R); }
double CylPoint::theta() const { return std::atan2(R, z); }

std::string to_string(WaveMode mode) {
  switch (mode) {
    case WaveMode::free:
      return "free";
    case WaveMode::diffuse:
      return "diffuse";
    case WaveMode::bragg:
      return "bragg";
    case WaveMode::semiclassical:
      return "semiclassical";
  }
  return "?";
}

WaveMode wave_mode_from_string(const std::string& name) {
  if (name == "free") return WaveMode::free;
  if (name == "diffuse") return WaveMode::diffuse;
  if (name == "bragg") return WaveMode::bragg;
  if (name == "semiclassical") return WaveMode::semiclassical;
  throw ValidationError("unknown mode '" + name + "'");
}

WaveModel make_model(const BeamSpec& beam, std::optional<TargetSpec> target, WaveMode mode,
                     const ModelOptions& options) {
  beam.validate();
  if (mode == WaveMode::semiclassical) throw ValidationError("semiclassical mode uses SemiclassicalParams");
  if (mode != WaveMode::free && !target) throw ValidationError("mode " + to_string(mode) + " requires a target");
  if (target) target->validate();
  WaveModel m;
  m.beam = beam;
  m.target = target;
  m.mode = mode;
  m.c3 = options.c3;
  m.c4 = options.c4;
  m.exact_spreading = options.exact_spreading;
  if (mode == WaveMode::free) {
    m.coupling = 0.0;
  } else {
    m.coupling = options.coupling ? *options.coupling
                                  : units::coupling_per_unit_nm * beam.mass * beam.Z1 * target->Z;
  }
  if (target) {
    m.diffuse_amplitude = (beam.D / target->a) * std::sqrt(target->d / target->a);
    m.bragg = bragg_angles(beam.k0, target->a);
  }
  if (mode == WaveMode::bragg && m.bragg.empty()) throw ValidationError("bragg mode: no Bragg orders for k0 a < pi");
  return m;
}

BraggTable bragg_angles(double k0, double a) {
  if (!(k0 > 0.0) || !(a > 0.0)) throw DomainError("bragg_angles: k0 and a must be positive");
  BraggTable t;
  t.k0 = k0;
  t.a = a;
  const double step = units::pi / (k0 * a);
  for (int q = 1; q * step <= 1.0; ++q) {
    const double s = std::sqrt(q * step);
    const double th = 2.0 * std::asin(std::min(1.0, s));
    t.entries.push_back({q, th, std::sin(th)});
  }
  return t;
}

ComplexField eval_psi_in(const CylPoint& p, double t, const WaveModel& model) {
  check_point(p);
  const auto P = detail::params_of<double>(model, t);
  const J1 z = J1::variable(p.z, 0);
  const J1 R = J1::variable(p.R, 1);
  return to_field(detail::amplitude_in(P, z, R) * detail::expi(z * P.k0));
}

ComplexField eval_psi_out(const CylPoint& p, double t, const WaveModel& model) {
  check_point(p);
  if (p.r() == 0.0) throw DomainError("eval_psi_out: r = 0");
  const auto P = detail::params_of<double>(model, t);
  const J1 z = J1::variable(p.z, 0);
  const J1 R = J1::variable(p.R, 1);
  const J1 r = sqrt(z * z + R * R);
  return to_field(detail::amplitude_out(P, model.bragg, z, R, r) * detail::expi(r * P.k0));
}

ComplexField eval_psi(const CylPoint& p, double t, const WaveModel& model) {
  check_point(p);
  if (p.r() == 0.0) throw DomainError("eval_psi: r = 0");
  const auto P = detail::params_of<double>(model, t);
  const J1 z = J1::variable(p.z, 0);
  const J1 R = J1::variable(p.R, 1);
  return to_field(detail::psi_total(P, model.bragg, z, R));
}

double log_peak_amplitude(double t, const WaveModel& model) {
  const auto P = detail::params_of<double>(model, t);
  return std::log(std::abs(P.B));
}

LogAmplitudes log_amplitudes(const CylPoint& p, double t, const WaveModel& model) {
  const auto P = detail::params_of<double>(model, t);
  const double logB = std::log(std::abs(P.B));
  // Re(-x^2 / (2 (w^2 + i tau))) = -x^2 w^2 / (2 (w^4 + tau^2))
  auto gexp = [&](double x, double w) { return -0.5 * x * x * w * w / (w * w * w * w + P.tau * P.tau); };
  const double shift = P.l0 - P.v0 * P.t;
  LogAmplitudes out;
  out.in = logB + gexp(p.R, P.D) + gexp(p.z + shift, P.l);
  if (model.mode == WaveMode::free || model.coupling == 0.0) {
    out.out = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double r = p.r();
  const double f = detail::fit_function(P, p.z, p.R, r);
  double lo = logB + std::log(std::abs(P.coupling)) + gexp(r + shift, P.l) + std::log(f);
  if (model.mode == WaveMode::bragg) {
    lo += std::log(2.0 * P.D / P.a) + std::log(std::abs(detail::bragg_bracket(P, model.bragg, p.z, p.R, r)));
  } else {
    lo += std::log(P.sd);
  }
  out.out = lo;
  return out;
}

double eval_f_geom(double r, double theta, const WaveModel& model) {
  if (!(r > 0.0)) throw DomainError("eval_f_geom: r must be > 0");
  if (!(theta > 0.0 && theta <= units::pi)) throw DomainError("eval_f_geom: theta must be in (0, pi]");
  const auto P = detail::params_of<double>(model, 0.0);
  return detail::fit_function(P, r * std::cos(theta), r * std::sin(theta), r);
}

cplx eval_S_eff_direct(const Lattice& lattice, const CylPoint& p, double t, const WaveModel& model) {
  const double r = p.r();
  if (!(r > 0.0)) throw DomainError("eval_S_eff_direct: r must be > 0");
  const double st = p.R / r;
  const double ct = p.z / r;
  const double k0 = model.beam.k0;
  const double hm = model.hbar_over_m();
  const double tau = model.exact_spreading ? hm * t : 0.0;
  const cplx Dc(model.beam.D * model.beam.D, tau);
  const cplx Lc(model.beam.l * model.beam.l, tau);
  const double xi0 = r + model.beam.l0 - model.v0() * t;
  cplx sum = 0.0;
  for (const auto& a : lattice.positions) {
    const double rj2 = a.x * a.x + a.y * a.y + a.z * a.z;
    const double path = -(a.x * st + a.z * ct) + a.z + rj2 / (2.0 * r);
    const double Rj2 = a.x * a.x + a.y * a.y;
    const double xi = xi0 + path;
    sum += std::exp(cplx(0.0, k0 * path) - Rj2 / (2.0 * Dc) - xi * xi / (2.0 * Lc));
  }
  return sum;
}

double pulse_profile_asymptote(double xi, double theta, double D) {
  const double s = std::sin(theta);
  return std::exp(-xi * xi / (2.0 * s * s * D * D));
}

double pulse_profile_I(double xi, double r, double theta, double D) {
  if (!(theta > 0.0 && theta < units::pi)) throw DomainError("pulse_profile_I: theta must be in (0, pi)");
  if (!(D > 0.0)) throw DomainError("pulse_profile_I: D must be > 0");
  const double s = std::sin(theta);
  const double disc = s * s - 2.0 * xi / r;
  if (!(disc > 0.0)) return 0.0;
  const double sq = std::sqrt(disc);
  const double rmin = std::abs(r * (s - sq));
  const double rmax = r * (s + sq);
  // 1 - (R/2r + xi/R)^2 / sin^2 = (R^2 - Rmin^2)(Rmax - R)(R + Rmax) / (2 r R sin)^2;
  // the substitutions below absorb the vanishing factors analytically.
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double span = rmax - rmin;
  const double cut = 15.0 * D;
  auto gauss = [&](double R) { return std::exp(-R * R / (2.0 * D * D)); };
  if (span <= 2.0 * cut) {
    // R = Rmin + span (1 - cos phi) / 2
    auto f = [&](double phi) {
      const double R = rmin + 0.5 * span * (1.0 - std::cos(phi));
      return 2.0 * r * R * gauss(R) / std::sqrt((R + rmin) * (R + rmax));
    };
    return GK::integrate(f, 0.0, units::pi, 15, 1e-8);
  }
  // Only the neighbourhood of Rmin carries weight: R = Rmin + u^2.
  auto f = [&](double u) {
    const double R = rmin + u * u;
    return 4.0 * r * R * gauss(R) / std::sqrt((R + rmin) * (rmax - R) * (R + rmax));
  };
  return GK::integrate(f, 0.0, std::sqrt(cut), 15, 1e-8);
}

ComplexField3 eval_psi_semiclassical(const std::array<double, 3>& p, double t, double b,
                                     const SemiclassicalParams& sp) {
  using J = Jet<double, 3, 1>;
  using JC = Jet<cplx, 3, 1>;
  const J x = J::variable(p[0], 0);
  const J y = J::variable(p[1], 1);
  const J z = J::variable(p[2], 2);
  const double r0 = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  if (!(r0 > 0.0)) throw DomainError("eval_psi_semiclassical: r = 0");
  const double hm = sp.hbar_over_m();
  const double v0 = sp.v0();
  const double k0 = sp.k0;
  const double tau = sp.exact_spreading ? hm * t : 0.0;
  const cplx Dc(sp.D * sp.D, tau);
  const cplx Lc(sp.l * sp.l, tau);
  const cplx A = sp.D / std::sqrt(units::pi) / Dc * std::sqrt(sp.l) / std::pow(units::pi, 0.25) * std::sqrt(sp.l / Lc);
  const cplx g = -0.5 / Dc;
  const double wphase = -0.5 * hm * k0 * k0 * t;
  const J xb = x - b;
  const JC in = exp((xb * xb + y * y + (z - v0 * t) * (z - v0 * t)) * g) * detail::expi(z * k0 + wphase) * A;
  const J r = sqrt(x * x + y * y + z * z);
  // r - z without cancellation on the forward side.
  const J rmz = p[2] > 0.0 ? (x * x + y * y) / (r + z) : r - z;
  const J rv = r - v0 * t;
  const JC out = exp((rv * rv + b * b) * g) * detail::expi(r * k0 + wphase) / rmz * (-A * sp.coupling() / (k0 * k0));
  const JC psi = in + out;
  return {psi.v, {psi.d[0], psi.d[1], psi.d[2]}};
}

}  // namespace pilotscat
