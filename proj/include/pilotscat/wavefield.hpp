#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pilotscat/bragg.hpp"
#include "pilotscat/units.hpp"

namespace pilotscat {

using cplx = std::complex<double>;

// Incident packet. Lengths in nm, mass in electron masses.
struct BeamSpec {
  double k0 = 0.0;    // mean wavenumber [nm^-1]
  double l = 0.0;     // longitudinal coherence length [nm]
  double D = 0.0;     // transverse coherence length [nm]
  double l0 = 0.0;    // distance of the packet centre from the target at t = 0 [nm]
  double Z1 = -1.0;   // projectile charge number
  double mass = 1.0;  // [m_e]

  double hbar_over_m() const { return units::hbar_over_me_nm2_fs / mass; }
  double v0() const { return hbar_over_m() * k0; }
  double sigma_parallel() const { return 1.0 / l; }
  double sigma_perp() const { return 1.0 / D; }
  // k0 exceeds both momentum-space widths by at least two decades.
  bool fast_packet() const;

  // Throws ValidationError listing every violated invariant.
  void validate() const;
};

struct TargetSpec {
  double Z = 79.0;      // nuclear charge number
  double a = 0.0;       // lattice constant [nm]
  double d = 0.0;       // thickness [nm]
  double deltaA = 0.0;  // oscillation amplitude as a fraction of a
  int Nperp = 0;        // transverse atom count; 0 derives it from D
  double r0 = 0.05;     // screening length [nm]

  int Nz() const;
  int transverse_count(double D) const;
  double density() const { return 1.0 / (a * a * a); }
  void validate() const;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

// Atom positions on the inclusive grid n = -N/2, -N/2 + 1, ..., N/2 per axis
// (N + 1 sites, half-integer indices when N is odd), each displaced by a
// uniform offset in [-0.5, 0.5] * deltaA * a per axis.
struct Lattice {
  std::vector<Vec3> positions;
  std::uint64_t seed = 0;
};

Lattice build_lattice(const TargetSpec& target, std::uint64_t seed, int Nperp);
Lattice build_lattice(const TargetSpec& target, std::uint64_t seed);

// Meridian-plane point (phi = 0).
struct CylPoint {
  double z = 0.0;
  double R = 0.0;

  double r() const;
  double theta() const;
};

enum class WaveMode { free, diffuse, bragg, semiclassical };

std::string to_string(WaveMode mode);
WaveMode wave_mode_from_string(const std::string& name);

struct WaveModel {
  BeamSpec beam;
  std::optional<TargetSpec> target;
  WaveMode mode = WaveMode::diffuse;
  double c3 = 0.3;
  double c4 = 0.8;
  bool exact_spreading = false;

  // Derived at construction.
  double coupling = 0.0;           // C = m Z1 Z q_e^2 / (4 pi eps0 hbar^2) [nm^-1]
  double diffuse_amplitude = 0.0;  // (D/a) sqrt(d/a)
  BraggTable bragg;

  double hbar_over_m() const { return beam.hbar_over_m(); }
  double v0() const { return beam.v0(); }
  double k0() const { return beam.k0; }
};

struct ModelOptions {
  double c3 = 0.3;
  double c4 = 0.8;
  bool exact_spreading = false;
  // Overrides the coupling constant (used for C -> 0 controls).
  std::optional<double> coupling;
};

WaveModel make_model(const BeamSpec& beam, std::optional<TargetSpec> target, WaveMode mode,
                     const ModelOptions& options = {});

struct ComplexField {
  cplx value;
  cplx grad_z;
  cplx grad_R;
};

ComplexField eval_psi_in(const CylPoint& p, double t, const WaveModel& model);
ComplexField eval_psi_out(const CylPoint& p, double t, const WaveModel& model);
ComplexField eval_psi(const CylPoint& p, double t, const WaveModel& model);

// log|psi_in| and log|psi_out| without under/overflow; log|psi_out| is -inf
// when the outgoing wave vanishes identically.
struct LogAmplitudes {
  double in = 0.0;
  double out = 0.0;
};
LogAmplitudes log_amplitudes(const CylPoint& p, double t, const WaveModel& model);

// log|B(t)|, the amplitude of the ingoing packet centre.
double log_peak_amplitude(double t, const WaveModel& model);

// Near-target prefactor fit f(r, theta) [nm].
double eval_f_geom(double r, double theta, const WaveModel& model);

// Envelope-weighted coherent sum over the lattice atoms in the meridian
// plane direction theta of p. Cost is O(number of atoms).
cplx eval_S_eff_direct(const Lattice& lattice, const CylPoint& p, double t, const WaveModel& model);

// Radial pulse profile for D >> l at offset xi = r + l0 - v0 t.
double pulse_profile_I(double xi, double r, double theta, double D);
// Large-r asymptote exp(-xi^2 / (2 sin^2 theta D^2)).
double pulse_profile_asymptote(double xi, double theta, double D);

// Single-nucleus impact-parameter model. Lengths in fm, time in fs.
struct SemiclassicalParams {
  double k0 = 1.0;     // [fm^-1]
  double D = 10.0;     // [fm]
  double l = 10.0;     // [fm]
  double Z1 = 2.0;
  double Z = 79.0;
  double mass = 7.1e3;  // [m_e]
  bool exact_spreading = true;

  double hbar_over_m() const { return units::hbar_over_me_fm2_fs / mass; }
  double v0() const { return hbar_over_m() * k0; }
  // m Z1 Z q_e^2 / (4 pi eps0 hbar^2) [fm^-1]
  double coupling() const { return units::coupling_per_unit_fm * mass * Z1 * Z; }
  // m D^2 / hbar [fs]
  double decoherence_time() const { return D * D / hbar_over_m(); }
  void validate() const;
};

struct ComplexField3 {
  cplx value;
  std::array<cplx, 3> grad;  // d/dx, d/dy, d/dz
};

// psi_in centred at x = b, plus the spherical outgoing wave damped by
// exp(-b^2 / (2 (D^2 + i hbar t / m))). p is (x, y, z) [fm].
ComplexField3 eval_psi_semiclassical(const std::array<double, 3>& p, double t, double b,
                                     const SemiclassicalParams& params);

}  // namespace pilotscat
