#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "pilotscat/flowgeom.hpp"
#include "pilotscat/integrator.hpp"
#include "pilotscat/wavefield.hpp"

namespace pilotscat {

struct TrajSample {
  double t = 0.0;  // [fs]
  double z = 0.0;  // [nm]
  double R = 0.0;
};

// Surfaces whose crossings are recorded as events.
enum class SurfaceKind { plane_z, sphere, separator };

struct Surface {
  SurfaceKind kind = SurfaceKind::plane_z;
  double value = 0.0;  // plane: z; sphere: radius; separator: unused
  static Surface plane(double z) { return {SurfaceKind::plane_z, z}; }
  static Surface sphere(double r) { return {SurfaceKind::sphere, r}; }
  static Surface separator() { return {SurfaceKind::separator, 0.0}; }
};

struct TrajEvent {
  std::size_t surface = 0;  // index into IntegratorOptions::surfaces
  double t = 0.0;
  double z = 0.0;
  double R = 0.0;
};

enum class TrajStatus { ok, nodal_singularity, step_underflow, step_limit };
std::string to_string(TrajStatus s);

struct Trajectory {
  std::vector<TrajSample> samples;  // strictly monotone in t, R >= 0
  std::vector<TrajEvent> events;
  TrajStatus status = TrajStatus::ok;
  std::string message;
  std::size_t steps = 0;

  bool ok() const { return status == TrajStatus::ok; }
  const TrajSample& final() const { return samples.back(); }
};

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-6;   // [nm]
  double h_min = 1e-14;  // [fs]
  std::size_t max_steps = 50'000'000;
  // Output spacing; 0 records every accepted step.
  double sample_dt = 0.0;
  std::vector<Surface> surfaces;
  double event_tol = 1e-3;  // [fs]
  // Known nodal points; inside vortex_window of one, the step is kept to
  // 0.1 x (distance to the node) / speed. 0 selects 1e3 / (D k0^2).
  std::vector<CylPoint> nodes;
  double vortex_window = 0.0;
};

// Pilot-wave trajectory from init at t0 to t1 (t1 < t0 integrates
// backwards). Failures stop the integration and are reported in status,
// with the partial path kept.
Trajectory integrate_trajectory(const CylPoint& init, double t0, double t1, const WaveModel& model,
                                const IntegratorOptions& opt = {});

// Position at time t by linear interpolation between samples. Throws
// DomainError outside the recorded time span.
TrajSample sample_at(const Trajectory& tr, double t);

// ---- swarms

struct GridSpec {
  double z_min = 0.0, z_max = 0.0;
  double R_min = 0.0, R_max = 0.0;
  int nz = 25, nR = 25;

  double dz() const { return nz > 1 ? (z_max - z_min) / (nz - 1) : 0.0; }
  double dR() const { return nR > 1 ? (R_max - R_min) / (nR - 1) : 0.0; }
  std::size_t size() const { return static_cast<std::size_t>(nz) * static_cast<std::size_t>(nR); }
  // trajectory index of grid node (iz, iR)
  std::size_t index(int iz, int iR) const { return static_cast<std::size_t>(iz) * nR + iR; }
  CylPoint point(int iz, int iR) const;
};

// z0 in [-l0 - 2l, -l0 + 2l], R0 in [D/100, 4D], 25 x 25.
GridSpec default_grid(const BeamSpec& beam);

struct Ensemble {
  GridSpec grid;
  double t0 = 0.0, t1 = 0.0;
  std::vector<CylPoint> init;
  std::vector<double> weights;  // normalized to sum 1
  double coverage = 0.0;        // sum of |psi_in|^2 2 pi R0 dR0 dz0 before normalization
  std::vector<Trajectory> trajectories;
  std::size_t failures = 0;
};

Ensemble run_swarm(const GridSpec& grid, double t0, double t1, const WaveModel& model,
                   const IntegratorOptions& opt = {});

// ---- initial-condition loci

struct LocusLine {
  double theta = 0.0;
  double R_c = 0.0;    // [nm]
  double slope = 0.0;  // dR0 / dz0
  double g = 0.0;      // 2 sin(theta) / (1 - cos(theta))
  double z_c = 0.0;    // -l0

  double R_at(double z0) const { return R_c + slope * (z0 - z_c); }
};

// Residual of the encounter condition for a straight trajectory started at
// (z0, R0) meeting the separator at angle theta:
//   -(l^2 g / 4D^2) R0 + R0 / g + z0 + l0 - (l^2 g / 2 R0) ln(|C S| g / (2 k0^2 R0)).
double locus_residual(double R0, double z0, double theta, const WaveModel& model);

// R_c is a root of the residual at z0 = -l0. With several roots, the one
// whose encounter point (t_coll, R0 / sin(theta)) is nearest the exact
// separator radius at t_coll; the outermost if no separator is found.
// Throws RegimeViolation when l^2 g^2 / (4 D^2) < 10, NoRoot if none exists.
LocusLine initial_locus(double theta, const WaveModel& model);

// ---- continuity check

struct RadialCurve {
  double theta = 0.0;
  std::vector<double> r;  // [nm]
  std::vector<double> P;  // normalized so that the trapezoid integral over r is 1
  std::size_t preimages = 0;
  std::size_t degenerate = 0;  // contributions skipped with |J| < 1e-12
};

struct RadialOptions {
  double r_min = 0.0, r_max = 0.0;  // 0, 0: from the ensemble's final radii
  int nr = 200;
  // Evaluation time; NaN uses the final samples.
  double t = std::numeric_limits<double>::quiet_NaN();
};

// Transported density P(r; theta) = N(theta) |psi_in(z0, R0)|^2 R0 / |J| with
// r(z0, R0), theta(z0, R0) interpolated per grid cell by
// A0 + A1 dz + A2 dR + A3 dz dR. Cells touching a failed trajectory are
// skipped. Throws InsufficientStatistics if no cell reaches theta.
std::vector<RadialCurve> radial_distribution(const Ensemble& ens, const WaveModel& model,
                                             const std::vector<double>& thetas, const RadialOptions& opt = {});

// Direct profile |psi_out(r, theta, t)|^2 r^2 on the same r grid, normalized alike.
RadialCurve direct_radial_profile(double theta, double t, const WaveModel& model, const std::vector<double>& r);

}  // namespace pilotscat
