#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pilotscat/trajectories.hpp"
#include "pilotscat/wavefield.hpp"

namespace pilotscat {

// Impact-parameter runs. Lengths in fm, time in fs.
struct SemiclassicalSpec {
  SemiclassicalParams params;
  std::vector<double> b_list{10.0, 12.0, 15.0};  // [fm]
  // Run window; NaN selects -/+ m D^2 / hbar. |t| may not exceed m D^2 / hbar.
  double t0 = std::numeric_limits<double>::quiet_NaN();
  double t1 = std::numeric_limits<double>::quiet_NaN();
  // cloud > 1 adds a cloud x cloud grid of starts in the x-z plane within
  // +-cloud_halfwidth D of each packet centre; the centre path is always first.
  int cloud = 0;
  double cloud_halfwidth = 1.0;
  double rtol = 1e-9;
  double atol = 1e-9;  // [fm]
  int samples = 400;   // stored points per path

  double start_time() const;
  double end_time() const;
  // Throws ValidationError listing every violated invariant.
  void validate() const;
};

struct PlaneSample {
  double t = 0.0;
  double x = 0.0;
  double z = 0.0;
};

struct RutherfordPath {
  double b = 0.0;
  double x0 = 0.0, z0 = 0.0;
  double weight = 0.0;  // |psi(x0, 0, z0, t0)|^2, normalized per b
  std::vector<PlaneSample> samples;
  TrajStatus status = TrajStatus::ok;
  std::string message;
  // Direction of the final displacement over the last tenth of the run,
  // measured from the beam axis [rad].
  double deflection = 0.0;

  bool ok() const { return status == TrajStatus::ok; }
};

struct RutherfordRun {
  SemiclassicalSpec spec;
  // paths[i] belongs to spec.b_list[i]; paths[i][0] starts at the packet centre
  std::vector<std::vector<RutherfordPath>> paths;
};

// Bohm velocity in the y = 0 plane [fm/fs].
std::array<double, 2> semiclassical_velocity(double x, double z, double t, double b, const SemiclassicalParams& p);

RutherfordRun run_rutherford(const SemiclassicalSpec& spec);

struct DeflectionReport {
  std::vector<double> b;
  std::vector<double> centre;         // deflection of the centre path
  std::vector<double> most_probable;  // weighted mode over each cloud (centre path alone without a cloud)
  std::vector<double> classical;      // 2 atan(Z1 Z e^2 / (4 pi eps0 2 E b))
  std::optional<double> spearman;     // rank correlation of most_probable against b; needs >= 3 values
};

DeflectionReport deflection_vs_b(const RutherfordRun& run, int bins = 90);

// Classical Rutherford angle 2 atan(C / (k0^2 b)) with C the coupling.
double classical_deflection(double b, const SemiclassicalParams& p);

// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// True if the two polylines intersect in the x-z plane at any times
// (shared endpoints excluded).
bool paths_cross(const RutherfordPath& a, const RutherfordPath& b);

// Smallest equal-time distance between two paths sampled on the same time
// grid, with linear motion between samples [fm]. Uniqueness of the flow
// keeps this positive for paths guided by the same wavefunction.
double min_separation(const RutherfordPath& a, const RutherfordPath& b);

}  // namespace pilotscat
