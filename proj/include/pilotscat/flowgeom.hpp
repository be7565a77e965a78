#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "pilotscat/wavefield.hpp"

namespace pilotscat {

struct Velocity {
  double vz = 0.0;  // [nm/fs]
  double vR = 0.0;
};

// v = (hbar/m) Im(grad psi / psi). Throws NodalSingularity when |psi| < 1e-30.
Velocity velocity(const CylPoint& p, double t, const WaveModel& model);

// Q = -(hbar^2 / 2m) lap|psi| / |psi| [eV], axisymmetric Laplacian.
double quantum_potential(const CylPoint& p, double t, const WaveModel& model);

inline constexpr double nodal_threshold = 1e-30;

// ---- separator |psi_in| = |psi_out|

enum class Topology { open_pair, closed };
std::string to_string(Topology t);

struct SeparatorOptions {
  // Crossings where both amplitudes are below significance * |B(t)| are ignored.
  double significance = 1e-4;
  // Ray scan step; 0 selects min(l, D) / 20.
  double step = 0.0;
  // Ray extent; 0 selects automatic bounds from the packet geometry.
  double r_min = 0.0;
  double r_max = 0.0;
};

struct SeparatorSample {
  double theta = 0.0;
  double r = 0.0;
};

struct SeparatorCurve {
  double t = 0.0;
  std::vector<SeparatorSample> samples;  // sorted by theta; rays without a root are omitted
  std::vector<double> gaps;              // theta values with no root
  Topology topology = Topology::open_pair;
};

// Innermost significant root along the ray at angle theta. Throws NoRoot.
double separator_radius(double theta, double t, const WaveModel& model, const SeparatorOptions& opt = {});

// n points evenly spaced in [0.01, pi - 0.01].
std::vector<double> default_theta_grid(int n = 512);

// Closed when both end rays of the grid have a root.
SeparatorCurve separator_curve(double t, const WaveModel& model, const std::vector<double>& theta_grid,
                               const SeparatorOptions& opt = {});

// Bisection on the topology over [t_open, t_closed]; returns the bracket midpoint.
double separator_transition_time(double t_open, double t_closed, const WaveModel& model,
                                 const std::vector<double>& theta_grid, double tol = 1.0,
                                 const SeparatorOptions& opt = {});

// ---- nodal points and vortices

struct NodalWindow {
  double theta_min = 0.0;
  double theta_max = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  int samples = 64;  // separator rays across the window
  std::size_t max_nodes = 4096;
};

// A zero of psi. The position is base + (dz, dR); base is a double point
// and the offset keeps the sub-ulp part, so re-evaluating at the sum in
// extended precision reproduces the zero.
struct NodalPoint {
  CylPoint point;  // rounded position
  CylPoint base;
  double dz = 0.0;
  double dR = 0.0;
  long qbar = 0;          // fringe index: k0 (r - z) + arg(A_out / A_in) = (2 qbar + 1) pi
  double residual = 0.0;  // |psi| / |A_in| at the node
};

// Nodes on the separator inside the window, polished by Newton on
// (Re psi, Im psi) to |psi| < 1e-12 |A_in|. Ordered by theta.
std::vector<NodalPoint> nodal_points(double t, const WaveModel& model, const NodalWindow& window);

enum class NodalClass { attractor, center, repellor };
std::string to_string(NodalClass c);

struct VortexComplex {
  NodalPoint nodal;
  CylPoint xpoint;
  double x_dz = 0.0;  // X-point offset from the node [nm]
  double x_dR = 0.0;
  double lambda_plus = 0.0;  // [fs^-1]
  double lambda_minus = 0.0;
  std::array<double, 2> eigvec_plus{};  // (z, R) unit vectors
  std::array<double, 2> eigvec_minus{};
  double R_X = 0.0;  // [nm]
  NodalClass nodal_class = NodalClass::center;
  double circulation = 0.0;  // loop integral of v around the node [nm^2/fs]
  double flux = 0.0;         // outward flux of v through the same loop [nm^2/fs]
};

// Locates the X-point by Newton on v = 0 seeded around the node and
// decomposes the flow Jacobian there. Throws XPointNotFound.
VortexComplex vortex_analysis(const NodalPoint& nodal, double t, const WaveModel& model);

// 1 / (D k0^2)
double vortex_size_estimate(const WaveModel& model);

}  // namespace pilotscat
