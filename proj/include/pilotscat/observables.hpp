#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pilotscat/bragg.hpp"
#include "pilotscat/trajectories.hpp"
#include "pilotscat/wavefield.hpp"

namespace pilotscat {

// ---- angular distributions

struct AngularHistogram {
  std::vector<double> edges;           // nbins + 1 [rad]
  std::vector<double> weight;          // normalized to sum 1
  std::vector<double> weight_sq;       // sum of squared normalized weights per bin
  std::vector<std::size_t> count;

  std::size_t bins() const { return weight.size(); }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  double width() const { return edges.size() > 1 ? edges[1] - edges[0] : 0.0; }
  // bin containing theta, or -1
  long bin_of(double theta) const;
};

// Weighted histogram of final angles (or angles at time t when t is given).
// Failed trajectories are left out.
AngularHistogram angular_distribution(const Ensemble& ens, int bins, double theta_min = 0.0,
                                      double theta_max = units::pi);
AngularHistogram angular_distribution_at(const Ensemble& ens, double t, int bins, double theta_min = 0.0,
                                         double theta_max = units::pi);

struct HistogramPeak {
  std::size_t bin = 0;
  double theta = 0.0;
  double prominence = 0.0;
  double noise = 0.0;  // Poisson estimate sqrt(sum w^2) of the bin
  bool significant = false;
};

// Local maxima; prominence is measured against the higher of the two
// lowest bins within `reach` bins on either side. Significant when the
// prominence exceeds nsigma * noise.
std::vector<HistogramPeak> histogram_peaks(const AngularHistogram& h, int reach = 3, double nsigma = 2.0);

struct BraggMatch {
  int q = 0;
  double theta_q = 0.0;
  bool matched = false;  // significant peak within one bin
  double nearest_peak = 0.0;
};

// For each Bragg angle above theta_cut, looks for a significant peak within one bin.
std::vector<BraggMatch> match_bragg_peaks(const AngularHistogram& h, const BraggTable& table, double theta_cut = 0.15,
                                          double nsigma = 2.0);

// ---- arrival times

enum class ArrivalKind { analytic_longitudinal, analytic_transverse, empirical };
std::string to_string(ArrivalKind k);

struct ArrivalDistribution {
  ArrivalKind kind = ArrivalKind::analytic_longitudinal;
  double center = 0.0;  // [fs]
  double sigma = 0.0;   // standard deviation [fs]
  double theta = 0.0;
  double l_D = 0.0;
  // transverse regime at small angles: the longitudinal floor was applied
  bool floored = false;
  // empirical only
  std::vector<double> t;       // bin centres
  std::vector<double> weight;  // normalized to sum 1
  std::size_t members = 0;

  // Normalized Gaussian density (analytic) at time t.
  double density(double t) const;
};

// Gaussian arrival law at a detector at distance l_D. The exponent
// -(l_D + l0 - v0 t)^2 / L^2 gives sigma = L / (sqrt 2 v0) with L = l for
// l >= D and L = sin(theta) D otherwise; in the transverse regime the
// result is max(transverse, longitudinal) and `floored` marks the floor.
// Throws RegimeViolation unless l_D >= 3 max(l, D).
ArrivalDistribution arrival_distribution_analytic(double theta, double l_D, const WaveModel& model);

// Detector-sphere crossing times of ensemble members inside the cone
// |theta_event - theta| <= dtheta. The ensemble must have been integrated
// with Surface::sphere(l_D); the last outward crossing is used. Throws
// InsufficientStatistics with fewer than min_members contributing members.
ArrivalDistribution arrival_distribution_empirical(const Ensemble& ens, double theta, double dtheta, double l_D,
                                                   int bins = 40, std::size_t min_members = 30);

// ---- times of flight

// Locus constant R0(C0), C0 = 2 k0^2 / (|C| sqrt(d / a^3)).
double tof_locus_constant(const WaveModel& model);

// T(theta1) - T(theta2) = D R0 / v0 [tan(theta2 / 2) - tan(theta1 / 2)] [fs].
double tof_difference_bohm(double theta1, double theta2, const WaveModel& model);

// Locus-averaged flight time from the plane S1 (a distance l1 downstream
// of the packet centre) to the sphere r = l0 [fs]:
// T = int 2 pi R |psi_in(z_L(R), R, 0)|^2 t(R) dR / int 2 pi R |psi_in|^2 dR,
// t(R) = (R / tan(theta) + 2 l0 - l1 - R / sin(theta)) / v0.
double tof_mean(double theta, const WaveModel& model, double l1);

// Semiclassical (sum-over-histories) estimate
// |Z Z1| e^2 / (2 pi eps0 m v0^3) ln(sin(theta2 / 2) / sin(theta1 / 2)) [fs].
// signed_charge uses -Z Z1 instead of |Z Z1|.
double tof_difference_histories(double theta1, double theta2, const BeamSpec& beam, double Z, double Z1,
                                bool signed_charge = false);

// Kijowski estimate: both mean arrival times are angle independent.
double tof_difference_kijowski(double theta1, double theta2);

// One-dimensional momentum-space Gaussian c(k) ~ exp(-(k - k0)^2 / (2 sigma^2) - i k z0),
// normalized so that int |psi(z)|^2 dz = 1.
struct KijowskiPacket {
  double k0 = 0.0;     // [nm^-1]
  double sigma = 0.0;  // [nm^-1]
  double z0 = 0.0;     // [nm]
  double hbar_over_m = units::hbar_over_me_nm2_fs;
};

// Arrival density Pi(T, z) from the k > 0 branch; the k < 0 branch is
// O(exp(-k0^2 / sigma^2)) and omitted. [1 / fs]
double kijowski_density(double T, double z, const KijowskiPacket& packet);

// Flux (hbar k0 / m) |psi(z, T)|^2 of the same packet. [1 / fs]
double kijowski_flux(double T, double z, const KijowskiPacket& packet);

// ---- swarm times of flight

struct FlightTime {
  double theta = 0.0;  // angle at the S2 crossing
  double time = 0.0;   // [fs]
  double weight = 0.0;
};

// Per-member flight times from the plane z = z1 to the sphere r = r2 (the
// ensemble must carry Surface::sphere(r2)). Members start on straight
// lines at speed v0, so the S1 time is (z1 - z0) / v0; members with
// z0 > z1 or no outward S2 crossing are skipped.
std::vector<FlightTime> flight_times(const Ensemble& ens, const WaveModel& model, double z1, double r2);

// Weighted mean flight time of members within |theta - theta_c| <= dtheta;
// throws InsufficientStatistics if fewer than min_members contribute.
double mean_flight_time(const std::vector<FlightTime>& ft, double theta_c, double dtheta,
                        std::size_t min_members = 3);

}  // namespace pilotscat
