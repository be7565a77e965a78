#include "pilotscat/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "pilotscat/errors.hpp"

namespace pilotscat {

namespace {

constexpr double pi = units::pi;

bool on_sphere(const TrajEvent& e, double radius) {
  return std::abs(std::hypot(e.z, e.R) - radius) <= 1e-3 * radius;
}

AngularHistogram make_histogram(const std::vector<double>& thetas, const std::vector<double>& weights, int bins,
                                double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw DomainError("angular_distribution: need bins >= 1 and theta_max > theta_min");
  AngularHistogram h;
  h.edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) h.edges[i] = lo + (hi - lo) * i / bins;
  h.weight.assign(bins, 0.0);
  h.weight_sq.assign(bins, 0.0);
  h.count.assign(bins, 0);
  double total = 0.0;
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const long b = h.bin_of(thetas[k]);
    if (b < 0) continue;
    h.weight[b] += weights[k];
    h.weight_sq[b] += weights[k] * weights[k];
    ++h.count[b];
    total += weights[k];
  }
  if (total > 0.0) {
    for (auto& w : h.weight) w /= total;
    for (auto& w : h.weight_sq) w /= total * total;
  }
  return h;
}

}  // namespace

long AngularHistogram::bin_of(double theta) const {
  const std::size_t n = bins();
  if (n == 0 || !(theta >= edges.front()) || !(theta <= edges.back())) return -1;
  const double w = width();
  auto b = static_cast<long>((theta - edges.front()) / w);
  return std::clamp<long>(b, 0, static_cast<long>(n) - 1);
}

AngularHistogram angular_distribution(const Ensemble& ens, int bins, double theta_min, double theta_max) {
  std::vector<double> th, w;
  for (std::size_t k = 0; k < ens.trajectories.size(); ++k) {
    const auto& tr = ens.trajectories[k];
    if (!tr.ok()) continue;
    th.push_back(std::atan2(tr.final().R, tr.final().z));
    w.push_back(ens.weights[k]);
  }
  return make_histogram(th, w, bins, theta_min, theta_max);
}

AngularHistogram angular_distribution_at(const Ensemble& ens, double t, int bins, double theta_min,
                                         double theta_max) {
  std::vector<double> th, w;
  for (std::size_t k = 0; k < ens.trajectories.size(); ++k) {
    const auto& tr = ens.trajectories[k];
    if (!tr.ok()) continue;
    const auto s = sample_at(tr, t);
    th.push_back(std::atan2(s.R, s.z));
    w.push_back(ens.weights[k]);
  }
  return make_histogram(th, w, bins, theta_min, theta_max);
}

std::vector<HistogramPeak> histogram_peaks(const AngularHistogram& h, int reach, double nsigma) {
  std::vector<HistogramPeak> peaks;
  const long n = static_cast<long>(h.bins());
  const auto& w = h.weight;
  for (long i = 0; i < n; ++i) {
    const double left = i > 0 ? w[i - 1] : -1.0;
    const double right = i + 1 < n ? w[i + 1] : -1.0;
    // plateaus count once, at their left end
    if (!(w[i] > left && w[i] >= right) || w[i] <= 0.0) continue;
    double lmin = w[i], rmin = w[i];
    for (long j = std::max(0L, i - reach); j < i; ++j) lmin = std::min(lmin, w[j]);
    for (long j = i + 1; j <= std::min(n - 1, i + reach); ++j) rmin = std::min(rmin, w[j]);
    HistogramPeak p;
    p.bin = static_cast<std::size_t>(i);
    p.theta = h.center(i);
    p.prominence = w[i] - std::max(lmin, rmin);
    p.noise = std::sqrt(h.weight_sq[i]);
    p.significant = p.prominence > nsigma * p.noise;
    peaks.push_back(p);
  }
  return peaks;
}

std::vector<BraggMatch> match_bragg_peaks(const AngularHistogram& h, const BraggTable& table, double theta_cut,
                                          double nsigma) {
  const auto peaks = histogram_peaks(h, 3, nsigma);
  std::vector<BraggMatch> out;
  for (const auto& e : table.entries) {
    if (e.theta < theta_cut) continue;
    BraggMatch m;
    m.q = e.q;
    m.theta_q = e.theta;
    const long bq = h.bin_of(e.theta);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : peaks) {
      if (!p.significant) continue;
      if (std::abs(p.theta - e.theta) < std::abs(best - e.theta)) best = p.theta;
      if (bq >= 0 && std::labs(static_cast<long>(p.bin) - bq) <= 1) m.matched = true;
    }
    m.nearest_peak = best;
    out.push_back(m);
  }
  return out;
}

// ---- arrival times

std::string to_string(ArrivalKind k) {
  switch (k) {
    case ArrivalKind::analytic_longitudinal:
      return "analytic-longitudinal";
    case ArrivalKind::analytic_transverse:
      return "analytic-transverse";
    case ArrivalKind::empirical:
      return "empirical";
  }
  return "?";
}

double ArrivalDistribution::density(double tt) const {
  if (!(sigma > 0.0)) return 0.0;
  const double x = (tt - center) / sigma;
  return std::exp(-0.5 * x * x) / (sigma * std::sqrt(2.0 * pi));
}

ArrivalDistribution arrival_distribution_analytic(double theta, double l_D, const WaveModel& model) {
  if (!(theta > 0.0 && theta < pi)) throw DomainError("arrival_distribution_analytic: theta must lie in (0, pi)");
  const auto& b = model.beam;
  if (!(l_D >= 3.0 * std::max(b.l, b.D)))
    throw RegimeViolation("arrival_distribution_analytic: detector distance must be at least 3 max(l, D)");
  const double v0 = model.v0();
  ArrivalDistribution a;
  a.theta = theta;
  a.l_D = l_D;
  a.center = (l_D + b.l0) / v0;
  const double longitudinal = b.l / (std::sqrt(2.0) * v0);
  if (b.l >= b.D) {
    a.kind = ArrivalKind::analytic_longitudinal;
    a.sigma = longitudinal;
  } else {
    a.kind = ArrivalKind::analytic_transverse;
    const double transverse = std::sin(theta) * b.D / (std::sqrt(2.0) * v0);
    a.floored = transverse < longitudinal;
    a.sigma = std::max(transverse, longitudinal);
  }
  return a;
}

ArrivalDistribution arrival_distribution_empirical(const Ensemble& ens, double theta, double dtheta, double l_D,
                                                   int bins, std::size_t min_members) {
  if (bins < 1) throw DomainError("arrival_distribution_empirical: bins must be >= 1");
  std::vector<double> ts, ws;
  for (std::size_t k = 0; k < ens.trajectories.size(); ++k) {
    const auto& tr = ens.trajectories[k];
    if (!tr.ok() || !(ens.weights[k] > 0.0)) continue;
    const TrajEvent* hit = nullptr;
    for (const auto& e : tr.events)
      if (on_sphere(e, l_D)) hit = &e;
    if (!hit) continue;
    if (std::abs(std::atan2(hit->R, hit->z) - theta) > dtheta) continue;
    ts.push_back(hit->t);
    ws.push_back(ens.weights[k]);
  }
  if (ts.size() < min_members)
    throw InsufficientStatistics("arrival_distribution_empirical: " + std::to_string(ts.size()) +
                                 " members in the detector cone");
  ArrivalDistribution a;
  a.kind = ArrivalKind::empirical;
  a.theta = theta;
  a.l_D = l_D;
  a.members = ts.size();
  double W = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    W += ws[i];
    m1 += ws[i] * ts[i];
  }
  a.center = m1 / W;
  double m2 = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) m2 += ws[i] * (ts[i] - a.center) * (ts[i] - a.center);
  a.sigma = std::sqrt(m2 / W);

  const auto [lo_it, hi_it] = std::minmax_element(ts.begin(), ts.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi <= lo) hi = lo + 1.0;
  const double w = (hi - lo) / bins;
  a.t.resize(bins);
  a.weight.assign(bins, 0.0);
  for (int i = 0; i < bins; ++i) a.t[i] = lo + (i + 0.5) * w;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const int b = std::min(bins - 1, static_cast<int>((ts[i] - lo) / w));
    a.weight[b] += ws[i] / W;
  }
  return a;
}

// ---- times of flight

double tof_locus_constant(const WaveModel& model) {
  if (!model.target) throw DomainError("tof_locus_constant: model has no target");
  const auto& tg = *model.target;
  if (model.coupling == 0.0) throw DomainError("tof_locus_constant: zero coupling");
  const double C0 = 2.0 * model.k0() * model.k0() / (std::abs(model.coupling) * std::sqrt(tg.d / (tg.a * tg.a * tg.a)));
  if (!(C0 > 1.0)) throw RegimeViolation("tof_locus_constant: C0 <= 1, the logarithm is not positive");
  const double s = std::sqrt(2.0 * std::log(C0));
  return s + 1.0 / (1.0 + s);
}

double tof_difference_bohm(double theta1, double theta2, const WaveModel& model) {
  for (double th : {theta1, theta2})
    if (!(th > 0.0 && th < pi)) throw DomainError("tof_difference_bohm: angles must lie in (0, pi)");
  const double R0 = tof_locus_constant(model);
  return model.beam.D * R0 / model.v0() * (std::tan(0.5 * theta2) - std::tan(0.5 * theta1));
}

double tof_mean(double theta, const WaveModel& model, double l1) {
  const LocusLine L = initial_locus(theta, model);
  const auto& b = model.beam;
  const double v0 = model.v0();
  // z_L(R) sweeps +-6 l around the packet centre
  const double half = 6.0 * b.l * L.slope;
  const double lo = std::max(1e-6 * b.D, L.R_c - half), hi = L.R_c + half;
  if (!(hi > lo)) throw NoRoot("tof_mean: locus has no support at positive R");
  const int n = 4000;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double R = lo + (hi - lo) * i / n;
    const double z = L.z_c + (R - L.R_c) / L.slope;
    const double w = (i == 0 || i == n ? 0.5 : 1.0) * R * std::exp(2.0 * log_amplitudes({z, R}, 0.0, model).in);
    const double t = (R / std::tan(theta) + 2.0 * b.l0 - l1 - R / std::sin(theta)) / v0;
    num += w * t;
    den += w;
  }
  if (!(den > 0.0)) throw InsufficientStatistics("tof_mean: locus carries no probability");
  return num / den;
}

double tof_difference_histories(double theta1, double theta2, const BeamSpec& beam, double Z, double Z1,
                                bool signed_charge) {
  for (double th : {theta1, theta2})
    if (!(th > 0.0 && th < pi)) throw DomainError("tof_difference_histories: angles must lie in (0, pi)");
  const double v0 = beam.v0();
  const double charge = signed_charge ? -Z * Z1 : std::abs(Z * Z1);
  // e^2 / (2 pi eps0) = 2 x coulomb constant; m in eV fs^2 / nm^2
  const double scale = 2.0 * charge * units::coulomb_eV_nm / (beam.mass * units::electron_mass_eV_fs2_nm2 * v0 * v0 * v0);
  // sqrt((1 + cot^2 a) / (1 + cot^2 b)) = sin b / sin a
  return scale * std::log(std::sin(0.5 * theta2) / std::sin(0.5 * theta1));
}

double tof_difference_kijowski(double, double) { return 0.0; }

namespace {

struct KijowskiTerms {
  double pref;   // N^2 sigma^2 / (2 pi)
  double delta;  // z - z0 - v0 T
  double beta;   // hbar T sigma^2 / m
};

KijowskiTerms kijowski_terms(double T, double z, const KijowskiPacket& p) {
  if (!(p.k0 > 0.0 && p.sigma > 0.0 && p.hbar_over_m > 0.0))
    throw DomainError("kijowski: k0, sigma and hbar/m must be positive");
  if (p.k0 < 12.0 * p.sigma) throw RegimeViolation("kijowski: packet is not narrow (k0 < 12 sigma)");
  const double N2 = 1.0 / std::sqrt(pi * p.sigma * p.sigma);
  return {N2 * p.sigma * p.sigma / (2.0 * pi), z - p.z0 - p.hbar_over_m * p.k0 * T, p.hbar_over_m * T * p.sigma * p.sigma};
}

}  // namespace

double kijowski_density(double T, double z, const KijowskiPacket& p) {
  const auto K = kijowski_terms(T, z, p);
  // k = k0 + sigma u; the remaining phase is sigma u delta - beta u^2 / 2.
  // The Gaussian-weighted integrand is smooth, so the trapezoid rule on
  // [-12, 12] converges geometrically.
  const double freq = std::abs(p.sigma * K.delta) + 12.0 * std::abs(K.beta);
  const double h = std::min(0.05, 0.3 / (1.0 + freq));
  const int n = static_cast<int>(std::ceil(24.0 / h));
  std::complex<double> acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = -12.0 + 24.0 * i / n;
    const double k = p.k0 + p.sigma * u;
    const double phase = p.sigma * u * K.delta - 0.5 * K.beta * u * u;
    const double w = (i == 0 || i == n ? 0.5 : 1.0) * std::sqrt(p.hbar_over_m * k) * std::exp(-0.5 * u * u);
    acc += w * std::polar(1.0, phase);
  }
  acc *= 24.0 / n;
  return K.pref * std::norm(acc);
}

double kijowski_flux(double T, double z, const KijowskiPacket& p) {
  const auto K = kijowski_terms(T, z, p);
  // int exp(-u^2 (1/2 + i beta/2) + i sigma delta u) du in closed form
  const double absA2 = 0.25 * (1.0 + K.beta * K.beta);
  const double sd = p.sigma * K.delta;
  const double psi2 = K.pref * pi / std::sqrt(absA2) * std::exp(-sd * sd / (4.0 * absA2));
  return p.hbar_over_m * p.k0 * psi2;
}

// ---- swarm times of flight

std::vector<FlightTime> flight_times(const Ensemble& ens, const WaveModel& model, double z1, double r2) {
  std::vector<FlightTime> out;
  const double v0 = model.v0();
  for (std::size_t k = 0; k < ens.trajectories.size(); ++k) {
    const auto& tr = ens.trajectories[k];
    if (!tr.ok() || ens.init[k].z > z1) continue;
    const TrajEvent* hit = nullptr;
    for (const auto& e : tr.events)
      if (on_sphere(e, r2)) hit = &e;
    if (!hit) continue;
    const double t1 = ens.t0 + (z1 - ens.init[k].z) / v0;
    out.push_back({std::atan2(hit->R, hit->z), hit->t - t1, ens.weights[k]});
  }
  return out;
}

double mean_flight_time(const std::vector<FlightTime>& ft, double theta_c, double dtheta, std::size_t min_members) {
  double W = 0.0, S = 0.0;
  std::size_t n = 0;
  for (const auto& f : ft) {
    if (std::abs(f.theta - theta_c) > dtheta || !(f.weight > 0.0)) continue;
    W += f.weight;
    S += f.weight * f.time;
    ++n;
  }
  if (n < min_members || !(W > 0.0))
    throw InsufficientStatistics("mean_flight_time: " + std::to_string(n) + " members near theta");
  return S / W;
}

}  // namespace pilotscat
