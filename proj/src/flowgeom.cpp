#include "pilotscat/flowgeom.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <optional>

#include "pilotscat/detail/amplitude.hpp"
#include "pilotscat/errors.hpp"
#include "pilotscat/parallel.hpp"

namespace pilotscat {

namespace {

using J1 = Jet<double, 2, 1>;
using J2 = Jet<double, 2, 2>;
using LD = long double;
using LJ1 = Jet<LD, 2, 1>;
using LJ2 = Jet<LD, 2, 2>;
using lcplx = std::complex<LD>;

constexpr double pi = units::pi;

// log|A_in| - log|A_out| and log|A_in| at one point, from precomputed parameters.
struct LogProbe {
  const WaveModel& model;
  detail::ModelParams<double> P;
  double logB;
  double log_out_const;

  LogProbe(const WaveModel& m, double t) : model(m), P(detail::params_of<double>(m, t)) {
    logB = std::log(std::abs(P.B));
    if (m.mode == WaveMode::bragg)
      log_out_const = logB + std::log(std::abs(P.coupling)) + std::log(2.0 * P.D / P.a);
    else
      log_out_const = logB + std::log(std::abs(P.coupling)) + std::log(P.sd);
  }

  double gexp(double x, double w) const { return -0.5 * x * x * w * w / (w * w * w * w + P.tau * P.tau); }

  double log_in(double z, double R) const {
    return logB + gexp(R, P.D) + gexp(z + P.l0 - P.v0 * P.t, P.l);
  }

  double log_out(double z, double R) const {
    const double r = std::hypot(z, R);
    double v = log_out_const + gexp(r + P.l0 - P.v0 * P.t, P.l) + std::log(detail::fit_function(P, z, R, r));
    if (model.mode == WaveMode::bragg) v += std::log(std::abs(detail::bragg_bracket(P, model.bragg, z, R, r)));
    return v;
  }
};

bool has_outgoing(const WaveModel& m) { return m.mode != WaveMode::free && m.coupling != 0.0; }

struct RayBounds {
  double r_min, r_max, step;
};

RayBounds ray_bounds(const WaveModel& m, double t, const SeparatorOptions& opt) {
  const double w = std::max(m.beam.l, m.beam.D);
  RayBounds b;
  b.step = opt.step > 0.0 ? opt.step : std::min(m.beam.l, m.beam.D) / 20.0;
  b.r_min = opt.r_min > 0.0 ? opt.r_min : 1e-3 * std::min(m.beam.l, m.beam.D);
  b.r_max = opt.r_max > 0.0 ? opt.r_max : std::abs(m.v0() * t - m.beam.l0) + 12.0 * w;
  return b;
}

// Innermost significant root of log|in| - log|out| on [r_lo, r_hi] along theta.
std::optional<double> ray_root(const LogProbe& probe, double theta, double r_lo, double r_hi, double step,
                               double floor_log) {
  const double c = std::cos(theta), s = std::sin(theta);
  auto h = [&](double r) { return probe.log_in(r * c, r * s) - probe.log_out(r * c, r * s); };
  const int n = std::max(1, static_cast<int>(std::ceil((r_hi - r_lo) / step)));
  const double dr = (r_hi - r_lo) / n;
  double r0 = r_lo, h0 = h(r0);
  for (int k = 1; k <= n; ++k) {
    const double r1 = r_lo + k * dr;
    const double h1 = h(r1);
    if (std::isfinite(h0) && std::isfinite(h1) && ((h0 <= 0.0) != (h1 <= 0.0))) {
      double root;
      if (h0 == 0.0) {
        root = r0;
      } else {
        boost::uintmax_t iters = 100;
        auto br = boost::math::tools::toms748_solve(h, r0, r1, h0, h1,
                                                    boost::math::tools::eps_tolerance<double>(48), iters);
        root = 0.5 * (br.first + br.second);
      }
      if (probe.log_in(root * c, root * s) > floor_log) return root;
    }
    r0 = r1;
    h0 = h1;
  }
  return std::nullopt;
}

// ---- local frame around a base point, extended precision

struct LocalFrame {
  const WaveModel& model;
  detail::ModelParams<LD> P;
  LD z0, R0;
  lcplx carrier;

  LocalFrame(const WaveModel& m, double t, double z, double R)
      : model(m), P(detail::params_of<LD>(m, t)), z0(z), R0(R) {
    carrier = detail::local_carrier(P, z0, R0);
  }

  template <class J>
  auto field(LD dz, LD dR) const {
    return detail::psi_local(P, model.bragg, z0, R0, J::variable(dz, 0), J::variable(dR, 1), carrier);
  }

  lcplx value(LD dz, LD dR) const { return detail::psi_local(P, model.bragg, z0, R0, dz, dR, carrier); }

  LD envelope() const { return std::abs(detail::amplitude_in(P, z0, R0)); }

  // (hbar/m) (k0 + Im(Phi_z / Phi), Im(Phi_R / Phi))
  std::array<LD, 2> velocity(LD dz, LD dR) const {
    const auto f = field<LJ1>(dz, dR);
    return {P.hm * (P.k0 + (f.d[0] / f.v).imag()), P.hm * (f.d[1] / f.v).imag()};
  }

  // velocity and its Jacobian d v_i / d x_j
  void velocity_jacobian(LD dz, LD dR, std::array<LD, 2>& v, std::array<LD, 4>& J) const {
    const auto f = field<LJ2>(dz, dR);
    const lcplx inv = LD(1) / f.v;
    v = {P.hm * (P.k0 + (f.d[0] * inv).imag()), P.hm * (f.d[1] * inv).imag()};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) J[i * 2 + j] = P.hm * (f.hess(i, j) * inv - f.d[i] * f.d[j] * inv * inv).imag();
  }
};

}  // namespace

Velocity velocity(const CylPoint& p, double t, const WaveModel& model) {
  if (!(p.R >= 0.0)) throw DomainError("velocity: R must be >= 0");
  const double hm = model.hbar_over_m();
  const auto g = detail::phase_gradient(model, t, p.z, p.R);
  if (!(g.abs_phi >= nodal_threshold)) throw NodalSingularity("velocity: |psi| below threshold");
  return {hm * (model.k0() + g.gz), hm * g.gR};
}

double quantum_potential(const CylPoint& p, double t, const WaveModel& model) {
  if (!(p.R >= 0.0)) throw DomainError("quantum_potential: R must be >= 0");
  const auto P = detail::params_of<double>(model, t);
  const auto f = detail::slow_field(P, model.bragg, J2::variable(p.z, 0), J2::variable(p.R, 1));
  if (!(std::abs(f.v) >= nodal_threshold)) throw NodalSingularity("quantum_potential: |psi| below threshold");
  const J2 re = real(f), im = imag(f);
  const J2 F = sqrt(re * re + im * im);
  // axisymmetric: F_R / R -> F_RR on the axis
  const double radial = p.R > 0.0 ? F.d[1] / p.R : F.hess(1, 1);
  const double lap = F.hess(0, 0) + F.hess(1, 1) + radial;
  const double hbar2_over_m = units::hbar2_over_me_eV_nm2 / model.beam.mass;
  return -0.5 * hbar2_over_m * lap / F.v;
}

std::string to_string(Topology t) { return t == Topology::closed ? "closed" : "open-pair"; }

std::string to_string(NodalClass c) {
  switch (c) {
    case NodalClass::attractor:
      return "attractor";
    case NodalClass::repellor:
      return "repellor";
    default:
      return "center";
  }
}

double separator_radius(double theta, double t, const WaveModel& model, const SeparatorOptions& opt) {
  if (!(theta > 0.0 && theta < pi)) throw DomainError("separator_radius: theta must be in (0, pi)");
  if (!has_outgoing(model)) throw NoRoot("separator_radius: no outgoing wave");
  const LogProbe probe(model, t);
  const RayBounds b = ray_bounds(model, t, opt);
  const auto root = ray_root(probe, theta, b.r_min, b.r_max, b.step, probe.logB + std::log(opt.significance));
  if (!root) throw NoRoot("separator_radius: amplitudes do not cross on the ray");
  return *root;
}

std::vector<double> default_theta_grid(int n) {
  if (n < 2) throw InvalidGrid("theta grid needs at least 2 points");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = 0.01 + (pi - 0.02) * i / (n - 1);
  return g;
}

SeparatorCurve separator_curve(double t, const WaveModel& model, const std::vector<double>& theta_grid,
                               const SeparatorOptions& opt) {
  for (double th : theta_grid)
    if (!(th > 0.0 && th < pi)) throw InvalidGrid("separator_curve: theta grid must lie in (0, pi)");
  if (!std::is_sorted(theta_grid.begin(), theta_grid.end())) throw InvalidGrid("separator_curve: theta grid must be sorted");
  SeparatorCurve curve;
  curve.t = t;
  if (!has_outgoing(model)) {
    curve.gaps = theta_grid;
    return curve;
  }
  const LogProbe probe(model, t);
  const RayBounds b = ray_bounds(model, t, opt);
  const double floor_log = probe.logB + std::log(opt.significance);
  std::vector<std::optional<double>> roots(theta_grid.size());
  parallel_for(theta_grid.size(), [&](std::size_t i) {
    roots[i] = ray_root(probe, theta_grid[i], b.r_min, b.r_max, b.step, floor_log);
  });
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (roots[i])
      curve.samples.push_back({theta_grid[i], *roots[i]});
    else
      curve.gaps.push_back(theta_grid[i]);
  }
  const bool first = !theta_grid.empty() && roots.front().has_value();
  const bool last = !theta_grid.empty() && roots.back().has_value();
  curve.topology = (first && last) ? Topology::closed : Topology::open_pair;
  return curve;
}

double separator_transition_time(double t_open, double t_closed, const WaveModel& model,
                                 const std::vector<double>& theta_grid, double tol, const SeparatorOptions& opt) {
  // only the end rays decide the topology
  const std::vector<double> ends = {theta_grid.front(), theta_grid.back()};
  auto closed = [&](double t) { return separator_curve(t, model, ends, opt).topology == Topology::closed; };
  if (closed(t_open) || !closed(t_closed)) throw NoRoot("separator_transition_time: bracket does not straddle the transition");
  while (t_closed - t_open > tol) {
    const double mid = 0.5 * (t_open + t_closed);
    (closed(mid) ? t_closed : t_open) = mid;
  }
  return 0.5 * (t_open + t_closed);
}

double vortex_size_estimate(const WaveModel& model) { return 1.0 / (model.beam.D * model.k0() * model.k0()); }

namespace {

// Newton on (Re psi, Im psi) in the local frame of base; returns the offset.
// Iterates past tol until steps stop reducing the residual: psi is steep
// across fringes but shallow along them, so a small residual alone does
// not pin the position along the fringe.
std::optional<std::array<LD, 2>> polish_node(const LocalFrame& F, LD tol) {
  LD dz = 0, dR = 0;
  auto f = F.field<LJ1>(dz, dR);
  LD res = std::abs(f.v);
  const LD trust = LD(0.05) * std::min(F.P.l, F.P.D);
  const LD resolution = LD(1e-6) / (F.P.D * F.P.k0 * F.P.k0);
  for (int it = 0; it < 50; ++it) {
    // [Re a Re b; Im a Im b] (sz, sR) = -(Re f, Im f)
    const LD a11 = f.d[0].real(), a12 = f.d[1].real(), a21 = f.d[0].imag(), a22 = f.d[1].imag();
    const LD det = a11 * a22 - a12 * a21;
    if (det == 0) break;
    LD sz = -(a22 * f.v.real() - a12 * f.v.imag()) / det;
    LD sR = -(-a21 * f.v.real() + a11 * f.v.imag()) / det;
    const LD len = std::hypot(sz, sR);
    if (len > trust) {
      sz *= trust / len;
      sR *= trust / len;
    }
    LD lam = 1;
    bool improved = false;
    for (int k = 0; k < 30; ++k) {
      const auto g = F.field<LJ1>(dz + lam * sz, dR + lam * sR);
      if (std::abs(g.v) < res) {
        dz += lam * sz;
        dR += lam * sR;
        f = g;
        res = std::abs(g.v);
        improved = true;
        break;
      }
      lam *= 0.5;
    }
    if (!improved || lam * len < resolution) break;
  }
  if (res < tol) return std::array<LD, 2>{dz, dR};
  return std::nullopt;
}

// arg(A_out / A_in) + k0 (r - z) at a point.
double fringe_phase(const detail::ModelParams<double>& P, const WaveModel& m, double z, double R) {
  const double r = std::hypot(z, R);
  const cplx in = detail::amplitude_in(P, z, R);
  const cplx out = detail::amplitude_out(P, m.bragg, z, R, r);
  return std::arg(out / in) + P.k0 * detail::r_minus_z(z, R, r);
}

}  // namespace

std::vector<NodalPoint> nodal_points(double t, const WaveModel& model, const NodalWindow& w) {
  if (!(w.r_min > 0.0) || !(w.r_max > w.r_min)) throw DomainError("nodal_points: window must exclude r = 0");
  if (!(w.theta_min > 0.0 && w.theta_max < pi && w.theta_max > w.theta_min))
    throw DomainError("nodal_points: theta range must lie in (0, pi)");
  if (w.samples < 2) throw InvalidGrid("nodal_points: need at least 2 rays");
  std::vector<NodalPoint> nodes;
  if (!has_outgoing(model)) return nodes;

  const LogProbe probe(model, t);
  const double step = std::min({model.beam.l, model.beam.D, w.r_max - w.r_min}) / 20.0;
  // separator points across the window
  std::vector<std::array<double, 2>> sep;  // (z, R)
  for (int i = 0; i < w.samples; ++i) {
    const double th = w.theta_min + (w.theta_max - w.theta_min) * i / (w.samples - 1);
    const auto r = ray_root(probe, th, w.r_min, w.r_max, step, -std::numeric_limits<double>::infinity());
    if (r) sep.push_back({*r * std::cos(th), *r * std::sin(th)});
    else sep.push_back({std::nan(""), std::nan("")});
  }

  const auto P = probe.P;
  for (std::size_t i = 0; i + 1 < sep.size(); ++i) {
    const auto& A = sep[i];
    const auto& B = sep[i + 1];
    if (std::isnan(A[0]) || std::isnan(B[0])) continue;
    const double pa = fringe_phase(P, model, A[0], A[1]);
    const double pb = fringe_phase(P, model, B[0], B[1]);
    if (pa == pb) continue;
    // targets (2 q + 1) pi between pa and pb
    const double lo = std::min(pa, pb), hi = std::max(pa, pb);
    const long q0 = static_cast<long>(std::ceil((lo - pi) / (2 * pi)));
    const long q1 = static_cast<long>(std::floor((hi - pi) / (2 * pi)));
    for (long q = q0; q <= q1; ++q) {
      if (nodes.size() >= w.max_nodes) throw DomainError("nodal_points: more than max_nodes nodes in window");
      const double s = ((2 * q + 1) * pi - pa) / (pb - pa);
      CylPoint seed{A[0] + s * (B[0] - A[0]), A[1] + s * (B[1] - A[1])};
      const LocalFrame F(model, t, seed.z, seed.R);
      const LD tol = LD(1e-12) * F.envelope();
      const auto off = polish_node(F, tol);
      if (!off) continue;
      NodalPoint n;
      n.base = seed;
      n.dz = static_cast<double>((*off)[0]);
      n.dR = static_cast<double>((*off)[1]);
      n.point = {seed.z + n.dz, seed.R + n.dR};
      n.qbar = q;
      n.residual = static_cast<double>(std::abs(F.value((*off)[0], (*off)[1])) / F.envelope());
      nodes.push_back(n);
    }
  }
  // the same node may be reached from neighbouring segments
  std::sort(nodes.begin(), nodes.end(), [](const NodalPoint& a, const NodalPoint& b) {
    return a.qbar != b.qbar ? a.qbar < b.qbar : a.point.theta() < b.point.theta();
  });
  const double merge = 1e-3 / model.k0();
  std::vector<NodalPoint> unique;
  for (const auto& n : nodes) {
    bool dup = false;
    for (auto it = unique.rbegin(); it != unique.rend() && it->qbar == n.qbar; ++it)
      if (std::hypot(it->point.z - n.point.z, it->point.R - n.point.R) < merge) dup = true;
    if (!dup) unique.push_back(n);
  }
  std::sort(unique.begin(), unique.end(),
            [](const NodalPoint& a, const NodalPoint& b) { return a.point.theta() < b.point.theta(); });
  return unique;
}

VortexComplex vortex_analysis(const NodalPoint& nodal, double t, const WaveModel& model) {
  // frame at the node's base point; coordinates below are offsets from the node
  const LocalFrame F(model, t, nodal.base.z, nodal.base.R);
  const LD nz = nodal.dz, nR = nodal.dR;
  const LD Rest = vortex_size_estimate(model);
  const LD v0 = F.P.v0;

  // fringe tangent (sin theta, 1 - cos theta) normalised
  const double th = nodal.point.theta();
  std::array<LD, 2> tang{std::sin(th), 1.0 - std::cos(th)};
  {
    const LD n = std::hypot(tang[0], tang[1]);
    tang = {tang[0] / n, tang[1] / n};
  }
  const std::array<LD, 2> norm{-tang[1], tang[0]};

  struct Found {
    LD dz, dR;
  };
  std::vector<Found> found;
  const LD trust = LD(1e3) * Rest;
  for (LD scale : {LD(1), LD(0.3), LD(3), LD(0.1), LD(10)}) {
    for (const auto& dir : {tang, std::array<LD, 2>{-tang[0], -tang[1]}, norm, std::array<LD, 2>{-norm[0], -norm[1]}}) {
      LD xz = dir[0] * scale * Rest, xR = dir[1] * scale * Rest;
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        std::array<LD, 2> v;
        std::array<LD, 4> J;
        F.velocity_jacobian(nz + xz, nR + xR, v, J);
        const LD det = J[0] * J[3] - J[1] * J[2];
        if (det == 0) break;
        LD sz = -(J[3] * v[0] - J[1] * v[1]) / det;
        LD sR = -(-J[2] * v[0] + J[0] * v[1]) / det;
        // do not step across the node
        const LD len = std::hypot(sz, sR);
        const LD cap = LD(0.5) * std::hypot(xz, xR);
        if (len > cap) {
          sz *= cap / len;
          sR *= cap / len;
        }
        xz += sz;
        xR += sR;
        if (std::hypot(xz, xR) > trust) break;
        // position resolution is limited by the base coordinates
        if (std::min(len, cap) < LD(1e-7) * std::hypot(xz, xR)) {
          ok = std::hypot(v[0], v[1]) < LD(1e-3) * v0;
          break;
        }
      }
      if (ok) found.push_back({xz, xR});
    }
    if (!found.empty()) break;
  }
  if (found.empty()) throw XPointNotFound("vortex_analysis: Newton on v = 0 did not converge near the node");
  const auto best = *std::min_element(found.begin(), found.end(), [](const Found& a, const Found& b) {
    return std::hypot(a.dz, a.dR) < std::hypot(b.dz, b.dR);
  });

  VortexComplex vc;
  vc.nodal = nodal;
  vc.x_dz = static_cast<double>(best.dz);
  vc.x_dR = static_cast<double>(best.dR);
  vc.xpoint = {nodal.point.z + vc.x_dz, nodal.point.R + vc.x_dR};
  vc.R_X = static_cast<double>(std::hypot(best.dz, best.dR));

  std::array<LD, 2> v;
  std::array<LD, 4> J;
  F.velocity_jacobian(nz + best.dz, nR + best.dR, v, J);
  const LD tr = J[0] + J[3];
  const LD det = J[0] * J[3] - J[1] * J[2];
  const LD disc = tr * tr / 4 - det;
  if (disc < 0) throw XPointNotFound("vortex_analysis: stagnation point is not hyperbolic");
  const LD sq = std::sqrt(disc);
  vc.lambda_plus = static_cast<double>(tr / 2 + sq);
  vc.lambda_minus = static_cast<double>(tr / 2 - sq);
  auto eigvec = [&](LD lam) {
    // (J - lam I) e = 0
    LD ez, eR;
    if (std::abs(J[1]) > std::abs(J[2])) {
      ez = J[1];
      eR = lam - J[0];
    } else {
      ez = lam - J[3];
      eR = J[2];
    }
    const LD n = std::hypot(ez, eR);
    return std::array<double, 2>{static_cast<double>(ez / n), static_cast<double>(eR / n)};
  };
  vc.eigvec_plus = eigvec(tr / 2 + sq);
  vc.eigvec_minus = eigvec(tr / 2 - sq);

  // Loop around the node through which psi winds uniformly: d = M^-1 (cos a, sin a) rho,
  // M the linear map d -> (Re psi, Im psi) at the node.
  const auto f = F.field<LJ1>(nz, nR);
  const LD m11 = f.d[0].real(), m12 = f.d[1].real(), m21 = f.d[0].imag(), m22 = f.d[1].imag();
  const LD mdet = m11 * m22 - m12 * m21;
  // inverse columns
  const LD i11 = m22 / mdet, i12 = -m12 / mdet, i21 = -m21 / mdet, i22 = m11 / mdet;
  const LD major = std::max(std::hypot(i11, i21), std::hypot(i12, i22));
  const LD rho = LD(0.25) * vc.R_X / major;
  const int n = 512;
  LD circ = 0, flux = 0;
  for (int k = 0; k < n; ++k) {
    const LD a = 2 * LD(pi) * k / n;
    const LD dz = rho * (i11 * std::cos(a) + i12 * std::sin(a));
    const LD dR = rho * (i21 * std::cos(a) + i22 * std::sin(a));
    const LD tz = rho * (-i11 * std::sin(a) + i12 * std::cos(a));
    const LD tR = rho * (-i21 * std::sin(a) + i22 * std::cos(a));
    const auto vel = F.velocity(nz + dz, nR + dR);
    circ += vel[0] * tz + vel[1] * tR;
    flux += vel[0] * tR - vel[1] * tz;
  }
  circ *= 2 * LD(pi) / n;
  flux *= 2 * LD(pi) / n;
  // orientation of the loop in the (z, R) plane follows sign(det M^-1)
  if (mdet < 0) {
    circ = -circ;
    flux = -flux;
  }
  vc.circulation = static_cast<double>(circ);
  vc.flux = static_cast<double>(flux);
  const LD rel = flux / std::abs(circ);
  vc.nodal_class = rel < LD(-1e-2) ? NodalClass::attractor : rel > LD(1e-2) ? NodalClass::repellor : NodalClass::center;
  return vc;
}

}  // namespace pilotscat
