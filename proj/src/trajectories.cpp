#include "pilotscat/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "pilotscat/errors.hpp"
#include "pilotscat/flowgeom.hpp"
#include "pilotscat/parallel.hpp"

namespace pilotscat {

namespace {

constexpr double pi = units::pi;

double surface_value(const Surface& s, double t, double z, double R, const WaveModel& m) {
  switch (s.kind) {
    case SurfaceKind::plane_z:
      return z - s.value;
    case SurfaceKind::sphere:
      return std::hypot(z, R) - s.value;
    case SurfaceKind::separator: {
      const auto L = log_amplitudes({z, std::abs(R)}, t, m);
      return L.in - L.out;
    }
  }
  return 0.0;
}

bool crossed(double a, double b) { return std::isfinite(a) && std::isfinite(b) && ((a < 0) != (b < 0)); }

}  // namespace

std::string to_string(TrajStatus s) {
  switch (s) {
    case TrajStatus::ok:
      return "ok";
    case TrajStatus::nodal_singularity:
      return "nodal-singularity";
    case TrajStatus::step_underflow:
      return "step-underflow";
    case TrajStatus::step_limit:
      return "step-limit";
  }
  return "?";
}

Trajectory integrate_trajectory(const CylPoint& init, double t0, double t1, const WaveModel& model,
                                const IntegratorOptions& opt) {
  if (!(init.R >= 0.0)) throw DomainError("integrate_trajectory: R must be >= 0");
  // R is continued to negative values through the axis; the field is even in R.
  const Rhs2 rhs = [&model](double t, const State2& y) {
    const auto v = velocity({y[0], std::abs(y[1])}, t, model);
    return State2{v.vz, y[1] < 0.0 ? -v.vR : v.vR};
  };
  Trajectory tr;
  tr.samples.push_back({t0, init.z, init.R});
  if (t1 == t0) return tr;

  StepperOptions so;
  so.rtol = opt.rtol;
  so.atol = opt.atol;
  so.h_min = opt.h_min;
  Dp45 stepper(rhs, so);
  try {
    stepper.start(t0, {init.z, init.R});
  } catch (const NodalSingularity& e) {
    tr.status = TrajStatus::nodal_singularity;
    tr.message = e.what();
    return tr;
  }

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double window = opt.vortex_window > 0.0 ? opt.vortex_window : 1e3 * vortex_size_estimate(model);
  std::vector<double> g(opt.surfaces.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = surface_value(opt.surfaces[i], t0, init.z, init.R, model);
  double next_sample = t0 + dir * opt.sample_dt;

  StepRecord rec;
  try {
    while (stepper.t() != t1) {
      if (tr.steps >= opt.max_steps) {
        tr.status = TrajStatus::step_limit;
        tr.message = "integrate_trajectory: step limit reached";
        break;
      }
      double cap = 0.0;
      if (!opt.nodes.empty()) {
        const auto& y = stepper.y();
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& n : opt.nodes) dmin = std::min(dmin, std::hypot(y[0] - n.z, std::abs(y[1]) - n.R));
        if (dmin < window) {
          const State2 v = rhs(stepper.t(), y);
          cap = 0.1 * dmin / std::max(std::hypot(v[0], v[1]), 1e-300);
        }
      }
      if (!stepper.step(t1, cap, rec)) {
        tr.status = TrajStatus::step_underflow;
        tr.message = "integrate_trajectory: step size underflow";
        break;
      }
      ++tr.steps;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& y = rec.y1;
        const double gn = surface_value(opt.surfaces[i], rec.t1, y[0], y[1], model);
        if (crossed(g[i], gn)) {
          double a = rec.t0, b = rec.t1;
          double ga = g[i];
          while (std::abs(b - a) > opt.event_tol) {
            const double mid = 0.5 * (a + b);
            const auto ym = rec.at(mid);
            const double gm = surface_value(opt.surfaces[i], mid, ym[0], ym[1], model);
            if (crossed(ga, gm)) {
              b = mid;
            } else {
              a = mid;
              ga = gm;
            }
          }
          const double te = 0.5 * (a + b);
          const auto ye = rec.at(te);
          tr.events.push_back({i, te, ye[0], std::abs(ye[1])});
        }
        g[i] = gn;
      }
      if (opt.sample_dt > 0.0) {
        while (dir * (rec.t1 - next_sample) > 0.0) {
          const auto y = rec.at(next_sample);
          tr.samples.push_back({next_sample, y[0], std::abs(y[1])});
          next_sample += dir * opt.sample_dt;
        }
        if (rec.t1 == t1) tr.samples.push_back({rec.t1, rec.y1[0], std::abs(rec.y1[1])});
      } else {
        tr.samples.push_back({rec.t1, rec.y1[0], std::abs(rec.y1[1])});
      }
    }
  } catch (const NodalSingularity& e) {
    tr.status = TrajStatus::nodal_singularity;
    tr.message = e.what();
  }
  std::sort(tr.events.begin(), tr.events.end(), [](const TrajEvent& a, const TrajEvent& b) { return a.t < b.t; });
  return tr;
}

// ---- swarms

TrajSample sample_at(const Trajectory& tr, double t) {
  const auto& S = tr.samples;
  if (S.empty()) throw DomainError("sample_at: empty trajectory");
  const bool fwd = S.back().t >= S.front().t;
  const double lo = fwd ? S.front().t : S.back().t, hi = fwd ? S.back().t : S.front().t;
  if (!(t >= lo && t <= hi)) throw DomainError("sample_at: time outside the trajectory");
  auto it = std::lower_bound(S.begin(), S.end(), t,
                             [fwd](const TrajSample& s, double x) { return fwd ? s.t < x : s.t > x; });
  if (it == S.begin()) return *it;
  if (it == S.end()) return S.back();
  const auto& a = *(it - 1);
  const auto& b = *it;
  const double w = (t - a.t) / (b.t - a.t);
  return {t, a.z + w * (b.z - a.z), a.R + w * (b.R - a.R)};
}

CylPoint GridSpec::point(int iz, int iR) const { return {z_min + iz * dz(), R_min + iR * dR()}; }

GridSpec default_grid(const BeamSpec& beam) {
  GridSpec g;
  g.z_min = -beam.l0 - 2.0 * beam.l;
  g.z_max = -beam.l0 + 2.0 * beam.l;
  g.R_min = beam.D / 100.0;
  g.R_max = 4.0 * beam.D;
  return g;
}

Ensemble run_swarm(const GridSpec& grid, double t0, double t1, const WaveModel& model,
                   const IntegratorOptions& opt) {
  if (grid.nz < 2 || grid.nR < 2) throw InvalidGrid("run_swarm: grid needs at least 2 x 2 nodes");
  if (!(grid.z_max > grid.z_min) || !(grid.R_max > grid.R_min) || grid.R_min < 0.0)
    throw InvalidGrid("run_swarm: empty or invalid grid extent");
  Ensemble e;
  e.grid = grid;
  e.t0 = t0;
  e.t1 = t1;
  const std::size_t n = grid.size();
  e.init.resize(n);
  e.weights.resize(n);
  for (int iz = 0; iz < grid.nz; ++iz)
    for (int iR = 0; iR < grid.nR; ++iR) {
      const std::size_t k = grid.index(iz, iR);
      e.init[k] = grid.point(iz, iR);
      const double a = std::exp(2.0 * log_amplitudes(e.init[k], t0, model).in);
      e.weights[k] = a * 2.0 * pi * e.init[k].R * grid.dR() * grid.dz();
    }
  double sum = 0.0;
  for (double w : e.weights) sum += w;
  e.coverage = sum;
  if (!(sum > 0.0)) throw InvalidGrid("run_swarm: grid carries no probability");
  for (double& w : e.weights) w /= sum;

  e.trajectories.resize(n);
  parallel_for(n, [&](std::size_t k) {
    try {
      e.trajectories[k] = integrate_trajectory(e.init[k], t0, t1, model, opt);
    } catch (const Error& err) {
      Trajectory tr;
      tr.samples.push_back({t0, e.init[k].z, e.init[k].R});
      tr.status = TrajStatus::nodal_singularity;
      tr.message = err.what();
      e.trajectories[k] = std::move(tr);
    }
  });
  for (const auto& tr : e.trajectories)
    if (!tr.ok()) ++e.failures;
  return e;
}

// ---- loci

namespace {

double g_of(double theta) { return 2.0 * std::sin(theta) / (1.0 - std::cos(theta)); }

double locus_strength(const WaveModel& m) {
  if (m.mode == WaveMode::free || m.coupling == 0.0) throw DomainError("initial_locus: model has no outgoing wave");
  return std::abs(m.coupling * m.diffuse_amplitude);
}

}  // namespace

double locus_residual(double R0, double z0, double theta, const WaveModel& m) {
  if (!(R0 > 0.0)) throw DomainError("locus_residual: R0 must be > 0");
  if (!(theta > 0.0 && theta < pi)) throw DomainError("locus_residual: theta must be in (0, pi)");
  const double D = m.beam.D, l = m.beam.l, k0 = m.k0();
  const double g = g_of(theta);
  const double K = locus_strength(m) * g / (2.0 * k0 * k0);
  return -(l * l * g / (4.0 * D * D)) * R0 + R0 / g + z0 + m.beam.l0 - (l * l * g / (2.0 * R0)) * std::log(K / R0);
}

LocusLine initial_locus(double theta, const WaveModel& m) {
  if (!(theta > 0.0 && theta < pi)) throw DomainError("initial_locus: theta must be in (0, pi)");
  const double D = m.beam.D, l = m.beam.l;
  LocusLine L;
  L.theta = theta;
  L.g = g_of(theta);
  L.z_c = -m.beam.l0;
  if (l * l * L.g * L.g / (4.0 * D * D) < 10.0)
    throw RegimeViolation("initial_locus: l^2 g^2 / 4D^2 < 10, the straight-line locus does not apply");
  L.slope = 4.0 * D * D / (l * l * L.g);

  // The residual is negative for R0 below K = |C S| g / 2k0^2 and for large R0;
  // collect every sign change on a geometric grid from K outward.
  const double K = locus_strength(m) * L.g / (2.0 * m.k0() * m.k0());
  auto F = [&](double R) { return locus_residual(R, L.z_c, theta, m); };
  const double hi_lim = std::max(1e3 * K, 1e3 * D);
  std::vector<double> roots;
  double a = K, fa = F(a);
  for (double b = K * 1.001; b < hi_lim; b *= 1.001) {
    const double fb = F(b);
    if ((fa < 0) != (fb < 0)) {
      double lo = a, hi = b, flo = fa;
      for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = F(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  if (roots.empty()) throw NoRoot("initial_locus: encounter condition has no root at z0 = -l0");

  // Several roots: keep the one whose encounter point lies closest to the
  // separator of the full field at the encounter time. Outermost otherwise.
  L.R_c = roots.back();
  if (roots.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    for (const double R : roots) {
      const double t_coll = (m.beam.l0 + R * std::cos(theta) / std::sin(theta)) / m.v0();
      double rs;
      try {
        rs = separator_radius(theta, t_coll, m);
      } catch (const NoRoot&) {
        continue;
      }
      const double miss = std::abs(R / std::sin(theta) - rs);
      if (miss < best) {
        best = miss;
        L.R_c = R;
      }
    }
  }
  return L;
}

// ---- continuity check

namespace {

struct CellMap {
  // value(u, v) = c0 + c1 u + c2 v + c3 u v on the unit square
  double c0, c1, c2, c3;
  double at(double u, double v) const { return c0 + c1 * u + c2 * v + c3 * u * v; }
  double du(double v) const { return c1 + c3 * v; }
  double dv(double u) const { return c2 + c3 * u; }
};

CellMap fit(double f00, double f10, double f01, double f11) { return {f00, f10 - f00, f01 - f00, f11 - f10 - f01 + f00}; }

// Solutions of r(u, v) = r*, th(u, v) = th* in [0, 1) x [0, 1).
std::vector<std::array<double, 2>> invert(const CellMap& r, const CellMap& th, double rs, double ts) {
  std::vector<std::array<double, 2>> out;
  for (auto [u, v] : {std::pair{0.5, 0.5}, std::pair{0.1, 0.1}, std::pair{0.9, 0.1}, std::pair{0.1, 0.9},
                      std::pair{0.9, 0.9}}) {
    bool ok = false;
    for (int it = 0; it < 40; ++it) {
      const double fr = r.at(u, v) - rs, ft = th.at(u, v) - ts;
      const double a = r.du(v), b = r.dv(u), c = th.du(v), d = th.dv(u);
      const double det = a * d - b * c;
      if (det == 0.0) break;
      const double su = (d * fr - b * ft) / det, sv = (-c * fr + a * ft) / det;
      u -= su;
      v -= sv;
      if (std::abs(u) > 10 || std::abs(v) > 10) break;
      if (std::abs(su) + std::abs(sv) < 1e-13) {
        ok = true;
        break;
      }
    }
    if (!ok || u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) continue;
    bool dup = false;
    for (const auto& s : out)
      if (std::abs(s[0] - u) + std::abs(s[1] - v) < 1e-9) dup = true;
    if (!dup) out.push_back({u, v});
  }
  return out;
}

void normalize(std::vector<double>& P, const std::vector<double>& r) {
  double area = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) area += 0.5 * (P[i] + P[i - 1]) * (r[i] - r[i - 1]);
  if (area > 0.0)
    for (double& p : P) p /= area;
}

}  // namespace

std::vector<RadialCurve> radial_distribution(const Ensemble& ens, const WaveModel& model,
                                             const std::vector<double>& thetas, const RadialOptions& opt) {
  const auto& G = ens.grid;
  if (ens.trajectories.size() != G.size()) throw InvalidGrid("radial_distribution: ensemble does not match its grid");
  if (opt.nr < 2) throw InvalidGrid("radial_distribution: need at least 2 radii");
  std::vector<double> fr(G.size()), ft(G.size());
  double rlo = std::numeric_limits<double>::infinity(), rhi = 0.0;
  for (std::size_t k = 0; k < G.size(); ++k) {
    const auto& tr = ens.trajectories[k];
    const TrajSample s = std::isnan(opt.t) || !tr.ok() ? tr.final() : sample_at(tr, opt.t);
    fr[k] = std::hypot(s.z, s.R);
    ft[k] = std::atan2(s.R, s.z);
    if (ens.trajectories[k].ok()) {
      rlo = std::min(rlo, fr[k]);
      rhi = std::max(rhi, fr[k]);
    }
  }
  if (opt.r_max > opt.r_min) {
    rlo = opt.r_min;
    rhi = opt.r_max;
  }
  std::vector<double> rgrid(opt.nr);
  for (int i = 0; i < opt.nr; ++i) rgrid[i] = rlo + (rhi - rlo) * i / (opt.nr - 1);

  std::vector<RadialCurve> curves(thetas.size());
  parallel_for(thetas.size(), [&](std::size_t j) {
    RadialCurve& c = curves[j];
    c.theta = thetas[j];
    c.r = rgrid;
    c.P.assign(rgrid.size(), 0.0);
    for (int iz = 0; iz + 1 < G.nz; ++iz)
      for (int iR = 0; iR + 1 < G.nR; ++iR) {
        const std::size_t k00 = G.index(iz, iR), k10 = G.index(iz + 1, iR), k01 = G.index(iz, iR + 1),
                          k11 = G.index(iz + 1, iR + 1);
        if (!ens.trajectories[k00].ok() || !ens.trajectories[k10].ok() || !ens.trajectories[k01].ok() ||
            !ens.trajectories[k11].ok())
          continue;
        const CellMap th = fit(ft[k00], ft[k10], ft[k01], ft[k11]);
        const double tmin = std::min({ft[k00], ft[k10], ft[k01], ft[k11]});
        const double tmax = std::max({ft[k00], ft[k10], ft[k01], ft[k11]});
        if (c.theta < tmin || c.theta > tmax) continue;
        const CellMap r = fit(fr[k00], fr[k10], fr[k01], fr[k11]);
        const double dz = G.dz(), dR = G.dR();
        const CylPoint base = G.point(iz, iR);
        for (std::size_t i = 0; i < rgrid.size(); ++i) {
          for (const auto& uv : invert(r, th, rgrid[i], c.theta)) {
            const double u = uv[0], v = uv[1];
            const double J = (r.du(v) * th.dv(u) - r.dv(u) * th.du(v)) / (dz * dR);
            ++c.preimages;
            if (std::abs(J) < 1e-12) {
              ++c.degenerate;
              continue;
            }
            const CylPoint p0{base.z + u * dz, base.R + v * dR};
            const double rho = std::exp(2.0 * log_amplitudes(p0, ens.t0, model).in);
            c.P[i] += rho * p0.R / std::abs(J);
          }
        }
      }
    normalize(c.P, c.r);
  });
  for (const auto& c : curves)
    if (c.preimages == 0) throw InsufficientStatistics("radial_distribution: no grid cell maps onto theta");
  return curves;
}

RadialCurve direct_radial_profile(double theta, double t, const WaveModel& model, const std::vector<double>& r) {
  RadialCurve c;
  c.theta = theta;
  c.r = r;
  c.P.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto L = log_amplitudes({r[i] * std::cos(theta), r[i] * std::sin(theta)}, t, model);
    c.P[i] = std::exp(2.0 * L.out) * r[i] * r[i];
  }
  normalize(c.P, c.r);
  return c;
}

}  // namespace pilotscat
