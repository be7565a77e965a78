#include "pilotscat/rutherford.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pilotscat/errors.hpp"
#include "pilotscat/integrator.hpp"
#include "pilotscat/parallel.hpp"

namespace pilotscat {

double SemiclassicalSpec::start_time() const { return std::isnan(t0) ? -params.decoherence_time() : t0; }
double SemiclassicalSpec::end_time() const { return std::isnan(t1) ? params.decoherence_time() : t1; }

void SemiclassicalSpec::validate() const {
  std::ostringstream os;
  try {
    params.validate();
  } catch (const ValidationError& e) {
    os << e.what() << "; ";
  }
  if (b_list.empty()) os << "b_list is empty; ";
  for (double b : b_list)
    if (!(b > 0.0)) os << "b must be positive (got " << b << "); ";
  const double td = params.D > 0.0 && params.mass > 0.0 ? params.decoherence_time() : 0.0;
  const double a = start_time(), z = end_time();
  if (!(z > a)) os << "run window must have t1 > t0; ";
  if (std::abs(a) > td * (1 + 1e-12) || std::abs(z) > td * (1 + 1e-12))
    os << "|t| must not exceed the decoherence time m D^2 / hbar = " << td << " fs; ";
  if (cloud < 0) os << "cloud must be >= 0; ";
  if (cloud > 1 && !(cloud_halfwidth > 0.0)) os << "cloud_halfwidth must be positive; ";
  if (!(rtol > 0.0) || !(atol > 0.0)) os << "tolerances must be positive; ";
  if (samples < 10) os << "samples must be >= 10; ";
  const std::string msg = os.str();
  if (!msg.empty()) throw ValidationError("rutherford: " + msg.substr(0, msg.size() - 2));
}

std::array<double, 2> semiclassical_velocity(double x, double z, double t, double b, const SemiclassicalParams& p) {
  const auto f = eval_psi_semiclassical({x, 0.0, z}, t, b, p);
  const double n = std::norm(f.value);
  if (!(n > 1e-300) || !std::isfinite(n)) throw NodalSingularity("semiclassical_velocity: |psi| vanishes");
  const double hm = p.hbar_over_m();
  return {hm * std::imag(f.grad[0] * std::conj(f.value)) / n, hm * std::imag(f.grad[2] * std::conj(f.value)) / n};
}

namespace {

double final_direction(const std::vector<PlaneSample>& s) {
  const std::size_t n = s.size();
  const std::size_t i0 = n - 1 - std::max<std::size_t>(1, (n - 1) / 10);
  return std::atan2(s.back().x - s[i0].x, s.back().z - s[i0].z);
}

RutherfordPath integrate_path(double b, double x0, double z0, const SemiclassicalSpec& spec) {
  RutherfordPath path;
  path.b = b;
  path.x0 = x0;
  path.z0 = z0;
  const double ta = spec.start_time(), tb = spec.end_time();
  const auto& P = spec.params;
  Rhs2 f = [&](double t, const State2& y) { return semiclassical_velocity(y[0], y[1], t, b, P); };
  StepperOptions so;
  so.rtol = spec.rtol;
  so.atol = spec.atol;
  path.samples.push_back({ta, x0, z0});
  try {
    Dp45 dp(f, so);
    dp.start(ta, {x0, z0});
    StepRecord rec;
    const double dt = (tb - ta) / spec.samples;
    int next = 1;
    std::size_t steps = 0;
    while (dp.t() < tb) {
      if (++steps > 50'000'000) {
        path.status = TrajStatus::step_limit;
        path.message = "step limit reached";
        break;
      }
      if (!dp.step(tb, 0.0, rec)) {
        path.status = TrajStatus::step_underflow;
        path.message = "step size underflow at t = " + std::to_string(dp.t());
        break;
      }
      for (; next <= spec.samples; ++next) {
        const double ts = next == spec.samples ? tb : ta + next * dt;
        if (ts > rec.t1) break;
        const auto y = next == spec.samples ? rec.y1 : rec.at(ts);
        path.samples.push_back({ts, y[0], y[1]});
      }
    }
  } catch (const NodalSingularity& e) {
    path.status = TrajStatus::nodal_singularity;
    path.message = e.what();
  }
  if (path.samples.size() > 1) path.deflection = final_direction(path.samples);
  return path;
}

bool segments_cross(const PlaneSample& p1, const PlaneSample& p2, const PlaneSample& q1, const PlaneSample& q2) {
  auto orient = [](const PlaneSample& a, const PlaneSample& b, const PlaneSample& c) {
    return (b.x - a.x) * (c.z - a.z) - (b.z - a.z) * (c.x - a.x);
  };
  const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * (i + j) + 1.0;
    i = j + 1;
  }
  return r;
}

}  // namespace

RutherfordRun run_rutherford(const SemiclassicalSpec& spec) {
  spec.validate();
  RutherfordRun run;
  run.spec = spec;
  const double ta = spec.start_time();
  const double zc = spec.params.v0() * ta;
  struct Start {
    std::size_t ib;
    double x, z;
  };
  std::vector<Start> starts;
  for (std::size_t ib = 0; ib < spec.b_list.size(); ++ib) {
    const double b = spec.b_list[ib];
    starts.push_back({ib, b, zc});
    if (spec.cloud > 1) {
      const double h = spec.cloud_halfwidth * spec.params.D;
      for (int i = 0; i < spec.cloud; ++i)
        for (int j = 0; j < spec.cloud; ++j) {
          const double x = b - h + 2.0 * h * i / (spec.cloud - 1);
          const double z = zc - h + 2.0 * h * j / (spec.cloud - 1);
          if (x == b && z == zc) continue;
          starts.push_back({ib, x, z});
        }
    }
  }
  std::vector<RutherfordPath> all(starts.size());
  parallel_for(starts.size(), [&](std::size_t k) {
    const auto& s = starts[k];
    all[k] = integrate_path(spec.b_list[s.ib], s.x, s.z, spec);
  });
  run.paths.resize(spec.b_list.size());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const auto& s = starts[k];
    all[k].weight = std::norm(eval_psi_semiclassical({s.x, 0.0, s.z}, ta, spec.b_list[s.ib], spec.params).value);
    run.paths[s.ib].push_back(std::move(all[k]));
  }
  for (auto& group : run.paths) {
    double W = 0.0;
    for (const auto& p : group) W += p.weight;
    if (W > 0.0)
      for (auto& p : group) p.weight /= W;
  }
  return run;
}

double classical_deflection(double b, const SemiclassicalParams& p) {
  if (!(b > 0.0)) throw DomainError("classical_deflection: b must be positive");
  return 2.0 * std::atan(p.coupling() / (p.k0 * p.k0 * b));
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman: need two equal-length samples of size >= 2");
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

DeflectionReport deflection_vs_b(const RutherfordRun& run, int bins) {
  if (bins < 1) throw DomainError("deflection_vs_b: bins must be >= 1");
  DeflectionReport rep;
  for (std::size_t ib = 0; ib < run.paths.size(); ++ib) {
    const auto& group = run.paths[ib];
    const double b = run.spec.b_list[ib];
    rep.b.push_back(b);
    rep.centre.push_back(group.front().deflection);
    rep.classical.push_back(classical_deflection(b, run.spec.params));
    // weighted mode on [-pi, pi]
    std::vector<double> h(bins, 0.0);
    for (const auto& p : group) {
      if (!p.ok()) continue;
      const int k = std::clamp(static_cast<int>((p.deflection + units::pi) / (2.0 * units::pi) * bins), 0, bins - 1);
      h[k] += p.weight;
    }
    if (group.size() == 1) {
      rep.most_probable.push_back(group.front().deflection);
    } else {
      const auto k = std::max_element(h.begin(), h.end()) - h.begin();
      double num = 0.0, den = 0.0;
      const double lo = -units::pi + 2.0 * units::pi * k / bins, hi = lo + 2.0 * units::pi / bins;
      for (const auto& p : group)
        if (p.ok() && p.deflection >= lo && p.deflection < hi) {
          num += p.weight * p.deflection;
          den += p.weight;
        }
      rep.most_probable.push_back(den > 0.0 ? num / den : 0.5 * (lo + hi));
    }
  }
  if (rep.b.size() >= 3) rep.spearman = spearman(rep.b, rep.most_probable);
  return rep;
}

bool paths_cross(const RutherfordPath& a, const RutherfordPath& b) {
  for (std::size_t i = 1; i < a.samples.size(); ++i)
    for (std::size_t j = 1; j < b.samples.size(); ++j)
      if (segments_cross(a.samples[i - 1], a.samples[i], b.samples[j - 1], b.samples[j])) return true;
  return false;
}

}  // namespace pilotscat

namespace pilotscat {

double min_separation(const RutherfordPath& a, const RutherfordPath& b) {
  const std::size_t n = std::min(a.samples.size(), b.samples.size());
  if (n == 0) throw DomainError("min_separation: empty path");
  double best = std::hypot(a.samples[0].x - b.samples[0].x, a.samples[0].z - b.samples[0].z);
  for (std::size_t i = 1; i < n; ++i) {
    if (a.samples[i].t != b.samples[i].t) throw DomainError("min_separation: paths use different time grids");
    const double dx0 = a.samples[i - 1].x - b.samples[i - 1].x, dz0 = a.samples[i - 1].z - b.samples[i - 1].z;
    const double dx1 = a.samples[i].x - b.samples[i].x, dz1 = a.samples[i].z - b.samples[i].z;
    // closest approach of d(s) = d0 + s (d1 - d0), s in [0, 1]
    const double ex = dx1 - dx0, ez = dz1 - dz0;
    const double ee = ex * ex + ez * ez;
    const double s = ee > 0.0 ? std::clamp(-(dx0 * ex + dz0 * ez) / ee, 0.0, 1.0) : 0.0;
    best = std::min(best, std::hypot(dx0 + s * ex, dz0 + s * ez));
  }
  return best;
}

}  // namespace pilotscat
