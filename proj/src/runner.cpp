#include "pilotscat/runner.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "pilotscat/errors.hpp"
#include "pilotscat/flowgeom.hpp"
#include "pilotscat/observables.hpp"
#include "pilotscat/parallel.hpp"
#include "pilotscat/rutherford.hpp"
#include "pilotscat/trajectories.hpp"

namespace pilotscat {

using json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string RunManifest::to_json() const {
  json j;
  j["scenario"] = scenario_name;
  j["task"] = task;
  j["scenario_sha256"] = scenario_sha256;
  j["tool_version"] = tool_version;
  j["seed"] = seed;
  j["threads"] = threads;
  j["files"] = json::array();
  for (const auto& f : files) j["files"].push_back({{"name", f.name}, {"role", f.role}, {"rows", f.rows}, {"sha256", f.sha256}});
  j["summary"] = json::parse(summary_json);
  j["wall_clock_s"] = wall_clock_s;
  return j.dump(2) + "\n";
}

namespace {

class Csv {
 public:
  explicit Csv(const std::string& header) : text_(header + "\n") {}

  template <class... Fields>
  void row(const Fields&... f) {
    bool first = true;
    (put(f, first), ...);
    text_ += '\n';
    ++rows_;
  }
  const std::string& text() const { return text_; }
  std::size_t rows() const { return rows_; }

 private:
  void sep(bool& first) {
    if (!first) text_ += ',';
    first = false;
  }
  void put(double v, bool& first) {
    sep(first);
    text_ += format_number(v);
  }
  void put(std::size_t v, bool& first) {
    sep(first);
    text_ += std::to_string(v);
  }
  void put(const std::string& v, bool& first) {
    sep(first);
    text_ += v;
  }
  std::string text_;
  std::size_t rows_ = 0;
};

class Emitter {
 public:
  explicit Emitter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& role, const std::string& text, std::size_t rows) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    out << text;
    if (!out) throw Error("write failed for " + (dir_ / name).string());
    files_.push_back({name, role, rows, sha256_hex(text)});
  }
  void write(const std::string& name, const std::string& role, const Csv& csv) {
    write(name, role, csv.text(), csv.rows());
  }
  std::vector<EmittedFile> files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<EmittedFile> files_;
};

double deg(double d) { return d * units::pi / 180.0; }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

Ensemble swarm_for(const Scenario& s, const WaveModel& model, const std::vector<Surface>& surfaces) {
  const auto& p = s.params;
  GridSpec grid = default_grid(*s.beam);
  grid.nz = p.nz;
  grid.nR = p.nR;
  if (!std::isnan(p.z_min)) grid.z_min = p.z_min;
  if (!std::isnan(p.z_max)) grid.z_max = p.z_max;
  if (!std::isnan(p.R_min)) grid.R_min = p.R_min;
  if (!std::isnan(p.R_max)) grid.R_max = p.R_max;
  const double scale = s.time_scale();
  const double t1 = p.t_end * scale;
  IntegratorOptions opt;
  opt.rtol = p.rtol;
  opt.atol = p.atol;
  opt.sample_dt = std::isnan(p.sample_dt) ? t1 / 500.0 : p.sample_dt * scale;
  opt.surfaces = surfaces;
  return run_swarm(grid, 0.0, t1, model, opt);
}

void emit_trajectories(Emitter& em, const Ensemble& ens) {
  Csv csv("traj_id,t_fs,z_nm,R_nm");
  for (std::size_t i = 0; i < ens.trajectories.size(); ++i)
    for (const auto& smp : ens.trajectories[i].samples) csv.row(i, smp.t, smp.z, smp.R);
  em.write("trajectories.csv", "trajectories", csv);
}

void emit_angular(Emitter& em, const AngularHistogram& h) {
  Csv csv("theta_rad,weight");
  for (std::size_t i = 0; i < h.bins(); ++i) csv.row(h.center(i), h.weight[i]);
  em.write("angular.csv", "angular", csv);
}

json swarm_summary(const Ensemble& ens) {
  json failures = json::array();
  for (std::size_t i = 0; i < ens.trajectories.size(); ++i)
    if (!ens.trajectories[i].ok())
      failures.push_back({{"traj_id", i}, {"status", to_string(ens.trajectories[i].status)}});
  return {{"members", ens.trajectories.size()},
          {"failures", ens.failures},
          {"coverage", num(ens.coverage)},
          {"failed", failures}};
}

json run_separator(const Scenario& s, Emitter& em) {
  const auto model = s.wave_model();
  const auto& p = s.params;
  const double scale = s.time_scale();
  const auto grid = default_theta_grid(p.n_theta);
  SeparatorOptions opt;
  opt.significance = p.significance;
  Csv csv("t_fs,theta_rad,r_s_nm,topology");
  json snaps = json::array();
  std::vector<std::pair<double, Topology>> topo;
  for (double tu : p.times) {
    const double t = tu * scale;
    const auto curve = separator_curve(t, model, grid, opt);
    const std::string name = to_string(curve.topology);
    for (const auto& smp : curve.samples) csv.row(t, smp.theta, smp.r, name);
    snaps.push_back({{"t_fs", t}, {"topology", name}, {"rays_with_root", curve.samples.size()}});
    topo.emplace_back(t, curve.topology);
  }
  em.write("separator.csv", "separator", csv);
  json out{{"snapshots", snaps}, {"transition_t_fs", nullptr}};
  if (p.transition) {
    for (std::size_t i = 1; i < topo.size(); ++i)
      if (topo[i - 1].second == Topology::open_pair && topo[i].second == Topology::closed) {
        out["transition_t_fs"] = separator_transition_time(topo[i - 1].first, topo[i].first, model, grid, 1.0, opt);
        break;
      }
  }
  return out;
}

json run_vortices(const Scenario& s, Emitter& em) {
  const auto model = s.wave_model();
  const auto& p = s.params;
  const double scale = s.time_scale();
  NodalWindow w;
  w.theta_min = p.theta_min_rad;
  w.theta_max = p.theta_max_rad;
  w.r_min = p.r_min;
  w.r_max = p.r_max;
  w.samples = p.window_samples;
  w.max_nodes = static_cast<std::size_t>(p.max_nodes);
  Csv csv("t_fs,nodal_R_nm,nodal_z_nm,x_R_nm,x_z_nm,lambda_plus,lambda_minus,R_X_nm,class");
  json snaps = json::array();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double tu : p.times) {
    const double t = tu * scale;
    const auto nodes = nodal_points(t, model, w);
    std::size_t unresolved = 0;
    for (const auto& n : nodes) {
      try {
        const auto v = vortex_analysis(n, t, model);
        csv.row(t, n.point.R, n.point.z, v.xpoint.R, v.xpoint.z, v.lambda_plus, v.lambda_minus, v.R_X,
                to_string(v.nodal_class));
      } catch (const XPointNotFound&) {
        ++unresolved;
        csv.row(t, n.point.R, n.point.z, nan, nan, nan, nan, nan, std::string("unresolved"));
      }
    }
    snaps.push_back({{"t_fs", t}, {"nodes", nodes.size()}, {"xpoint_not_found", unresolved}});
  }
  em.write("vortices.csv", "vortices", csv);
  return {{"snapshots", snaps}, {"vortex_size_estimate_nm", vortex_size_estimate(model)}};
}

json run_swarm_task(const Scenario& s, Emitter& em) {
  const auto model = s.wave_model();
  const auto& p = s.params;
  const auto ens = swarm_for(s, model, {});
  emit_trajectories(em, ens);
  json out = swarm_summary(ens);
  if (!p.pradial_thetas_deg.empty()) {
    std::vector<double> th;
    for (double d : p.pradial_thetas_deg) th.push_back(deg(d));
    RadialOptions ro;
    ro.nr = p.nr;
    const auto curves = radial_distribution(ens, model, th, ro);
    Csv csv("theta_rad,r_nm,P");
    json meta = json::array();
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < c.r.size(); ++i) csv.row(c.theta, c.r[i], c.P[i]);
      meta.push_back({{"theta_rad", c.theta}, {"preimages", c.preimages}, {"degenerate", c.degenerate}});
    }
    em.write("pradial.csv", "pradial", csv);
    out["pradial"] = meta;
  }
  emit_angular(em, angular_distribution(ens, p.angular_bins));
  return out;
}

json run_bragg(const Scenario& s, Emitter& em) {
  const auto model = s.wave_model();
  const auto ens = swarm_for(s, model, {});
  emit_trajectories(em, ens);
  const auto h = angular_distribution(ens, s.params.angular_bins);
  emit_angular(em, h);
  json out = swarm_summary(ens);
  const auto table = bragg_angles(model.beam.k0, s.target->a);
  json matches = json::array();
  for (const auto& m : match_bragg_peaks(h, table))
    matches.push_back({{"q", m.q}, {"theta_q", m.theta_q}, {"matched", m.matched}});
  out["bragg"] = matches;
  json peaks = json::array();
  for (const auto& pk : histogram_peaks(h))
    if (pk.significant) peaks.push_back(pk.theta);
  out["significant_peaks_rad"] = peaks;
  return out;
}

json run_arrival(const Scenario& s, Emitter& em) {
  const auto model = s.wave_model();
  const auto& p = s.params;
  const auto ens = swarm_for(s, model, {Surface::sphere(p.l_D)});
  emit_trajectories(em, ens);
  Csv csv("theta_rad,t_fs,weight");
  json per = json::array();
  std::size_t ok = 0;
  std::string last_error;
  for (double d : p.thetas_deg) {
    const double th = deg(d);
    json rec{{"theta_rad", th}};
    try {
      const auto a = arrival_distribution_empirical(ens, th, deg(p.dtheta_deg), p.l_D, p.bins);
      for (std::size_t i = 0; i < a.t.size(); ++i) csv.row(th, a.t[i], a.weight[i]);
      rec["members"] = a.members;
      rec["center_fs"] = num(a.center);
      rec["sigma_fs"] = num(a.sigma);
      ++ok;
    } catch (const InsufficientStatistics& e) {
      rec["error"] = e.what();
      last_error = e.what();
    }
    try {
      const auto an = arrival_distribution_analytic(th, p.l_D, model);
      rec["analytic"] = {{"kind", to_string(an.kind)}, {"center_fs", an.center}, {"sigma_fs", an.sigma},
                         {"floored", an.floored}};
    } catch (const RegimeViolation& e) {
      rec["analytic"] = {{"error", e.what()}};
    }
    per.push_back(rec);
  }
  if (ok == 0) throw InsufficientStatistics("no detector angle collected enough members: " + last_error);
  em.write("arrival.csv", "arrival", csv);
  json out = swarm_summary(ens);
  out["detectors"] = per;
  return out;
}

json run_tof(const Scenario& s, Emitter& em) {
  const auto model = s.wave_model();
  const auto& p = s.params;
  Csv csv("theta1_rad,theta2_rad,dT_bohm_fs,dT_hist_fs,dT_kij_fs");
  for (std::size_t i = 0; i < p.theta1_deg.size(); ++i) {
    const double a = deg(p.theta1_deg[i]);
    const double b = deg(p.theta2_deg.size() == 1 ? p.theta2_deg[0] : p.theta2_deg[i]);
    csv.row(a, b, tof_difference_bohm(a, b, model),
            tof_difference_histories(a, b, model.beam, s.target->Z, model.beam.Z1, p.signed_histories),
            tof_difference_kijowski(a, b));
  }
  em.write("tof.csv", "tof", csv);
  return {{"locus_constant_R0", tof_locus_constant(model)}, {"signed_histories", p.signed_histories}};
}

json run_profile(const Scenario& s, Emitter& em) {
  const auto model = s.wave_model();
  const auto& p = s.params;
  const double t = p.time * s.time_scale();
  std::vector<double> r(p.nr);
  for (int i = 0; i < p.nr; ++i) r[i] = p.r_min + (p.r_max - p.r_min) * i / (p.nr - 1);
  Csv csv("theta_rad,r_nm,P");
  for (double d : p.thetas_deg) {
    const auto c = direct_radial_profile(deg(d), t, model, r);
    for (std::size_t i = 0; i < c.r.size(); ++i) csv.row(c.theta, c.r[i], c.P[i]);
  }
  em.write("pradial.csv", "pradial", csv);
  return {{"t_fs", t}};
}

json run_rutherford_task(const Scenario& s, Emitter& em) {
  const auto run = run_rutherford(s.semiclassical_spec());
  Csv csv("b_fm,traj_id,t,x_fm,z_fm");
  json failed = json::array();
  std::size_t id = 0;
  for (const auto& group : run.paths)
    for (const auto& path : group) {
      for (const auto& smp : path.samples) csv.row(path.b, id, smp.t, smp.x, smp.z);
      if (!path.ok()) failed.push_back({{"traj_id", id}, {"status", to_string(path.status)}});
      ++id;
    }
  em.write("rutherford.csv", "rutherford", csv);
  const auto rep = deflection_vs_b(run);
  json out{{"b_fm", rep.b},
           {"centre_deflection_rad", rep.centre},
           {"most_probable_rad", rep.most_probable},
           {"classical_rad", rep.classical},
           {"spearman", rep.spearman ? json(*rep.spearman) : json(nullptr)},
           {"failed", failed}};
  return out;
}

[[noreturn]] void rethrow_with_context(const std::string& ctx) {
  try {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(ctx + e.what(), e.line(), e.field());
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + e.what());
  } catch (const DomainError& e) {
    throw DomainError(ctx + e.what());
  } catch (const NodalSingularity& e) {
    throw NodalSingularity(ctx + e.what());
  } catch (const NoRoot& e) {
    throw NoRoot(ctx + e.what());
  } catch (const XPointNotFound& e) {
    throw XPointNotFound(ctx + e.what());
  } catch (const StepUnderflow& e) {
    throw StepUnderflow(ctx + e.what());
  } catch (const RegimeViolation& e) {
    throw RegimeViolation(ctx + e.what());
  } catch (const InvalidGrid& e) {
    throw InvalidGrid(ctx + e.what());
  } catch (const DegenerateCell& e) {
    throw DegenerateCell(ctx + e.what());
  } catch (const InsufficientStatistics& e) {
    throw InsufficientStatistics(ctx + e.what());
  } catch (const Error& e) {
    throw Error(ctx + e.what());
  }
}

}  // namespace

RunManifest run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir) {
  scenario.validate();
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  Emitter em(out_dir);
  const std::string text = dump_scenario(scenario);
  json summary;
  try {
    switch (scenario.task) {
      case TaskKind::separator: summary = run_separator(scenario, em); break;
      case TaskKind::vortices: summary = run_vortices(scenario, em); break;
      case TaskKind::swarm: summary = run_swarm_task(scenario, em); break;
      case TaskKind::arrival: summary = run_arrival(scenario, em); break;
      case TaskKind::tof: summary = run_tof(scenario, em); break;
      case TaskKind::bragg: summary = run_bragg(scenario, em); break;
      case TaskKind::profile: summary = run_profile(scenario, em); break;
      case TaskKind::rutherford: summary = run_rutherford_task(scenario, em); break;
    }
  } catch (const Error&) {
    rethrow_with_context("task " + to_string(scenario.task) + ": ");
  }
  em.write("scenario.ini", "scenario", text, 0);

  RunManifest m;
  m.scenario_name = scenario.name;
  m.task = to_string(scenario.task);
  m.scenario_sha256 = sha256_hex(text);
  m.tool_version = tool_version;
  m.seed = scenario.seed;
  m.threads = thread_count();
  m.files = em.files();
  m.summary_json = summary.dump();
  m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream out(out_dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + (out_dir / "manifest.json").string());
  out << m.to_json();
  return m;
}

}  // namespace pilotscat
