#include "pilotscat/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pilotscat/errors.hpp"

namespace pilotscat {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out;
}

double parse_double(const std::string& v, const std::string& field, int line) {
  double x = 0.0;
  const char* b = v.data();
  const char* e = b + v.size();
  if (b != e && *b == '+') ++b;
  auto r = std::from_chars(b, e, x);
  if (r.ec != std::errc() || r.ptr != e || !std::isfinite(x))
    throw ParseError("line " + std::to_string(line) + ": " + field + ": expected a number, got '" + v + "'", line,
                     field);
  return x;
}

template <class I>
I parse_integer(const std::string& v, const std::string& field, int line) {
  I x{};
  auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    throw ParseError("line " + std::to_string(line) + ": " + field + ": expected an integer, got '" + v + "'", line,
                     field);
  return x;
}

bool parse_bool(const std::string& v, const std::string& field, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError("line " + std::to_string(line) + ": " + field + ": expected true or false, got '" + v + "'", line,
                   field);
}

std::vector<double> parse_list(const std::string& v, const std::string& field, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), field, line));
  if (out.empty()) throw ParseError("line " + std::to_string(line) + ": " + field + ": empty list", line, field);
  return out;
}

TimeUnit parse_time_unit(const std::string& v, const std::string& field, int line) {
  if (v == "fs") return TimeUnit::fs;
  if (v == "l0/v0") return TimeUnit::l0_over_v0;
  throw ParseError("line " + std::to_string(line) + ": " + field + ": expected fs or l0/v0, got '" + v + "'", line,
                   field);
}

// One key of a section: setter from text, getter to canonical text
// (nullopt when not given).
template <class S>
struct Field {
  std::string key;
  std::function<void(S&, const std::string&, const std::string&, int)> set;
  std::function<std::optional<std::string>(const S&)> get;
};

template <class S, class A>
Field<S> real(const char* key, A acc) {
  return {key, [acc](S& s, const std::string& v, const std::string& f, int line) { acc(s) = parse_double(v, f, line); },
          [acc](const S& s) -> std::optional<std::string> {
            const double x = acc(const_cast<S&>(s));
            if (std::isnan(x)) return std::nullopt;
            return fmt(x);
          }};
}

template <class S, class A>
Field<S> opt_real(const char* key, A acc) {
  return {key, [acc](S& s, const std::string& v, const std::string& f, int line) { acc(s) = parse_double(v, f, line); },
          [acc](const S& s) -> std::optional<std::string> {
            const auto& x = acc(const_cast<S&>(s));
            if (!x) return std::nullopt;
            return fmt(*x);
          }};
}

template <class S, class A>
Field<S> integer(const char* key, A acc) {
  return {key,
          [acc](S& s, const std::string& v, const std::string& f, int line) { acc(s) = parse_integer<int>(v, f, line); },
          [acc](const S& s) -> std::optional<std::string> { return std::to_string(acc(const_cast<S&>(s))); }};
}

template <class S, class A>
Field<S> boolean(const char* key, A acc) {
  return {key, [acc](S& s, const std::string& v, const std::string& f, int line) { acc(s) = parse_bool(v, f, line); },
          [acc](const S& s) -> std::optional<std::string> {
            return std::string(acc(const_cast<S&>(s)) ? "true" : "false");
          }};
}

template <class S, class A>
Field<S> list(const char* key, A acc) {
  return {key, [acc](S& s, const std::string& v, const std::string& f, int line) { acc(s) = parse_list(v, f, line); },
          [acc](const S& s) -> std::optional<std::string> {
            const auto& x = acc(const_cast<S&>(s));
            if (x.empty()) return std::nullopt;
            return fmt_list(x);
          }};
}

#define ACC(S, member) [](S& s) -> decltype(auto) { return (s.member); }

const std::vector<Field<BeamSpec>>& beam_fields() {
  static const std::vector<Field<BeamSpec>> f{
      real<BeamSpec>("k0", ACC(BeamSpec, k0)),     real<BeamSpec>("l", ACC(BeamSpec, l)),
      real<BeamSpec>("D", ACC(BeamSpec, D)),       real<BeamSpec>("l0", ACC(BeamSpec, l0)),
      real<BeamSpec>("Z1", ACC(BeamSpec, Z1)),     real<BeamSpec>("mass", ACC(BeamSpec, mass)),
  };
  return f;
}

const std::vector<Field<TargetSpec>>& target_fields() {
  static const std::vector<Field<TargetSpec>> f{
      real<TargetSpec>("Z", ACC(TargetSpec, Z)),
      real<TargetSpec>("a", ACC(TargetSpec, a)),
      real<TargetSpec>("d", ACC(TargetSpec, d)),
      real<TargetSpec>("deltaA", ACC(TargetSpec, deltaA)),
      integer<TargetSpec>("Nperp", ACC(TargetSpec, Nperp)),
      real<TargetSpec>("r0", ACC(TargetSpec, r0)),
  };
  return f;
}

const std::vector<Field<ModelOptions>>& model_fields() {
  static const std::vector<Field<ModelOptions>> f{
      real<ModelOptions>("c3", ACC(ModelOptions, c3)),
      real<ModelOptions>("c4", ACC(ModelOptions, c4)),
      boolean<ModelOptions>("exact_spreading", ACC(ModelOptions, exact_spreading)),
      opt_real<ModelOptions>("coupling", ACC(ModelOptions, coupling)),
  };
  return f;
}

const std::vector<Field<SemiclassicalSpec>>& semiclassical_fields() {
  using S = SemiclassicalSpec;
  static const std::vector<Field<S>> f{
      real<S>("k0", ACC(S, params.k0)),
      real<S>("D", ACC(S, params.D)),
      real<S>("l", ACC(S, params.l)),
      real<S>("Z1", ACC(S, params.Z1)),
      real<S>("Z", ACC(S, params.Z)),
      real<S>("mass", ACC(S, params.mass)),
      boolean<S>("exact_spreading", ACC(S, params.exact_spreading)),
      list<S>("b_list", ACC(S, b_list)),
      real<S>("t0", ACC(S, t0)),
      real<S>("t1", ACC(S, t1)),
      integer<S>("cloud", ACC(S, cloud)),
      real<S>("cloud_halfwidth", ACC(S, cloud_halfwidth)),
      real<S>("rtol", ACC(S, rtol)),
      real<S>("atol", ACC(S, atol)),
      integer<S>("samples", ACC(S, samples)),
  };
  return f;
}

const std::vector<Field<TaskParams>>& task_fields() {
  using T = TaskParams;
  static const std::vector<Field<T>> f{
      {"time_unit",
       [](T& s, const std::string& v, const std::string& fl, int line) { s.time_unit = parse_time_unit(v, fl, line); },
       [](const T& s) -> std::optional<std::string> { return to_string(s.time_unit); }},
      list<T>("times", ACC(T, times)),
      real<T>("time", ACC(T, time)),
      integer<T>("n_theta", ACC(T, n_theta)),
      real<T>("significance", ACC(T, significance)),
      boolean<T>("transition", ACC(T, transition)),
      real<T>("theta_min_rad", ACC(T, theta_min_rad)),
      real<T>("theta_max_rad", ACC(T, theta_max_rad)),
      real<T>("r_min", ACC(T, r_min)),
      real<T>("r_max", ACC(T, r_max)),
      integer<T>("window_samples", ACC(T, window_samples)),
      integer<T>("max_nodes", ACC(T, max_nodes)),
      real<T>("t_end", ACC(T, t_end)),
      integer<T>("nz", ACC(T, nz)),
      integer<T>("nR", ACC(T, nR)),
      real<T>("z_min", ACC(T, z_min)),
      real<T>("z_max", ACC(T, z_max)),
      real<T>("R_min", ACC(T, R_min)),
      real<T>("R_max", ACC(T, R_max)),
      real<T>("sample_dt", ACC(T, sample_dt)),
      real<T>("rtol", ACC(T, rtol)),
      real<T>("atol", ACC(T, atol)),
      list<T>("pradial_thetas_deg", ACC(T, pradial_thetas_deg)),
      integer<T>("nr", ACC(T, nr)),
      integer<T>("angular_bins", ACC(T, angular_bins)),
      real<T>("l_D", ACC(T, l_D)),
      list<T>("thetas_deg", ACC(T, thetas_deg)),
      real<T>("dtheta_deg", ACC(T, dtheta_deg)),
      integer<T>("bins", ACC(T, bins)),
      list<T>("theta1_deg", ACC(T, theta1_deg)),
      list<T>("theta2_deg", ACC(T, theta2_deg)),
      boolean<T>("signed_histories", ACC(T, signed_histories)),
  };
  return f;
}

#undef ACC

const std::vector<std::string>& swarm_keys() {
  static const std::vector<std::string> k{"time_unit", "t_end", "nz",        "nR",   "z_min", "z_max",
                                          "R_min",     "R_max", "sample_dt", "rtol", "atol"};
  return k;
}

// [task] keys read by each task, in canonical order.
std::vector<std::string> task_keys(TaskKind k) {
  auto with = [](std::vector<std::string> a, std::initializer_list<const char*> b) {
    for (auto* s : b) a.emplace_back(s);
    return a;
  };
  switch (k) {
    case TaskKind::separator:
      return {"time_unit", "times", "n_theta", "significance", "transition"};
    case TaskKind::vortices:
      return {"time_unit", "times",          "theta_min_rad", "theta_max_rad",
              "r_min",     "r_max",          "window_samples", "max_nodes"};
    case TaskKind::swarm:
      return with(swarm_keys(), {"pradial_thetas_deg", "nr", "angular_bins"});
    case TaskKind::arrival:
      return with(swarm_keys(), {"l_D", "thetas_deg", "dtheta_deg", "bins"});
    case TaskKind::bragg:
      return with(swarm_keys(), {"angular_bins"});
    case TaskKind::tof:
      return {"theta1_deg", "theta2_deg", "signed_histories"};
    case TaskKind::profile:
      return {"time_unit", "time", "thetas_deg", "r_min", "r_max", "nr"};
    case TaskKind::rutherford:
      return {};
  }
  return {};
}

template <class S>
const Field<S>* find_field(const std::vector<Field<S>>& fields, const std::string& key) {
  for (const auto& f : fields)
    if (f.key == key) return &f;
  return nullptr;
}

template <class S>
void dump_fields(std::ostream& os, const S& s, const std::vector<Field<S>>& fields) {
  for (const auto& f : fields)
    if (auto v = f.get(s)) os << f.key << " = " << *v << "\n";
}

struct Entry {
  std::string key, value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

// Splits text into the top-level block and named sections.
std::vector<Section> split_sections(const std::string& text) {
  static const std::set<std::string> known{"beam", "target", "model", "task", "semiclassical"};
  std::vector<Section> out(1);
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ParseError("line " + std::to_string(line) + ": malformed section header '" + s + "'", line);
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (!known.count(name))
        throw ParseError("line " + std::to_string(line) + ": unknown section [" + name + "]", line, name);
      if (!seen.insert(name).second)
        throw ParseError("line " + std::to_string(line) + ": duplicate section [" + name + "]", line, name);
      out.push_back({name, line, {}});
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line) + ": expected 'key = value', got '" + s + "'", line);
    Entry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    const std::string field = out.back().name.empty() ? e.key : out.back().name + "." + e.key;
    if (e.key.empty()) throw ParseError("line " + std::to_string(line) + ": missing key", line);
    if (e.value.empty()) throw ParseError("line " + std::to_string(line) + ": " + field + ": missing value", line, field);
    for (const auto& prev : out.back().entries)
      if (prev.key == e.key)
        throw ParseError("line " + std::to_string(line) + ": duplicate key " + field, line, field);
    out.back().entries.push_back(std::move(e));
  }
  return out;
}

template <class S>
void apply(S& s, const Section& sec, const std::vector<Field<S>>& fields,
           const std::vector<std::string>* allowed = nullptr, const std::string& why = {}) {
  for (const auto& e : sec.entries) {
    const std::string field = sec.name + "." + e.key;
    const auto* f = find_field(fields, e.key);
    const bool ok = f && (!allowed || std::find(allowed->begin(), allowed->end(), e.key) != allowed->end());
    if (!ok)
      throw ParseError("line " + std::to_string(e.line) + ": unknown key " + field + why, e.line, field);
    f->set(s, e.value, field, e.line);
  }
}

// Splits "a; b; " style messages from the spec validators.
void collect(std::vector<std::string>& out, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    const std::string prefix = colon == std::string::npos ? "" : msg.substr(0, colon + 2);
    std::stringstream ss(colon == std::string::npos ? msg : msg.substr(colon + 2));
    std::string part;
    while (std::getline(ss, part, ';')) {
      part = trim(part);
      if (!part.empty()) out.push_back(prefix + part);
    }
  }
}

bool in_open_deg(double a) { return a > 0.0 && a < 180.0; }

}  // namespace

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::separator: return "separator";
    case TaskKind::vortices: return "vortices";
    case TaskKind::swarm: return "swarm";
    case TaskKind::arrival: return "arrival";
    case TaskKind::tof: return "tof";
    case TaskKind::bragg: return "bragg";
    case TaskKind::profile: return "profile";
    case TaskKind::rutherford: return "rutherford";
  }
  return "?";
}

TaskKind task_from_string(const std::string& name) {
  for (auto k : {TaskKind::separator, TaskKind::vortices, TaskKind::swarm, TaskKind::arrival, TaskKind::tof,
                 TaskKind::bragg, TaskKind::profile, TaskKind::rutherford})
    if (to_string(k) == name) return k;
  throw ParseError("unknown task '" + name + "'", 0, "task");
}

std::string to_string(TimeUnit u) { return u == TimeUnit::fs ? "fs" : "l0/v0"; }

double Scenario::time_scale() const {
  if (params.time_unit == TimeUnit::fs) return 1.0;
  if (!beam) throw ValidationError("time_unit l0/v0 needs a [beam] section");
  return beam->l0 / beam->v0();
}

WaveModel Scenario::wave_model() const {
  if (!beam) throw ValidationError("task " + to_string(task) + " needs a [beam] section");
  return make_model(*beam, target, mode, model.value_or(ModelOptions{}));
}

SemiclassicalSpec Scenario::semiclassical_spec() const {
  if (!semiclassical) throw ValidationError("task rutherford needs a [semiclassical] section");
  return *semiclassical;
}

void Scenario::validate() const {
  std::vector<std::string> bad;
  const auto add = [&](const std::string& m) { bad.push_back(m); };
  const auto& p = params;
  if (name.empty()) add("name is empty");

  if (task == TaskKind::rutherford) {
    if (mode != WaveMode::semiclassical) add("task rutherford needs mode = semiclassical");
    if (!semiclassical) add("missing [semiclassical] section");
    else collect(bad, [&] { semiclassical->validate(); });
    if (beam) add("[beam] is not used by task rutherford");
    if (target) add("[target] is not used by task rutherford");
    if (model) add("[model] is not used by task rutherford");
  } else {
    if (semiclassical) add("[semiclassical] is only used by task rutherford");
    if (mode == WaveMode::semiclassical) add("mode semiclassical is only valid for task rutherford");
    if (!beam) add("missing [beam] section");
    else collect(bad, [&] { beam->validate(); });
    if (target) collect(bad, [&] { target->validate(); });
    else if (mode != WaveMode::free || task == TaskKind::tof) add("missing [target] section");
    if (model) {
      if (!(model->c3 > 0.0)) add("model: c3 must be > 0");
      if (!(model->c4 > 0.0)) add("model: c4 must be > 0");
    }
    if (bad.empty() && mode != WaveMode::semiclassical) collect(bad, [&] { (void)wave_model(); });
  }

  const bool swarm_like = task == TaskKind::swarm || task == TaskKind::arrival || task == TaskKind::bragg;
  switch (task) {
    case TaskKind::separator:
      if (p.times.empty()) add("task: times is required");
      if (p.n_theta < 3) add("task: n_theta must be >= 3");
      if (!(p.significance > 0.0 && p.significance < 1.0)) add("task: significance must be in (0, 1)");
      if (p.transition && p.times.size() < 2) add("task: transition needs at least two times");
      break;
    case TaskKind::vortices:
      if (p.times.empty()) add("task: times is required");
      if (std::isnan(p.theta_min_rad) || std::isnan(p.theta_max_rad))
        add("task: theta_min_rad and theta_max_rad are required");
      else if (!(p.theta_min_rad > 0.0 && p.theta_min_rad < p.theta_max_rad && p.theta_max_rad < units::pi))
        add("task: need 0 < theta_min_rad < theta_max_rad < pi");
      if (std::isnan(p.r_min) || std::isnan(p.r_max)) add("task: r_min and r_max are required");
      else if (!(p.r_min > 0.0 && p.r_min < p.r_max)) add("task: need 0 < r_min < r_max");
      if (p.window_samples < 2) add("task: window_samples must be >= 2");
      if (p.max_nodes < 1) add("task: max_nodes must be >= 1");
      break;
    case TaskKind::tof:
      if (p.theta1_deg.empty() || p.theta2_deg.empty()) add("task: theta1_deg and theta2_deg are required");
      if (p.theta2_deg.size() != 1 && p.theta2_deg.size() != p.theta1_deg.size())
        add("task: theta2_deg must hold one angle or as many as theta1_deg");
      for (double a : p.theta1_deg)
        if (!in_open_deg(a)) add("task: theta1_deg values must be in (0, 180)");
      for (double a : p.theta2_deg)
        if (!in_open_deg(a)) add("task: theta2_deg values must be in (0, 180)");
      break;
    case TaskKind::profile:
      if (std::isnan(p.time)) add("task: time is required");
      if (p.thetas_deg.empty()) add("task: thetas_deg is required");
      for (double a : p.thetas_deg)
        if (!in_open_deg(a)) add("task: thetas_deg values must be in (0, 180)");
      if (std::isnan(p.r_min) || std::isnan(p.r_max)) add("task: r_min and r_max are required");
      else if (!(p.r_min > 0.0 && p.r_min < p.r_max)) add("task: need 0 < r_min < r_max");
      if (p.nr < 2) add("task: nr must be >= 2");
      break;
    default:
      break;
  }
  if (swarm_like) {
    if (std::isnan(p.t_end)) add("task: t_end is required");
    else if (!(p.t_end > 0.0)) add("task: t_end must be > 0");
    if (p.nz < 2 || p.nR < 2) add("task: nz and nR must be >= 2");
    if (!std::isnan(p.z_min) && !std::isnan(p.z_max) && !(p.z_min < p.z_max)) add("task: need z_min < z_max");
    if (!std::isnan(p.R_min) && !(p.R_min >= 0.0)) add("task: R_min must be >= 0");
    if (!std::isnan(p.R_min) && !std::isnan(p.R_max) && !(p.R_min < p.R_max)) add("task: need R_min < R_max");
    if (!std::isnan(p.sample_dt) && !(p.sample_dt > 0.0)) add("task: sample_dt must be > 0");
    if (!(p.rtol > 0.0) || !(p.atol > 0.0)) add("task: rtol and atol must be > 0");
  }
  if (task == TaskKind::swarm) {
    for (double a : p.pradial_thetas_deg)
      if (!in_open_deg(a)) add("task: pradial_thetas_deg values must be in (0, 180)");
    if (p.nr < 2) add("task: nr must be >= 2");
  }
  if (task == TaskKind::swarm || task == TaskKind::bragg)
    if (p.angular_bins < 1) add("task: angular_bins must be >= 1");
  if (task == TaskKind::bragg && mode != WaveMode::bragg && mode != WaveMode::diffuse)
    add("task bragg needs mode bragg or diffuse");
  if (task == TaskKind::arrival) {
    if (std::isnan(p.l_D)) add("task: l_D is required");
    else if (!(p.l_D > 0.0)) add("task: l_D must be > 0");
    if (p.thetas_deg.empty()) add("task: thetas_deg is required");
    for (double a : p.thetas_deg)
      if (!in_open_deg(a)) add("task: thetas_deg values must be in (0, 180)");
    if (!(p.dtheta_deg > 0.0 && p.dtheta_deg <= 90.0)) add("task: dtheta_deg must be in (0, 90]");
    if (p.bins < 1) add("task: bins must be >= 1");
    if (beam && beam->k0 > 0.0 && p.l_D > 0.0 && p.t_end > 0.0 && beam->l0 > 0.0 &&
        p.t_end * time_scale() <= (p.l_D + beam->l0) / beam->v0())
      add("task: t_end must exceed the arrival time (l_D + l0) / v0 of the packet centre");
  }

  if (!bad.empty()) {
    std::string msg = "invalid scenario '" + name + "':";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw ValidationError(msg);
  }
}

Scenario parse_scenario(const std::string& text) {
  const auto sections = split_sections(text);
  Scenario s;
  std::optional<WaveMode> mode;
  bool have_name = false, have_task = false;
  for (const auto& e : sections.front().entries) {
    if (e.key == "name") {
      s.name = e.value;
      have_name = true;
    } else if (e.key == "task") {
      try {
        s.task = task_from_string(e.value);
      } catch (const ParseError&) {
        throw ParseError("line " + std::to_string(e.line) + ": unknown task '" + e.value + "'", e.line, "task");
      }
      have_task = true;
    } else if (e.key == "mode") {
      try {
        mode = wave_mode_from_string(e.value);
      } catch (const ValidationError&) {
        throw ParseError("line " + std::to_string(e.line) + ": unknown mode '" + e.value + "'", e.line, "mode");
      }
    } else if (e.key == "seed") {
      s.seed = parse_integer<std::uint64_t>(e.value, "seed", e.line);
    } else {
      throw ParseError("line " + std::to_string(e.line) + ": unknown key " + e.key, e.line, e.key);
    }
  }
  if (!have_task) throw ParseError("missing top-level key 'task'", 0, "task");
  if (!have_name) throw ParseError("missing top-level key 'name'", 0, "name");
  s.mode = mode.value_or(s.task == TaskKind::rutherford ? WaveMode::semiclassical : WaveMode::diffuse);

  for (std::size_t i = 1; i < sections.size(); ++i) {
    const auto& sec = sections[i];
    if (sec.name == "beam") {
      s.beam.emplace();
      apply(*s.beam, sec, beam_fields());
    } else if (sec.name == "target") {
      s.target.emplace();
      apply(*s.target, sec, target_fields());
    } else if (sec.name == "model") {
      s.model.emplace();
      apply(*s.model, sec, model_fields());
    } else if (sec.name == "task") {
      const auto allowed = task_keys(s.task);
      apply(s.params, sec, task_fields(), &allowed, " (not used by task " + to_string(s.task) + ")");
    } else if (sec.name == "semiclassical") {
      s.semiclassical.emplace();
      apply(*s.semiclassical, sec, semiclassical_fields());
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string dump_scenario(const Scenario& s) {
  std::ostringstream os;
  os << "name = " << s.name << "\n";
  os << "task = " << to_string(s.task) << "\n";
  os << "mode = " << to_string(s.mode) << "\n";
  os << "seed = " << s.seed << "\n";
  if (s.beam) {
    os << "\n[beam]\n";
    dump_fields(os, *s.beam, beam_fields());
  }
  if (s.target) {
    os << "\n[target]\n";
    dump_fields(os, *s.target, target_fields());
  }
  if (s.model) {
    os << "\n[model]\n";
    dump_fields(os, *s.model, model_fields());
  }
  std::ostringstream task;
  for (const auto& key : task_keys(s.task)) {
    const auto* f = find_field(task_fields(), key);
    if (auto v = f->get(s.params)) task << key << " = " << *v << "\n";
  }
  if (!task.str().empty()) os << "\n[task]\n" << task.str();
  if (s.semiclassical) {
    os << "\n[semiclassical]\n";
    dump_fields(os, *s.semiclassical, semiclassical_fields());
  }
  return os.str();
}

namespace {

const char* const fig2_beam_target = R"([beam]
k0 = 887.7
l = 10000
D = 1000
l0 = 30000
Z1 = -1
mass = 1

[target]
Z = 79
a = 0.257
d = 420
deltaA = 0
Nperp = 0
r0 = 0.05

[model]
c3 = 0.3
c4 = 0.8
exact_spreading = false
)";

std::string fig_preset(const std::string& head, const std::string& task) {
  return head + "\n" + fig2_beam_target + "\n[task]\n" + task;
}

const std::map<std::string, std::string>& presets() {
  static const std::map<std::string, std::string> p{
      {"fig2", fig_preset("name = fig2\ntask = separator\nmode = diffuse\nseed = 0\n",
                          "time_unit = l0/v0\n"
                          "times = 0, 0.6, 1.2, 1.8, 2.4\n"
                          "n_theta = 512\n"
                          "significance = 1e-04\n"
                          "transition = true\n")},
      {"fig3", fig_preset("name = fig3\ntask = vortices\nmode = diffuse\nseed = 0\n",
                          "time_unit = l0/v0\n"
                          "times = 1\n"
                          "theta_min_rad = 1.49999\n"
                          "theta_max_rad = 1.50003\n"
                          "r_min = 1400\n"
                          "r_max = 2100\n"
                          "window_samples = 8\n"
                          "max_nodes = 4096\n")},
      {"fig4", fig_preset("name = fig4\ntask = swarm\nmode = diffuse\nseed = 0\n",
                          "time_unit = l0/v0\n"
                          "t_end = 2\n"
                          "nz = 25\n"
                          "nR = 25\n"
                          "z_min = -50000\n"
                          "z_max = -10000\n"
                          "R_min = 10\n"
                          "R_max = 4000\n"
                          "sample_dt = 0.01\n"
                          "rtol = 1e-08\n"
                          "atol = 1e-06\n"
                          "pradial_thetas_deg = 5, 15, 25, 35, 45, 55, 65, 75, 85, 95, 105, 115, 125, 135, 145, 165\n"
                          "nr = 200\n"
                          "angular_bins = 180\n")},
      {"fig5", fig_preset("name = fig5\ntask = bragg\nmode = bragg\nseed = 0\n",
                          "time_unit = l0/v0\n"
                          "t_end = 2\n"
                          "nz = 25\n"
                          "nR = 25\n"
                          "z_min = -50000\n"
                          "z_max = -10000\n"
                          "R_min = 10\n"
                          "R_max = 4000\n"
                          "sample_dt = 0.01\n"
                          "rtol = 1e-08\n"
                          "atol = 1e-06\n"
                          "angular_bins = 180\n")},
      {"fig6", fig_preset("name = fig6\ntask = tof\nmode = diffuse\nseed = 0\n",
                          "theta1_deg = 55, 60, 70, 80, 90, 100, 110, 120, 130, 140, 150\n"
                          "theta2_deg = 150\n"
                          "signed_histories = false\n")},
      {"fig7", "name = fig7\ntask = rutherford\nmode = semiclassical\nseed = 0\n"
               "\n[semiclassical]\n"
               "k0 = 1\n"
               "D = 10\n"
               "l = 10\n"
               "Z1 = 2\n"
               "Z = 79\n"
               "mass = 7100\n"
               "exact_spreading = true\n"
               "b_list = 10, 12, 15\n"
               "cloud = 0\n"
               "cloud_halfwidth = 1\n"
               "rtol = 1e-09\n"
               "atol = 1e-09\n"
               "samples = 400\n"},
  };
  return p;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

const std::string& preset_text(const std::string& name) {
  const auto& p = presets();
  auto it = p.find(name);
  if (it == p.end()) throw ParseError("unknown preset '" + name + "'", 0, "preset");
  return it->second;
}

Scenario load_preset(const std::string& name) { return parse_scenario(preset_text(name)); }

}  // namespace pilotscat
