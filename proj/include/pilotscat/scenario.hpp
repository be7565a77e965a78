#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pilotscat/rutherford.hpp"
#include "pilotscat/wavefield.hpp"

namespace pilotscat {

enum class TaskKind { separator, vortices, swarm, arrival, tof, bragg, profile, rutherford };
std::string to_string(TaskKind k);
// Throws ParseError for unknown names.
TaskKind task_from_string(const std::string& name);

enum class TimeUnit { fs, l0_over_v0 };
std::string to_string(TimeUnit u);

// Parameters of all tasks; each task reads the subset listed in
// docs/scenario-format.md. NaN and empty lists mean "not given".
struct TaskParams {
  static constexpr double unset = std::numeric_limits<double>::quiet_NaN();

  TimeUnit time_unit = TimeUnit::l0_over_v0;

  // separator, vortices
  std::vector<double> times;
  int n_theta = 512;
  double significance = 1e-4;
  bool transition = false;
  double theta_min_rad = unset, theta_max_rad = unset;
  int window_samples = 64;
  int max_nodes = 4096;

  // swarm, arrival, bragg
  double t_end = unset;
  int nz = 25, nR = 25;
  double z_min = unset, z_max = unset, R_min = unset, R_max = unset;  // [nm]
  double sample_dt = unset;  // unset: t_end / 500
  double rtol = 1e-8;
  double atol = 1e-6;  // [nm]
  std::vector<double> pradial_thetas_deg;
  int angular_bins = 180;

  // arrival
  double l_D = unset;  // [nm]
  std::vector<double> thetas_deg;  // also profile
  double dtheta_deg = 5.0;
  int bins = 40;

  // tof
  std::vector<double> theta1_deg, theta2_deg;
  bool signed_histories = false;

  // profile
  double time = unset;
  double r_min = unset, r_max = unset;  // [nm]; also vortices
  int nr = 200;                         // also swarm
};

struct Scenario {
  std::string name;
  TaskKind task = TaskKind::separator;
  WaveMode mode = WaveMode::diffuse;
  std::uint64_t seed = 0;
  std::optional<BeamSpec> beam;
  std::optional<TargetSpec> target;
  std::optional<ModelOptions> model;
  TaskParams params;
  std::optional<SemiclassicalSpec> semiclassical;

  // Scale of task times: 1 for fs, l0 / v0 otherwise.
  double time_scale() const;
  // Throws ValidationError listing every problem found.
  void validate() const;
  WaveModel wave_model() const;
  SemiclassicalSpec semiclassical_spec() const;
};

// Parses scenario text; throws ParseError (with line and field) for syntax,
// unknown sections, keys or names and malformed values, then validates.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

// Canonical text: fixed section and key order, shortest round-trip numbers.
std::string dump_scenario(const Scenario& s);

std::vector<std::string> preset_names();
// Canonical text of a built-in preset; throws ParseError if unknown.
const std::string& preset_text(const std::string& name);
Scenario load_preset(const std::string& name);

}  // namespace pilotscat
