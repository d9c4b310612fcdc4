#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diracgb/analysis.hpp"
#include "diracgb/initial_data.hpp"
#include "diracgb/potential.hpp"

namespace dgb {

struct ExperimentConfig {
  // [experiment]
  std::string method = "lagrangian";  // lagrangian | eulerian | spectral
  std::string example = "example1";   // example1 | example2 | example3 | custom
  int dim = 3;
  std::vector<double> epsilons{1.0 / 256};
  std::vector<double> times{0.5};  // comparison and snapshot times, ascending
  std::string compare = "exact";   // exact | spectral | none
  int threads = 0;                 // 0 keeps the runtime default

  // [potential]; empty name selects the example's own potential
  std::string potential;
  std::map<std::string, double> potential_params;

  // [discretization]
  double dt_factor = 0.5;  // dt = dt_factor sqrt(eps)
  double dy_factor = 0.5;  // beam spacing dy0 = dy_factor sqrt(eps)
  double domain_lo = -0.5;
  double domain_hi = 0.5;
  std::size_t eval_points = 129;  // per axis of the comparison grid
  bool slice = true;              // x3 = 0 slice for d = 3
  std::optional<double> theta;    // empty: default_theta
  std::size_t spectral_points = 512;
  double spectral_dt = 0.0;  // 0: one step per interval without potential, eps / 4 otherwise
  std::size_t phase_y_points = 129;
  std::size_t phase_xi_points = 129;
  double xi_lo = -0.6;
  double xi_hi = 0.6;
  double delta_width = 2.0;
  std::string divergence = "total";  // total | partial

  // [custom]
  std::vector<double> custom_center;
  std::vector<double> custom_momentum;
  double custom_width = kPacketWidth;
  double custom_curvature = 0.0;
  double custom_cosine_bump = 0.0;

  // [output]
  std::string out_dir = "diracgb-out";
  std::string field_format = "csv";  // csv | binary | none
  bool write_beams = false;
  double memory_cap_gib = 8.0;
};

/// Parses sectioned key = value text. Numbers accept the forms "0.25" and
/// "1/256"; lists are comma separated. Unknown sections or keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& c);

/// Throws ConfigError (message naming the key) for out-of-range values or incompatible combinations.
void validate_config(const ExperimentConfig& c);

/// Peak bytes one epsilon of the run would allocate, estimated up front.
std::size_t estimate_memory(const ExperimentConfig& c, double eps);

InitialData experiment_data(const ExperimentConfig& c);
PotentialPtr experiment_potential(const ExperimentConfig& c);

struct ErrorRow {
  ErrorReport report;
  std::string variant;  // mesh_avg | raw_sum | gb_normalized
  double t = 0.0;
};

struct RateRow {
  std::string norm;  // l1 | l2 | linf | linf_rel
  std::string variant;
  double t = 0.0;
  RateFit fit;
};

struct ExperimentResult {
  std::vector<ErrorRow> errors;
  std::vector<RateRow> rates;
  std::vector<std::string> notes;
};

/// Runs every epsilon of the configuration: initialise, evolve through the
/// configured times, reconstruct, compare, and write errors.csv, rates.csv,
/// run.meta and snapshots into out_dir. Progress goes to `log` when given.
ExperimentResult run_experiment(const ExperimentConfig& c, std::ostream* log = nullptr);

void write_errors_csv(const std::string& path, const ExperimentConfig& c, const std::vector<ErrorRow>& rows);
void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows);

/// Fits every norm and variant of `rows` against epsilon, separately per time.
std::vector<RateRow> fit_rates(const std::vector<ErrorRow>& rows);

/// Reads an errors.csv back as (epsilon, error) pairs per (norm, variant, t) and fits them.
std::vector<RateRow> rates_from_errors_csv(const std::string& path);

}  // namespace dgb
