#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>

#include "diracgb/analysis.hpp"
#include "diracgb/harness.hpp"
#include "diracgb/io.hpp"

using namespace dgb;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfig = 2;
constexpr int kInvariant = 3;

struct Overrides {
  std::optional<double> dt_factor, dy_factor;
  std::string theta;
  std::optional<int> threads;
  std::string out;
  std::string epsilon_list;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--dt-factor", o.dt_factor, "time step as a multiple of sqrt(eps)");
  cmd->add_option("--dy-factor", o.dy_factor, "initial beam spacing as a multiple of sqrt(eps)");
  cmd->add_option("--theta", o.theta, "truncation radius, or 'auto'");
  cmd->add_option("--threads", o.threads, "worker threads (0 keeps the default)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", o.out, "output directory");
}

// Flags override the file by re-parsing a one-key snippet, so values get the
// same validation and error messages as the config file.
ExperimentConfig resolve(const std::string& path, const Overrides& o) {
  ExperimentConfig c = load_config(path);
  auto apply = [&](const std::string& section, const std::string& key, const std::string& value) {
    const ExperimentConfig one = parse_config("[" + section + "]\n" + key + " = " + value + "\n");
    if (key == "dt_factor") c.dt_factor = one.dt_factor;
    else if (key == "dy_factor") c.dy_factor = one.dy_factor;
    else if (key == "theta") c.theta = one.theta;
    else if (key == "threads") c.threads = one.threads;
    else if (key == "dir") c.out_dir = one.out_dir;
    else if (key == "epsilon") c.epsilons = one.epsilons;
  };
  if (o.dt_factor) c.dt_factor = *o.dt_factor;
  if (o.dy_factor) c.dy_factor = *o.dy_factor;
  if (!o.theta.empty()) apply("discretization", "theta", o.theta);
  if (o.threads) c.threads = *o.threads;
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.epsilon_list.empty()) apply("experiment", "epsilon", o.epsilon_list);
  return c;
}

void print_rates(const std::vector<RateRow>& rates) {
  std::cout << "norm,variant,t,slope,residual,points\n";
  for (const auto& r : rates)
    std::cout << r.norm << ',' << r.variant << ',' << r.t << ',' << std::fixed << std::setprecision(4) << r.fit.slope
              << ',' << std::scientific << std::setprecision(2) << r.fit.residual << std::defaultfloat << ','
              << r.fit.epsilon.size() << '\n';
}

int run(const std::string& path, const Overrides& o) {
  const ExperimentConfig c = resolve(path, o);
  const ExperimentResult r = run_experiment(c, &std::cout);
  if (!r.rates.empty()) print_rates(r.rates);
  std::cout << "outputs written to " << c.out_dir << '\n';
  return kOk;
}

Field load_field(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".dgbf") return read_field_binary(path);
  return read_field_csv(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian beam and spectral solvers for the semiclassical Dirac equation"};
  app.require_subcommand(1);

  Overrides run_o, sweep_o;
  std::string run_cfg, sweep_cfg;
  auto* run_cmd = app.add_subcommand("run", "run the experiment described by a config file");
  run_cmd->add_option("config", run_cfg, "config file")->required()->check(CLI::ExistingFile);
  add_overrides(run_cmd, run_o);

  auto* sweep_cmd = app.add_subcommand("sweep", "run a config over a list of epsilon values");
  sweep_cmd->add_option("config", sweep_cfg, "config file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--epsilon-list", sweep_o.epsilon_list, "comma separated, e.g. 1/256,1/512")->required();
  add_overrides(sweep_cmd, sweep_o);

  std::string field_a, field_b, scaling = "mesh_avg";
  auto* cmp_cmd = app.add_subcommand("compare", "error norms between two field snapshots");
  cmp_cmd->add_option("field_a", field_a, "field under test (.csv or .dgbf)")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("field_b", field_b, "reference field")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--scaling", scaling, "mesh_avg or raw_sum")->check(CLI::IsMember({"mesh_avg", "raw_sum"}));

  std::string errors_csv;
  auto* rates_cmd = app.add_subcommand("rates", "fit convergence rates from an errors.csv");
  rates_cmd->add_option("errors", errors_csv, "errors.csv written by run or sweep")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run_cmd) return run(run_cfg, run_o);
    if (*sweep_cmd) return run(sweep_cfg, sweep_o);
    if (*cmp_cmd) {
      const Field a = load_field(field_a), b = load_field(field_b);
      const ErrorReport r = error_norms(a, b, scaling == "raw_sum" ? NormScaling::RawSum : NormScaling::MeshAverage);
      std::cout << "epsilon,l1,l2,linf,linf_rel,variant\n"
                << std::setprecision(17) << r.epsilon << ',' << r.l1 << ',' << r.l2 << ',' << r.linf << ','
                << r.linf_rel << ',' << to_string(r.scaling) << '\n';
      return kOk;
    }
    if (*rates_cmd) {
      print_rates(rates_from_errors_csv(errors_csv));
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
