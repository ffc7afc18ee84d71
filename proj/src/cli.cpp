#include "mrshe/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "mrshe/csv.hpp"
#include "mrshe/errors.hpp"
#include "mrshe/manifest.hpp"
#include "mrshe/pairwise.hpp"
#include "mrshe/philox.hpp"
#include "mrshe/solver.hpp"
#include "mrshe/transport.hpp"

namespace mrshe {

namespace {

using nlohmann::json;

json grid_json(const SpaceTimeGrid& grid) {
  return {{"T", grid.T}, {"nt", grid.nt}, {"nx", grid.nx},
          {"dt", grid.dt()}, {"dx", grid.dx()}, {"cfl_ok", grid.cfl_ok()}};
}

}  // namespace

SimulateOutputs run_simulate_pipeline(const SimulateConfig& cfg) {
  SolveOptions opts;
  opts.n_particles = cfg.n_particles;
  opts.seed = cfg.seed;
  opts.workers = cfg.workers;
  opts.snapshot_times = cfg.snapshots;
  opts.allow_unstable = cfg.allow_unstable;
  DriftField drift = cfg.drift.value_or(DriftField::constant(0.0));
  if (cfg.drift.has_value()) opts.drift = &drift;
  const Trajectory traj =
      solve_mean_reflected(cfg.grid, cfg.coeffs, cfg.obstacle, opts);

  SimulateOutputs out;
  json doc;
  doc["grid"] = grid_json(cfg.grid);
  doc["n_particles"] = cfg.n_particles;
  doc["seed"] = cfg.seed;
  doc["diagnostics"] = {
      {"flatness_residual", traj.flatness},
      {"min_constraint", traj.min_constraint},
      {"mean_sup_sq", traj.mean_sup_sq},
      {"total_k_increment", traj.total_k_increment},
      {"total_k_mass", traj.total_k_mass},
      {"k_boundary_fraction", traj.k_boundary_fraction},
      {"boundary_concentration_flag", traj.boundary_concentration_flag}};
  json snaps = json::array();
  for (const Snapshot& s : traj.snapshots)
    snaps.push_back({{"t", s.t}, {"step", s.step}});
  doc["snapshots"] = snaps;
  out.trajectory_json = doc.dump(2) + "\n";

  {
    CsvWriter csv;
    std::vector<std::string> names{"t_index"};
    for (int j = 1; j <= traj.k.n_interior; ++j)
      names.push_back("dk_" + std::to_string(j));
    csv.header(names);
    for (int n = 0; n < traj.k.nt; ++n) {
      std::vector<double> row{static_cast<double>(n)};
      const auto r = traj.k.row(n);
      row.insert(row.end(), r.begin(), r.end());
      csv.row(row);
    }
    out.k_csv = csv.str();
  }
  {
    CsvWriter csv;
    csv.header({"t", "x", "u_mean"});
    for (const Snapshot& s : traj.snapshots)
      for (int j = 0; j < cfg.grid.n_nodes(); ++j)
        csv.row({s.t, cfg.grid.x_at(j), s.mean_field[static_cast<std::size_t>(j)]});
    out.snapshots_csv = csv.str();
  }
  return out;
}

CoupleOutputs run_couple_pipeline(const CoupleConfig& cfg) {
  CouplingOptions opts;
  opts.n_pairs = cfg.n_pairs;
  opts.seed = cfg.seed;
  opts.marginal_t = cfg.marginal_t;
  opts.marginal_x = cfg.marginal_x;
  opts.workers = cfg.workers;
  opts.snapshot_times = cfg.snapshots;
  const CouplingReport report =
      run_coupling(cfg.grid, cfg.coeffs, cfg.obstacle, cfg.drift, opts);

  json doc;
  doc["grid"] = grid_json(cfg.grid);
  // Echo the scientific inputs only: execution parameters (worker count,
  // output directory) must not break byte-comparability of reports.
  json inputs = cfg.echo;
  inputs.erase("workers");
  inputs.erase("output_dir");
  doc["inputs"] = inputs;
  doc["n_pairs"] = report.n_pairs;
  doc["seed"] = report.seed;
  doc["entropy_h"] = report.entropy_h;
  doc["dist_sq"] = report.dist_sq;
  doc["dist_sq_se"] = report.dist_sq_se;
  doc["dist_sq_boot_se"] = report.dist_sq_boot_se;
  doc["w2_marginal"] = report.w2_marginal;
  doc["w2_sq_log_boot_se"] = report.w2_sq_log_boot_se;
  doc["log_c1"] = report.log_c1;
  if (report.log_c2.has_value()) doc["log_c2"] = *report.log_c2;
  doc["margins"] = {{"log_margin_dist", report.log_margin_dist},
                    {"log_margin_marginal", report.log_margin_marginal},
                    {"log_margin_projection", report.log_margin_projection}};
  doc["marginal"] = {{"t", report.marginal_t},
                     {"x", report.marginal_x},
                     {"node", report.marginal_node}};
  doc["stage1"] = {{"flatness_residual", report.stage1_flatness},
                   {"min_constraint", report.stage1_min_constraint},
                   {"total_k_mass", report.stage1_total_k_mass}};
  doc["drifted_constraint_min"] = report.drifted_constraint_min;

  CoupleOutputs out;
  out.report_json = doc.dump(2) + "\n";
  CsvWriter csv;
  csv.header({"pair", "u_marginal", "u_twin_marginal", "dist_sq"});
  for (int i = 0; i < report.n_pairs; ++i)
    csv.row({static_cast<double>(i),
             report.marginal_u[static_cast<std::size_t>(i)],
             report.marginal_u_twin[static_cast<std::size_t>(i)],
             report.dist_sq_samples[static_cast<std::size_t>(i)]});
  out.marginals_csv = csv.str();
  return out;
}

ConstantsOutputs run_constants_pipeline(const ConstantsConfig& cfg) {
  json doc;
  doc["env"] = {{"T", cfg.env.horizon},
                {"C_T", cfg.env.lipschitz},
                {"M_sigma", cfg.env.sigma_bound}};
  json tq = json::object();
  for (double q : cfg.q_samples)
    tq[format_double(q)] = log_c_tq(cfg.env.horizon, q);
  doc["log_c_tq"] = tq;
  const InfimumResult tpe =
      log_c_tpe_detail(cfg.env.horizon, cfg.p, cfg.eps);
  doc["log_c_tpe"] = {{"p", cfg.p},
                      {"eps", cfg.eps},
                      {"value", tpe.log_value},
                      {"argmin_q", tpe.argmin}};
  const ConstantResult c1 = log_c1_detail(cfg.env);
  doc["log_c1"] = {{"value", c1.log_value},
                   {"argmin_eps", c1.eps_argmin},
                   {"argmin_q", c1.q_argmin}};
  if (cfg.env.has_ratio()) {
    doc["env"]["c_h"] = cfg.env.lip_lower;
    doc["env"]["C_h"] = cfg.env.lip_upper;
    const ConstantResult c2 = log_c2_detail(cfg.env);
    doc["log_c2"] = {{"value", c2.log_value},
                     {"argmin_eps", c2.eps_argmin},
                     {"argmin_q", c2.q_argmin}};
  }
  return {doc.dump(2) + "\n"};
}

KernelCheckOutputs run_kernel_check_pipeline(const KernelCheckConfig& cfg) {
  const HeatKernelConfig& kernel = cfg.kernel;
  KernelCheckOutputs out;

  double max_negative = 0.0;
  double max_symmetry = 0.0;
  double max_na_excess = 0.0;
  double max_series_diff = 0.0;
  double max_mass_excess = 0.0;
  double max_l2_excess = 0.0;
  double max_semigroup_err = 0.0;

  CsvWriter pointwise;
  pointwise.header({"t", "x", "y", "value", "na_bound", "symmetry_err",
                    "series_diff"});
  for (int a = 0; a < cfg.t_samples; ++a) {
    const double t =
        cfg.t_min + (cfg.t_max - cfg.t_min) * a / (cfg.t_samples - 1);
    for (int b = 0; b < cfg.x_samples; ++b) {
      const double x = static_cast<double>(b) / (cfg.x_samples - 1);
      for (int c = 0; c < cfg.y_samples; ++c) {
        const double y = static_cast<double>(c) / (cfg.y_samples - 1);
        const double v = eval_kernel(t, x, y, kernel);
        const double sym = std::abs(v - eval_kernel(t, y, x, kernel));
        const double na = nash_aronson_bound(t, x, y);
        const double series =
            std::abs(eval_kernel_image(t, x, y, kernel) -
                     eval_kernel_eigen(t, x, y, kernel));
        max_negative = std::min(max_negative, v);
        max_symmetry = std::max(max_symmetry, sym);
        max_na_excess = std::max(max_na_excess, v - na);
        max_series_diff = std::max(max_series_diff, series);
        pointwise.row({t, x, y, v, na, sym, series});
      }
    }
  }
  out.pointwise_csv = pointwise.str();

  CsvWriter integrals;
  integrals.header({"t", "x", "mass", "l2", "l2_bound"});
  for (int a = 0; a < cfg.t_samples; ++a) {
    const double t =
        cfg.t_min + (cfg.t_max - cfg.t_min) * a / (cfg.t_samples - 1);
    const double l2_bound = 1.0 / std::sqrt(2.0 * 3.14159265358979323846 * t);
    for (int b = 1; b < cfg.x_samples - 1; ++b) {
      const double x = static_cast<double>(b) / (cfg.x_samples - 1);
      const RowIntegrals row = kernel_row_integrals(t, x, kernel, cfg.quad_n);
      max_mass_excess = std::max(max_mass_excess, row.mass - 1.0);
      max_l2_excess = std::max(max_l2_excess, row.l2 - l2_bound);
      integrals.row({t, x, row.mass, row.l2, l2_bound});
    }
  }
  out.integrals_csv = integrals.str();

  // Semigroup identity on the configured sub-sample.
  const double pairs[2] = {0.05, 0.1};
  for (double t : pairs) {
    for (double s : pairs) {
      for (int b = 1; b < 10; ++b) {
        const double x = b / 10.0;
        for (int c = 1; c < 10; ++c) {
          const double y = c / 10.0;
          double conv = 0.0;
          const int n = 2048;
          const double h = 1.0 / n;
          for (int k = 1; k < n; ++k) {
            const double z = k * h;
            conv += h * eval_kernel(t, x, z, kernel) * eval_kernel(s, z, y, kernel);
          }
          const double direct = eval_kernel(t + s, x, y, kernel);
          max_semigroup_err = std::max(max_semigroup_err, std::abs(conv - direct));
        }
      }
    }
  }

  json doc;
  doc["sample"] = {{"t_samples", cfg.t_samples},
                   {"x_samples", cfg.x_samples},
                   {"y_samples", cfg.y_samples},
                   {"t_min", cfg.t_min},
                   {"t_max", cfg.t_max},
                   {"quad_n", cfg.quad_n}};
  doc["max_negative_value"] = max_negative;
  doc["max_symmetry_err"] = max_symmetry;
  doc["max_nash_aronson_excess"] = max_na_excess;
  doc["max_series_diff"] = max_series_diff;
  doc["max_mass_excess_over_1"] = max_mass_excess;
  doc["max_l2_excess_over_bound"] = max_l2_excess;
  doc["max_semigroup_err"] = max_semigroup_err;
  out.all_ok = max_negative >= 0.0 && max_symmetry <= 1e-12 &&
               max_na_excess <= 1e-10 && max_series_diff <= kernel.tol &&
               max_mass_excess <= kernel.tol && max_l2_excess <= 1e-6 &&
               max_semigroup_err <= 1e-6;
  doc["all_ok"] = out.all_ok;
  out.summary_json = doc.dump(2) + "\n";
  return out;
}

ConcentrationOutputs run_concentration_pipeline(const ConcentrationConfig& cfg) {
  std::vector<double> samples;
  if (cfg.source == "gaussian") {
    samples.resize(static_cast<std::size_t>(cfg.n_samples));
    for (int i = 0; i < cfg.n_samples; ++i)
      samples[static_cast<std::size_t>(i)] =
          normal_at(cfg.seed, 0, static_cast<std::uint64_t>(i));
  } else {
    SolveOptions opts;
    opts.n_particles = cfg.n_samples;
    opts.seed = cfg.seed;
    opts.workers = cfg.workers;
    const Trajectory traj =
        solve_mean_reflected(cfg.grid, cfg.coeffs, cfg.obstacle, opts);
    samples = traj.particle_sup;
  }
  const ConcentrationProfileResult profile =
      concentration_profile(samples, cfg.eps);

  ConcentrationOutputs out;
  CsvWriter csv;
  csv.header({"eps", "tail", "se"});
  for (const TailRow& row : profile.rows) csv.row({row.eps, row.tail, row.se});
  out.tails_csv = csv.str();

  json doc;
  doc["source"] = cfg.source;
  doc["n_samples"] = profile.n_samples;
  doc["median"] = profile.median;
  doc["fitted_log_tail_slope"] = profile.fitted_slope;
  doc["n_fit_points"] = profile.n_fit_points;
  out.report_json = doc.dump(2) + "\n";
  return out;
}

namespace {

json load_config_or_empty(const std::string& path) {
  if (path.empty()) return json::object();
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw config_error("config root must be a JSON object");
  return j;
}

struct CommonFlags {
  std::string config_path;
  std::string output_dir;
  std::int64_t seed = -1;
  int workers = 0;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file");
    app->add_option("--output-dir", output_dir, "output directory");
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--workers", workers, "worker count");
  }
  void apply(json& j) const {
    if (!output_dir.empty()) j["output_dir"] = output_dir;
    if (seed >= 0) j["seed"] = seed;
    if (workers > 0) j["workers"] = workers;
    // Environment override for the output directory only.
    if (const char* env = std::getenv("MRSHE_OUTPUT_DIR"))
      j["output_dir"] = std::string(env);
  }
};

class StageTimer {
 public:
  explicit StageTimer(RunManifest& manifest, std::string stage)
      : manifest_(manifest), stage_(std::move(stage)),
        start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto end = std::chrono::steady_clock::now();
    manifest_.add_timing(stage_,
                         std::chrono::duration<double>(end - start_).count());
  }

 private:
  RunManifest& manifest_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Monte Carlo tools for mean-reflected stochastic heat equations"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run the particle ensemble");
  CommonFlags sim_flags;
  sim_flags.attach(sim);
  int sim_particles = 0;
  bool sim_allow_unstable = false;
  sim->add_option("--n-particles", sim_particles, "ensemble size");
  sim->add_flag("--allow-unstable", sim_allow_unstable,
                "acknowledge a CFL-violating grid");

  auto* couple = app.add_subcommand("couple", "run the coupling experiment");
  CommonFlags couple_flags;
  couple_flags.attach(couple);
  int couple_pairs = 0;
  couple->add_option("--n-pairs", couple_pairs, "pair count");

  auto* constants = app.add_subcommand("constants", "evaluate the constants");
  CommonFlags constants_flags;
  constants_flags.attach(constants);
  double cT = -1.0, cCT = -1.0, cMs = -1.0, cch = -1.0, cCh = -1.0;
  double cp = -1.0, ceps = -1.0;
  constants->add_option("--T", cT, "horizon");
  constants->add_option("--c-t", cCT, "Lipschitz constant of the coefficients");
  constants->add_option("--m-sigma", cMs, "uniform bound of sigma");
  constants->add_option("--c-h", cch, "lower bi-Lipschitz constant of h");
  constants->add_option("--C-h", cCh, "upper bi-Lipschitz constant of h");
  constants->add_option("--p", cp, "moment order for the C(T,p,eps) record");
  constants->add_option("--eps", ceps, "eps for the C(T,p,eps) record");

  auto* kernel = app.add_subcommand("kernel-check", "verify the kernel bounds");
  CommonFlags kernel_flags;
  kernel_flags.attach(kernel);

  auto* conc = app.add_subcommand("concentration", "empirical tail profile");
  CommonFlags conc_flags;
  conc_flags.attach(conc);
  std::string conc_source;
  int conc_samples = 0;
  conc->add_option("--source", conc_source, "gaussian or simulation");
  conc->add_option("--n-samples", conc_samples, "sample count");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  if (sim->parsed()) {
    json j = load_config_or_empty(sim_flags.config_path);
    sim_flags.apply(j);
    if (sim_particles > 0) j["n_particles"] = sim_particles;
    if (sim_allow_unstable) j["allow_unstable"] = true;
    const SimulateConfig cfg = parse_simulate(j);
    RunManifest manifest(cfg.echo, kVersion);
    SimulateOutputs out;
    {
      StageTimer timer(manifest, "simulate");
      out = run_simulate_pipeline(cfg);
    }
    manifest.write_output(cfg.output_dir, "trajectory.json", out.trajectory_json);
    manifest.write_output(cfg.output_dir, "k_increments.csv", out.k_csv);
    manifest.write_output(cfg.output_dir, "snapshots.csv", out.snapshots_csv);
    manifest.write(cfg.output_dir);
    std::cout << out.trajectory_json;
    return 0;
  }
  if (couple->parsed()) {
    json j = load_config_or_empty(couple_flags.config_path);
    couple_flags.apply(j);
    if (couple_pairs > 0) j["n_pairs"] = couple_pairs;
    const CoupleConfig cfg = parse_couple(j);
    RunManifest manifest(cfg.echo, kVersion);
    CoupleOutputs out;
    {
      StageTimer timer(manifest, "couple");
      out = run_couple_pipeline(cfg);
    }
    manifest.write_output(cfg.output_dir, "coupling_report.json", out.report_json);
    manifest.write_output(cfg.output_dir, "marginals.csv", out.marginals_csv);
    manifest.write(cfg.output_dir);
    std::cout << out.report_json;
    return 0;
  }
  if (constants->parsed()) {
    json j = load_config_or_empty(constants_flags.config_path);
    constants_flags.apply(j);
    if (cT >= 0.0) j["T"] = cT;
    if (cCT >= 0.0) j["C_T"] = cCT;
    if (cMs >= 0.0) j["M_sigma"] = cMs;
    if (cch >= 0.0) j["c_h"] = cch;
    if (cCh >= 0.0) j["C_h"] = cCh;
    if (cp >= 0.0) j["p"] = cp;
    if (ceps >= 0.0) j["eps"] = ceps;
    const ConstantsConfig cfg = parse_constants(j);
    const ConstantsOutputs out = run_constants_pipeline(cfg);
    std::cout << out.record_json;
    if (!cfg.output_dir.empty()) {
      RunManifest manifest(cfg.echo, kVersion);
      manifest.write_output(cfg.output_dir, "constants.json", out.record_json);
      manifest.write(cfg.output_dir);
    }
    return 0;
  }
  if (kernel->parsed()) {
    json j = load_config_or_empty(kernel_flags.config_path);
    kernel_flags.apply(j);
    const KernelCheckConfig cfg = parse_kernel_check(j);
    RunManifest manifest(cfg.echo, kVersion);
    KernelCheckOutputs out;
    {
      StageTimer timer(manifest, "kernel-check");
      out = run_kernel_check_pipeline(cfg);
    }
    manifest.write_output(cfg.output_dir, "kernel_summary.json", out.summary_json);
    manifest.write_output(cfg.output_dir, "kernel_pointwise.csv", out.pointwise_csv);
    manifest.write_output(cfg.output_dir, "kernel_integrals.csv", out.integrals_csv);
    manifest.write(cfg.output_dir);
    std::cout << out.summary_json;
    if (!out.all_ok) throw bound_violation("kernel-check: a bound failed");
    return 0;
  }
  if (conc->parsed()) {
    json j = load_config_or_empty(conc_flags.config_path);
    conc_flags.apply(j);
    if (!conc_source.empty()) j["source"] = conc_source;
    if (conc_samples > 0) j["n_samples"] = conc_samples;
    const ConcentrationConfig cfg = parse_concentration(j);
    RunManifest manifest(cfg.echo, kVersion);
    ConcentrationOutputs out;
    {
      StageTimer timer(manifest, "concentration");
      out = run_concentration_pipeline(cfg);
    }
    manifest.write_output(cfg.output_dir, "concentration.json", out.report_json);
    manifest.write_output(cfg.output_dir, "tails.csv", out.tails_csv);
    manifest.write(cfg.output_dir);
    std::cout << out.report_json;
    return 0;
  }
  return 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const blowup_error& e) {
    std::cerr << "numerical blow-up at step " << e.step << ": " << e.what()
              << "\n";
    return 3;
  } catch (const bound_violation& e) {
    std::cerr << "assertion failed: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mrshe
