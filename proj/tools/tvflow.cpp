#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tvflow/diagnostics.hpp"
#include "tvflow/flow.hpp"
#include "tvflow/io.hpp"
#include "tvflow/jko.hpp"
#include "tvflow/ot.hpp"
#include "tvflow/rof.hpp"
#include "tvflow/tv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvflow;

namespace {

std::string iso_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int effective_threads() {
  const char* env = std::getenv("TVFLOW_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1)
    throw ValidationError("TVFLOW_THREADS must be a positive integer");
  return 1;  // solvers are single-threaded; the variable is validated only
}

void dump_json(const json& j) { std::cout << j.dump(2) << "\n"; }

json report_json(const CertificateReport& rep) {
  return {{"gap", rep.gap},
          {"sup_norm_violation", rep.sup_norm_violation},
          {"tol_gap", rep.tol_gap},
          {"tol_z", rep.tol_z},
          {"j_value", rep.j_value},
          {"pass", rep.pass}};
}

json estimate_json(const EstimateCheck& ec) {
  return {{"lhs", ec.lhs}, {"rhs", ec.rhs}, {"pass", ec.pass}};
}

std::vector<double> decile_thresholds(const Density& rho) {
  MinMax mm = minmax(rho);
  std::vector<double> ts;
  for (int q = 1; q <= 9; ++q)
    ts.push_back(mm.min + (mm.max - mm.min) * q / 10.0);
  return ts;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("short write to '" + path + "'");
}

// ---------------------------------------------------------------------------

struct RofArgs {
  int dim = 1, n = 128;
  std::string preset = "step";
  std::string input;  // density checkpoint overrides the preset
  double fidelity = 8.0;
  double gap_tol = 1e-10;
  int max_iters = 400000;
  std::string output_csv, pair_out;
};

int cmd_rof(const RofArgs& a) {
  Density g = a.input.empty()
                  ? make_datum(make_grid(a.dim, a.n), a.preset)
                  : load_density_checkpoint(a.input);
  RofConfig cfg;
  cfg.fidelity = a.fidelity;
  cfg.gap_tol = a.gap_tol;
  cfg.max_iters = a.max_iters;
  RofSolution sol = rof_solve(g, cfg);
  if (!a.output_csv.empty()) write_field_csv(a.output_csv, sol.u);
  if (!a.pair_out.empty()) {
    Density u(sol.u.grid, sol.u.v);  // the minimizer keeps mass and sign
    save_pair_checkpoint(a.pair_out, u, sol.z);
  }
  dump_json({{"j_value", sol.j_value},
             {"gap", sol.gap},
             {"el_residual", sol.el_residual},
             {"iters", sol.iters}});
  return kExitOk;
}

struct W2Args {
  int dim = 1, n = 128;
  std::string preset_a = "bumps", preset_b = "uniform";
  std::string input_a, input_b;
  std::string method = "auto";
  double eps = 5e-4;
};

int cmd_w2(const W2Args& a) {
  TorusGrid grid = make_grid(a.dim, a.n);
  Density mu = a.input_a.empty() ? make_datum(grid, a.preset_a)
                                 : load_density_checkpoint(a.input_a);
  Density nu = a.input_b.empty() ? make_datum(mu.grid(), a.preset_b)
                                 : load_density_checkpoint(a.input_b);
  TransportSpec spec = default_transport(mu.grid());
  if (a.method == "exact")
    spec.method = OtMethod::exact_1d;
  else if (a.method == "exact_cells")
    spec.method = OtMethod::exact_1d_cells;
  else if (a.method == "entropic")
    spec.method = OtMethod::entropic;
  else if (a.method == "lp")
    spec.method = OtMethod::lp_oracle;
  else if (a.method != "auto")
    throw ValidationError(
        "method must be auto, exact, exact_cells, entropic or lp");
  spec.entropic.eps = a.eps;
  TransportResult res = solve_transport(mu, nu, spec);
  const char* names[] = {"exact_1d", "entropic", "lp_oracle",
                         "exact_1d_cells"};
  dump_json({{"w2_squared", res.w2_squared},
             {"marginal_error", res.marginal_error},
             {"method", names[int(res.method)]}});
  return kExitOk;
}

json step_json(const JkoStepResult& step, const MaximumPrincipleReport& mp) {
  return {{"converged", step.converged},
          {"objective", step.objective},
          {"w2_squared", step.w2_squared},
          {"j_value", step.j_value},
          {"penalty_value", step.penalty_value},
          {"energy_decrease", step.energy_decrease},
          {"residual_dev", step.residual_dev},
          {"el_constant", step.el_constant},
          {"cert_gap", step.cert_gap},
          {"outer_iters", step.outer_iters},
          {"inner_iters_total", step.inner_iters_total},
          {"maximum_principle",
           {{"min_prev", mp.min_prev},
            {"max_prev", mp.max_prev},
            {"min_next", mp.min_next},
            {"max_next", mp.max_next},
            {"pass", mp.pass}}}};
}

int cmd_step(const std::string& config_path, const std::string& pair_out) {
  RunConfig rc = load_run_config(config_path);
  Density rho0 = datum_from(rc);
  JkoConfig cfg = jko_config_from(rc);
  JkoStepResult step = jko_step(rho0, cfg);
  MaximumPrincipleReport mp = maximum_principle_check(rho0, step.rho_next);
  if (!pair_out.empty())
    save_pair_checkpoint(pair_out, step.rho_next, step.z);
  dump_json(step_json(step, mp));
  if (!step.converged)
    throw NoConvergence("jko step did not reach residual tolerance",
                        "residual_dev = " + std::to_string(step.residual_dev));
  return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            bool force) {
  RunConfig rc = load_run_config(config_path);
  fs::path dir(out_dir);
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!force)
      throw IoError("output directory '" + out_dir +
                    "' exists (use --force to reuse it)");
  } else if (!fs::create_directories(dir, ec) || ec) {
    throw IoError("cannot create output directory '" + out_dir + "'");
  }

  Density rho0 = datum_from(rc);
  JkoConfig cfg = jko_config_from(rc);
  MinMax mm0 = minmax(rho0);
  double j0 = total_variation(rho0);
  double f0 = flow_energy(rho0, cfg.barrier);

  json manifest = {{"format", "tvflow-run"},
                   {"version", 1},
                   {"created", iso_now()},
                   {"threads", effective_threads()},
                   {"config", json::parse(run_config_json(rc))},
                   {"datum", {{"min", mm0.min}, {"max", mm0.max}, {"j", j0},
                              {"f", f0}}},
                   {"status", "running"},
                   {"steps_completed", 0}};
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  save_density_checkpoint((dir / "datum.ckpt").string(), rho0);

  Trajectory traj;
  std::string failure;
  try {
    traj = run_flow(rho0, cfg, rc.steps);
  } catch (const Error& e) {
    failure = std::string(e.kind()) + ": " + e.what();
  }

  write_trajectory_csv((dir / "trajectory.csv").string(), traj);
  if (rc.checkpoint_every > 0) {
    for (int k = rc.checkpoint_every; k <= traj.steps_completed;
         k += rc.checkpoint_every) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%06d.ckpt", k);
      save_density_checkpoint((dir / name).string(), traj.snapshots[k]);
    }
  }
  if (traj.steps_completed > 0) {
    save_density_checkpoint((dir / "final_density.ckpt").string(),
                            traj.snapshots.back());
    save_pair_checkpoint((dir / "final_pair.ckpt").string(),
                         traj.snapshots.back(), traj.certs.back());
  }

  std::string status = traj.completed ? "completed" : "error";
  manifest["status"] = status;
  manifest["steps_completed"] = traj.steps_completed;
  if (!traj.completed)
    manifest["error"] = failure.empty() ? traj.error : failure;
  if (!traj.records.empty()) {
    const FlowRecord& last = traj.records.back();
    manifest["summary"] = {{"t_final", last.t},
                           {"j_final", last.j},
                           {"penalty_final", last.penalty},
                           {"f_final", last.j + last.penalty},
                           {"min_final", last.min},
                           {"max_final", last.max}};
  }
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  dump_json({{"status", status},
             {"steps_completed", traj.steps_completed},
             {"out", out_dir}});
  if (!traj.completed)
    throw NoConvergence("flow stopped after " +
                            std::to_string(traj.steps_completed) + " of " +
                            std::to_string(rc.steps) + " steps",
                        failure.empty() ? traj.error : failure);
  return kExitOk;
}

int cmd_certify(const std::string& pair_path, double tol_gap, double tol_z) {
  auto [rho, z] = load_pair_checkpoint(pair_path);
  CertificateReport rep = check_pair(rho, z, tol_gap, tol_z);
  double drhodz = check_drhodz(rho.field(), z);
  double levelset = check_levelsets(rho.field(), z, decile_thresholds(rho));
  json out = report_json(rep);
  out["drhodz"] = drhodz;
  out["levelset_mismatch"] = levelset;
  dump_json(out);
  if (!rep.pass)
    throw NoConvergence("certificate check failed",
                        "gap = " + std::to_string(rep.gap));
  return kExitOk;
}

int cmd_diagnose(const std::string& run_dir) {
  fs::path dir(run_dir);
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw IoError("cannot open '" + (dir / "manifest.json").string() + "'");
  json manifest;
  try {
    manifest = json::parse(mf);
  } catch (const json::exception&) {
    throw IoError("manifest.json is not valid JSON");
  }
  if (manifest.value("format", "") != "tvflow-run")
    throw IoError("'" + run_dir + "' is not a run directory");
  if (manifest.value("version", 0) != 1)
    throw FormatVersionMismatch("run format version " +
                                std::to_string(manifest.value("version", 0)) +
                                ", expected 1");

  std::vector<std::string> header;
  auto rows = read_csv((dir / "trajectory.csv").string(), &header);
  std::vector<double> ts, js, mins, maxs;
  for (const auto& row : rows) {
    if (row.size() < 8) throw IoError("trajectory.csv: short row");
    ts.push_back(row[1]);
    js.push_back(row[2]);
    mins.push_back(row[3]);
    maxs.push_back(row[4]);
  }

  double alpha = manifest["datum"].value("min", 0.0);
  double beta = manifest["datum"].value("max", 0.0);
  double j0 = manifest["datum"].value("j", 0.0);

  json out;
  out["steps"] = rows.size();
  if (!ts.empty() && alpha > 0.0) {
    DecayReport decay =
        decay_envelope_series(ts, js, mins, maxs, j0, alpha, beta);
    out["decay"] = {{"kappa", decay.kappa},
                    {"a_const", decay.a_const},
                    {"b_const", decay.b_const},
                    {"j0", decay.j0},
                    {"violations", decay.violations},
                    {"worst_ratio", decay.worst_ratio},
                    {"fit_exponent", decay.fit_exponent},
                    {"pass", decay.pass}};
    std::vector<std::vector<double>> decay_rows;
    for (std::size_t i = 0; i < ts.size(); ++i)
      decay_rows.push_back({ts[i], js[i], decay.a_const / ts[i],
                            decay.b_const * std::pow(ts[i], -1.0 / 3.0)});
    write_csv((dir / "decay.csv").string(),
              {"t", "J", "envelope_t1", "envelope_t13"}, decay_rows);
  }

  fs::path pair_path = dir / "final_pair.ckpt";
  if (fs::exists(pair_path)) {
    auto [rho, z] = load_pair_checkpoint(pair_path.string());
    CertificateReport rep =
        check_pair(rho, z, 1e-6 * (1.0 + total_variation(rho)));
    out["certificate"] = report_json(rep);
    out["certificate"]["drhodz"] = check_drhodz(rho.field(), z);
    out["certificate"]["levelset_mismatch"] =
        check_levelsets(rho.field(), z, decile_thresholds(rho));
    out["gn"] = estimate_json(gn_check(z));
    out["poincare"] = estimate_json(poincare_check(div(z)));
  }

  write_text((dir / "diagnostics.json").string(), out.dump(2) + "\n");
  dump_json(out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tvflow: total-variation Wasserstein gradient flow on the torus"};
  app.require_subcommand(1);

  RofArgs rof_args;
  CLI::App* rof = app.add_subcommand("rof", "TV denoising solve");
  rof->add_option("--dim", rof_args.dim);
  rof->add_option("--n", rof_args.n);
  rof->add_option("--preset", rof_args.preset);
  rof->add_option("--input", rof_args.input, "density checkpoint");
  rof->add_option("--fidelity", rof_args.fidelity);
  rof->add_option("--gap-tol", rof_args.gap_tol);
  rof->add_option("--max-iters", rof_args.max_iters);
  rof->add_option("--output-csv", rof_args.output_csv);
  rof->add_option("--pair-out", rof_args.pair_out, "pair checkpoint");

  W2Args w2_args;
  CLI::App* w2 = app.add_subcommand("w2", "squared Wasserstein distance");
  w2->add_option("--dim", w2_args.dim);
  w2->add_option("--n", w2_args.n);
  w2->add_option("--preset-a", w2_args.preset_a);
  w2->add_option("--preset-b", w2_args.preset_b);
  w2->add_option("--a", w2_args.input_a, "density checkpoint");
  w2->add_option("--b", w2_args.input_b, "density checkpoint");
  w2->add_option("--method", w2_args.method, "auto|exact|entropic|lp");
  w2->add_option("--eps", w2_args.eps, "entropic regularization");

  std::string step_config, step_pair_out;
  CLI::App* step = app.add_subcommand("step", "single JKO step");
  step->add_option("--config", step_config)->required();
  step->add_option("--pair-out", step_pair_out);

  std::string run_config, run_out;
  bool run_force = false;
  CLI::App* run = app.add_subcommand("run", "full gradient flow");
  run->add_option("--config", run_config)->required();
  run->add_option("--out", run_out)->required();
  run->add_flag("--force", run_force, "reuse an existing directory");

  std::string cert_pair;
  double cert_tol_gap = 1e-8, cert_tol_z = 1e-12;
  CLI::App* certify = app.add_subcommand("certify", "check a (rho, z) pair");
  certify->add_option("--input", cert_pair)->required();
  certify->add_option("--tol-gap", cert_tol_gap);
  certify->add_option("--tol-z", cert_tol_z);

  std::string diag_dir;
  CLI::App* diagnose = app.add_subcommand("diagnose", "analyze a run directory");
  diagnose->add_option("--run", diag_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json({{"error", "CliUsage"}, {"message", e.what()}}).dump()
              << "\n";
    return kExitConfig;
  }

  try {
    effective_threads();
    if (rof->parsed()) return cmd_rof(rof_args);
    if (w2->parsed()) return cmd_w2(w2_args);
    if (step->parsed()) return cmd_step(step_config, step_pair_out);
    if (run->parsed()) return cmd_run(run_config, run_out, run_force);
    if (certify->parsed())
      return cmd_certify(cert_pair, cert_tol_gap, cert_tol_z);
    if (diagnose->parsed()) return cmd_diagnose(diag_dir);
  } catch (const NoConvergence& e) {
    std::cerr << json({{"error", e.kind()},
                       {"message", e.what()},
                       {"diagnostics", e.diagnostics}})
                     .dump()
              << "\n";
    return e.exit_code();
  } catch (const Error& e) {
    std::cerr << json({{"error", e.kind()}, {"message", e.what()}}).dump()
              << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << json({{"error", "Internal"}, {"message", e.what()}}).dump()
              << "\n";
    return 1;
  }
  return kExitOk;
}
