#ifndef TVFLOW_IO_HPP
#define TVFLOW_IO_HPP

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tvflow/flow.hpp"

namespace tvflow {

// ---------------------------------------------------------------------------
// CSV (header row, then numeric rows; %.17g round-trips doubles exactly)
// ---------------------------------------------------------------------------

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Reads back a numeric CSV; the header row goes to *header if given.
std::vector<std::vector<double>> read_csv(
    const std::string& path, std::vector<std::string>* header = nullptr);

/// Columns k,t,J,min,max,w2_step,residual_dev,dissipation.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// 1D: i,x,value.  2D: i,j,x,y,value.
void write_field_csv(const std::string& path, const ScalarField& s);

// ---------------------------------------------------------------------------
// Checkpoints: one file = single-line JSON header + '\n' + little-endian
// float64 payload.  Writes go through a temp file and rename, so a crash
// never leaves a partial checkpoint at the target path.
// ---------------------------------------------------------------------------

struct Checkpoint {
  std::string kind;  // "density" | "scalar" | "vector" | "pair"
  TorusGrid grid;
  std::vector<double> scalar;                 // density / scalar payload
  std::array<std::vector<double>, 2> vector;  // vector payload
};

void save_density_checkpoint(const std::string& path, const Density& rho);
void save_scalar_checkpoint(const std::string& path, const ScalarField& s);
void save_vector_checkpoint(const std::string& path, const VectorField& z);
void save_pair_checkpoint(const std::string& path, const Density& rho,
                          const VectorField& z);

Checkpoint load_checkpoint(const std::string& path);
Density load_density_checkpoint(const std::string& path);
std::pair<Density, VectorField> load_pair_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Initial data presets
// ---------------------------------------------------------------------------

/// Presets: uniform; step (lo, hi, x0, x1); bumps (floor, width); disk
/// (lo, radius; 2D only); checkerboard (lo, hi, m; 2D only); squarewave
/// (mean, amp, m); random_band_limited (seed, modes, amplitude).  All data
/// are scaled to unit mass.  Unknown names throw UnknownPreset.
Density make_datum(const TorusGrid& grid, const std::string& preset,
                   const std::map<std::string, double>& params = {});

// ---------------------------------------------------------------------------
// Run configuration (small TOML subset: comments, [sections], key = value
// with numbers, "strings", booleans and flat numeric arrays)
// ---------------------------------------------------------------------------

struct RunConfig {
  int dim = 1;
  int n = 128;
  double tau = 0.01;
  int steps = 50;
  double eps = 0.0;
  double c = 0.0;
  std::string preset = "step";
  std::map<std::string, double> datum_params;
  std::string method = "auto";  // auto | exact | entropic | lp
  double entropic_eps = 5e-4;
  double entropic_eps_start = 1e-2;
  double entropic_tol = 1e-9;
  double residual_tol = 1e-5;
  int max_outer = 60;
  double inner_gap_tol = 1e-11;
  double inner_kkt_tol = 1e-9;
  int inner_max_iters = 20000;
  int checkpoint_every = 0;  // 0: final state only
};

/// Unknown keys and syntax problems throw ParseError with the line number;
/// out-of-range values throw ValidationError naming the key.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

JkoConfig jko_config_from(const RunConfig& rc);
Density datum_from(const RunConfig& rc);

/// JSON object literal with the effective configuration (for manifests).
std::string run_config_json(const RunConfig& rc);

}  // namespace tvflow

#endif
