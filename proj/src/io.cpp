#include "tvflow/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace tvflow {

namespace {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void atomic_write(const std::string& path, const std::string& payload) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(payload.data(), std::streamsize(payload.size()));
    if (!out) throw IoError("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot move '" + tmp + "' to '" + path + "'");
}

void append_le_doubles(std::string& out, const std::vector<double>& v) {
  for (double x : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    for (int b = 0; b < 8; ++b)
      out.push_back(char((bits >> (8 * b)) & 0xff));
  }
}

std::vector<double> read_le_doubles(const std::string& blob,
                                    std::size_t offset, std::size_t count) {
  if (blob.size() < offset + 8 * count)
    throw IoError("checkpoint payload truncated");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b)
      bits = (bits << 8) |
             std::uint64_t(std::uint8_t(blob[offset + 8 * i + b]));
    std::memcpy(&v[i], &bits, 8);
  }
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ValidationError("write_csv: row width " +
                            std::to_string(row.size()) + " != header width " +
                            std::to_string(header.size()));
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  if (header) {
    header->clear();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": bad number '" + cell + "'");
      row.push_back(x);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::vector<std::vector<double>> rows;
  for (const FlowRecord& r : traj.records)
    rows.push_back({double(r.k), r.t, r.j, r.min, r.max, r.w2_step,
                    r.residual_dev, r.dissipation});
  write_csv(path,
            {"k", "t", "J", "min", "max", "w2_step", "residual_dev",
             "dissipation"},
            rows);
}

void write_field_csv(const std::string& path, const ScalarField& s) {
  const TorusGrid& g = s.grid;
  std::vector<std::vector<double>> rows;
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i)
      rows.push_back({double(i), g.coord(i), s.v[i]});
    write_csv(path, {"i", "x", "value"}, rows);
  } else {
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j)
        rows.push_back({double(i), double(j), g.coord(i), g.coord(j),
                        s.v[g.index(i, j)]});
    write_csv(path, {"i", "j", "x", "y", "value"}, rows);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

void save_checkpoint_impl(const std::string& path, const std::string& kind,
                          const TorusGrid& grid,
                          const std::vector<double>* scalar,
                          const VectorField* vec) {
  std::size_t count = 0;
  if (scalar) count += scalar->size();
  if (vec)
    for (int a = 0; a < grid.dim; ++a) count += vec->comp[a].size();
  json header = {{"format", "tvflow-checkpoint"},
                 {"version", 1},
                 {"kind", kind},
                 {"dim", grid.dim},
                 {"n", grid.n},
                 {"count", count}};
  std::string out = header.dump();
  out += '\n';
  if (scalar) append_le_doubles(out, *scalar);
  if (vec)
    for (int a = 0; a < grid.dim; ++a) append_le_doubles(out, vec->comp[a]);
  atomic_write(path, out);
}

}  // namespace

void save_density_checkpoint(const std::string& path, const Density& rho) {
  save_checkpoint_impl(path, "density", rho.grid(), &rho.values(), nullptr);
}

void save_scalar_checkpoint(const std::string& path, const ScalarField& s) {
  save_checkpoint_impl(path, "scalar", s.grid, &s.v, nullptr);
}

void save_vector_checkpoint(const std::string& path, const VectorField& z) {
  save_checkpoint_impl(path, "vector", z.grid, nullptr, &z);
}

void save_pair_checkpoint(const std::string& path, const Density& rho,
                          const VectorField& z) {
  require_same_grid(rho.grid(), z.grid, "save_pair_checkpoint");
  save_checkpoint_impl(path, "pair", rho.grid(), &rho.values(), &z);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::size_t nl = blob.find('\n');
  if (nl == std::string::npos)
    throw IoError("'" + path + "': no header line");
  json header;
  try {
    header = json::parse(blob.substr(0, nl));
  } catch (const json::exception&) {
    throw IoError("'" + path + "': header is not valid JSON");
  }
  if (!header.is_object() || header.value("format", "") != "tvflow-checkpoint")
    throw IoError("'" + path + "': not a checkpoint file");
  if (header.value("version", 0) != 1)
    throw FormatVersionMismatch(
        "'" + path + "': checkpoint version " +
        std::to_string(header.value("version", 0)) + ", expected 1");

  Checkpoint ck;
  ck.kind = header.value("kind", "");
  ck.grid = make_grid(header.value("dim", 0), header.value("n", 0));
  std::size_t count = header.value("count", std::size_t(0));
  std::size_t cells = ck.grid.cells();

  std::size_t expect;
  if (ck.kind == "density" || ck.kind == "scalar")
    expect = cells;
  else if (ck.kind == "vector")
    expect = cells * ck.grid.dim;
  else if (ck.kind == "pair")
    expect = cells * (1 + ck.grid.dim);
  else
    throw IoError("'" + path + "': unknown checkpoint kind '" + ck.kind + "'");
  if (count != expect)
    throw IoError("'" + path + "': count " + std::to_string(count) +
                  " does not match kind/grid");

  std::size_t off = nl + 1;
  if (ck.kind == "vector") {
    for (int a = 0; a < ck.grid.dim; ++a) {
      ck.vector[a] = read_le_doubles(blob, off, cells);
      off += 8 * cells;
    }
  } else {
    ck.scalar = read_le_doubles(blob, off, cells);
    off += 8 * cells;
    if (ck.kind == "pair")
      for (int a = 0; a < ck.grid.dim; ++a) {
        ck.vector[a] = read_le_doubles(blob, off, cells);
        off += 8 * cells;
      }
  }
  return ck;
}

Density load_density_checkpoint(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.kind != "density" && ck.kind != "pair")
    throw IoError("'" + path + "': expected a density checkpoint, found '" +
                  ck.kind + "'");
  return Density(ck.grid, std::move(ck.scalar));
}

std::pair<Density, VectorField> load_pair_checkpoint(const std::string& path) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.kind != "pair")
    throw IoError("'" + path + "': expected a pair checkpoint, found '" +
                  ck.kind + "'");
  Density rho(ck.grid, std::move(ck.scalar));
  VectorField z(ck.grid);
  for (int a = 0; a < ck.grid.dim; ++a) z.comp[a] = std::move(ck.vector[a]);
  return {std::move(rho), std::move(z)};
}

// ---------------------------------------------------------------------------
// Datum presets
// ---------------------------------------------------------------------------

namespace {

double param(const std::map<std::string, double>& p, const std::string& key,
             double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

// Deterministic standard normals: explicit Box-Muller on mt19937_64 words so
// streams are identical across standard library implementations.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}
  double next() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    double u2 = unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_ = true;
    return r * std::cos(a);
  }

 private:
  double unit() { return double(eng_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_ = false;
};

}  // namespace

Density make_datum(const TorusGrid& grid, const std::string& preset,
                   const std::map<std::string, double>& params) {
  const std::size_t N = grid.cells();
  std::vector<double> v(N, 0.0);
  auto coords = [&](std::size_t cell, double& x, double& y) {
    if (grid.dim == 1) {
      x = grid.coord(int(cell));
      y = 0.0;
    } else {
      x = grid.coord(int(cell) / grid.n);
      y = grid.coord(int(cell) % grid.n);
    }
  };

  if (preset == "uniform") {
    std::fill(v.begin(), v.end(), 1.0);
  } else if (preset == "step") {
    double lo = param(params, "lo", 0.5), hi = param(params, "hi", 1.5);
    double x0 = param(params, "x0", 0.25), x1 = param(params, "x1", 0.75);
    for (std::size_t i = 0; i < N; ++i) {
      double x, y;
      coords(i, x, y);
      v[i] = (x >= x0 && x < x1) ? hi : lo;
    }
  } else if (preset == "bumps") {
    double w = param(params, "width", 0.08);
    double floor_v = param(params, "floor", 0.1);
    for (std::size_t i = 0; i < N; ++i) {
      double x, y;
      coords(i, x, y);
      double d1, d2;
      if (grid.dim == 1) {
        d1 = torus_dist(x, 0.25);
        d2 = torus_dist(x, 0.75);
      } else {
        d1 = std::hypot(torus_dist(x, 0.25), torus_dist(y, 0.25));
        d2 = std::hypot(torus_dist(x, 0.75), torus_dist(y, 0.75));
      }
      v[i] = floor_v + std::exp(-(d1 * d1) / (w * w)) +
             std::exp(-(d2 * d2) / (w * w));
    }
  } else if (preset == "disk") {
    if (grid.dim != 2) throw DimensionError("disk preset needs dim = 2");
    double r = param(params, "radius", 0.25);
    double lo = param(params, "lo", 0.05);
    for (std::size_t i = 0; i < N; ++i) {
      double x, y;
      coords(i, x, y);
      double d = std::hypot(torus_dist(x, 0.5), torus_dist(y, 0.5));
      v[i] = lo + (d <= r ? 1.0 : 0.0);
    }
  } else if (preset == "checkerboard") {
    if (grid.dim != 2)
      throw DimensionError("checkerboard preset needs dim = 2");
    int m = int(param(params, "m", 4.0));
    if (m < 1) throw ValidationError("checkerboard m must be >= 1");
    double lo = param(params, "lo", 0.5), hi = param(params, "hi", 1.5);
    for (std::size_t i = 0; i < N; ++i) {
      double x, y;
      coords(i, x, y);
      int px = int(std::floor(x * m)), py = int(std::floor(y * m));
      v[i] = ((px + py) % 2 == 0) ? hi : lo;
    }
  } else if (preset == "squarewave") {
    double mean = param(params, "mean", 0.5);
    double amp = param(params, "amp", 0.45);
    int m = int(param(params, "m", 16.0));
    if (m < 1) throw ValidationError("squarewave m must be >= 1");
    for (std::size_t i = 0; i < N; ++i) {
      double x, y;
      coords(i, x, y);
      double s = std::sin(2.0 * 3.14159265358979323846 * m * x);
      v[i] = mean + amp * (s >= 0.0 ? 1.0 : -1.0);
    }
  } else if (preset == "random_band_limited") {
    auto seed = std::uint64_t(param(params, "seed", 1.0));
    int modes = int(param(params, "modes", 4.0));
    double amp = param(params, "amplitude", 0.5);
    if (modes < 1) throw ValidationError("random_band_limited modes >= 1");
    NormalStream rng(seed);
    const double twopi = 2.0 * 3.14159265358979323846;
    std::vector<double> u(N, 0.0);
    for (int k = 1; k <= modes; ++k) {
      double a = amp / k;
      double c1 = rng.next(), s1 = rng.next();
      double c2 = grid.dim == 2 ? rng.next() : 0.0;
      double s2 = grid.dim == 2 ? rng.next() : 0.0;
      double cx = grid.dim == 2 ? rng.next() : 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double x, y;
        coords(i, x, y);
        double t = a * (c1 * std::cos(twopi * k * x) +
                        s1 * std::sin(twopi * k * x));
        if (grid.dim == 2)
          t += a * (c2 * std::cos(twopi * k * y) +
                    s2 * std::sin(twopi * k * y) +
                    cx * std::cos(twopi * k * x) * std::cos(twopi * k * y));
        u[i] += t;
      }
    }
    double sup = 0.0;
    for (double x : u) sup = std::max(sup, std::fabs(x));
    double scale = sup > 0.0 ? std::min(1.0, 0.9 / sup) : 1.0;
    for (std::size_t i = 0; i < N; ++i) v[i] = 1.0 + scale * u[i];
  } else {
    throw UnknownPreset("make_datum: '" + preset + "'");
  }

  return Density::normalized(grid, std::move(v));
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

namespace {

struct TomlValue {
  enum Kind { kNumber, kString, kBool, kArray } kind;
  double num = 0.0;
  std::string str;
  bool flag = false;
  std::vector<double> arr;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

TomlValue parse_value(const std::string& raw, int lineno) {
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("line " + std::to_string(lineno) + ": " + why);
  };
  std::string s = trim(raw);
  if (s.empty()) throw fail("missing value");
  TomlValue v{};
  if (s.front() == '"') {
    std::size_t end = s.find('"', 1);
    if (end == std::string::npos) throw fail("unterminated string");
    if (!trim(s.substr(end + 1)).empty())
      throw fail("trailing characters after string");
    v.kind = TomlValue::kString;
    v.str = s.substr(1, end - 1);
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = TomlValue::kBool;
    v.flag = s == "true";
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw fail("unterminated array");
    v.kind = TomlValue::kArray;
    std::string body = s.substr(1, s.size() - 2);
    std::stringstream bs(body);
    std::string item;
    while (std::getline(bs, item, ',')) {
      std::string it = trim(item);
      if (it.empty()) throw fail("empty array element");
      char* end = nullptr;
      double x = std::strtod(it.c_str(), &end);
      if (end == it.c_str() || *end != '\0')
        throw fail("bad array number '" + it + "'");
      v.arr.push_back(x);
    }
    return v;
  }
  char* end = nullptr;
  double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw fail("bad value '" + s + "'");
  v.kind = TomlValue::kNumber;
  v.num = x;
  return v;
}

double expect_number(const std::string& key, const TomlValue& v, int lineno) {
  if (v.kind != TomlValue::kNumber)
    throw ParseError("line " + std::to_string(lineno) + ": key '" + key +
                     "' expects a number");
  return v.num;
}

int expect_int(const std::string& key, const TomlValue& v, int lineno) {
  double x = expect_number(key, v, lineno);
  double r = std::round(x);
  if (std::fabs(x - r) > 1e-9)
    throw ParseError("line " + std::to_string(lineno) + ": key '" + key +
                     "' expects an integer");
  return int(r);
}

std::string expect_string(const std::string& key, const TomlValue& v,
                          int lineno) {
  if (v.kind != TomlValue::kString)
    throw ParseError("line " + std::to_string(lineno) + ": key '" + key +
                     "' expects a string");
  return v.str;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig rc;
  std::stringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ParseError("line " + std::to_string(lineno) +
                         ": unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty())
        throw ParseError("line " + std::to_string(lineno) +
                         ": empty section name");
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    if (key.empty())
      throw ParseError("line " + std::to_string(lineno) + ": empty key");
    std::string full = section.empty() ? key : section + "." + key;
    TomlValue val = parse_value(s.substr(eq + 1), lineno);

    if (full == "grid.dim" || full == "dim")
      rc.dim = expect_int(full, val, lineno);
    else if (full == "grid.n" || full == "n")
      rc.n = expect_int(full, val, lineno);
    else if (full == "flow.tau" || full == "tau")
      rc.tau = expect_number(full, val, lineno);
    else if (full == "flow.steps" || full == "steps")
      rc.steps = expect_int(full, val, lineno);
    else if (full == "penalty.eps" || full == "eps")
      rc.eps = expect_number(full, val, lineno);
    else if (full == "penalty.c" || full == "c")
      rc.c = expect_number(full, val, lineno);
    else if (full == "datum.preset" || full == "preset")
      rc.preset = expect_string(full, val, lineno);
    else if (full == "transport.method" || full == "method")
      rc.method = expect_string(full, val, lineno);
    else if (full == "transport.eps")
      rc.entropic_eps = expect_number(full, val, lineno);
    else if (full == "transport.eps_start")
      rc.entropic_eps_start = expect_number(full, val, lineno);
    else if (full == "transport.tol")
      rc.entropic_tol = expect_number(full, val, lineno);
    else if (full == "solver.residual_tol")
      rc.residual_tol = expect_number(full, val, lineno);
    else if (full == "solver.max_outer")
      rc.max_outer = expect_int(full, val, lineno);
    else if (full == "solver.inner_gap_tol")
      rc.inner_gap_tol = expect_number(full, val, lineno);
    else if (full == "solver.inner_kkt_tol")
      rc.inner_kkt_tol = expect_number(full, val, lineno);
    else if (full == "solver.inner_max_iters")
      rc.inner_max_iters = expect_int(full, val, lineno);
    else if (full == "output.checkpoint_every")
      rc.checkpoint_every = expect_int(full, val, lineno);
    else if (section == "datum")
      rc.datum_params[key] = expect_number(full, val, lineno);
    else
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" +
                       full + "'");
  }

  if (rc.dim != 1 && rc.dim != 2)
    throw ValidationError("dim must be 1 or 2");
  if (rc.n < 2) throw ValidationError("n must be >= 2");
  if (!(rc.tau > 0.0)) throw ValidationError("tau must be positive");
  if (rc.steps < 1) throw ValidationError("steps must be >= 1");
  if (rc.eps < 0.0) throw ValidationError("eps must be nonnegative");
  if (rc.c < 0.0) throw ValidationError("c must be nonnegative");
  if (rc.method != "auto" && rc.method != "exact" &&
      rc.method != "exact_cells" && rc.method != "entropic" &&
      rc.method != "lp")
    throw ValidationError(
        "method must be auto, exact, exact_cells, entropic or lp");
  if (!(rc.entropic_eps > 0.0))
    throw ValidationError("transport.eps must be positive");
  if (!(rc.residual_tol > 0.0))
    throw ValidationError("solver.residual_tol must be positive");
  if (rc.max_outer < 1) throw ValidationError("solver.max_outer must be >= 1");
  if (rc.inner_max_iters < 1)
    throw ValidationError("solver.inner_max_iters must be >= 1");
  if (rc.checkpoint_every < 0)
    throw ValidationError("output.checkpoint_every must be >= 0");
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

JkoConfig jko_config_from(const RunConfig& rc) {
  JkoConfig cfg;
  cfg.tau = rc.tau;
  cfg.barrier.eps = rc.eps;
  cfg.barrier.c = rc.c;
  cfg.residual_tol = rc.residual_tol;
  cfg.max_outer = rc.max_outer;
  cfg.inner_gap_tol = rc.inner_gap_tol;
  cfg.inner_kkt_tol = rc.inner_kkt_tol;
  cfg.inner_max_iters = rc.inner_max_iters;
  if (rc.method == "exact")
    cfg.transport.method = OtMethod::exact_1d;
  else if (rc.method == "exact_cells")
    cfg.transport.method = OtMethod::exact_1d_cells;
  else if (rc.method == "entropic")
    cfg.transport.method = OtMethod::entropic;
  else if (rc.method == "lp")
    cfg.transport.method = OtMethod::lp_oracle;
  else
    cfg.transport.method =
        rc.dim == 1 ? OtMethod::exact_1d_cells : OtMethod::entropic;
  cfg.transport.entropic.eps = rc.entropic_eps;
  cfg.transport.entropic.eps_start = rc.entropic_eps_start;
  cfg.transport.entropic.tol = rc.entropic_tol;
  cfg.transport.entropic.debias = false;  // inner-loop potentials stay raw
  return cfg;
}

Density datum_from(const RunConfig& rc) {
  return make_datum(make_grid(rc.dim, rc.n), rc.preset, rc.datum_params);
}

std::string run_config_json(const RunConfig& rc) {
  json j = {{"dim", rc.dim},
            {"n", rc.n},
            {"tau", rc.tau},
            {"steps", rc.steps},
            {"eps", rc.eps},
            {"c", rc.c},
            {"preset", rc.preset},
            {"datum_params", rc.datum_params},
            {"method", rc.method},
            {"transport",
             {{"eps", rc.entropic_eps},
              {"eps_start", rc.entropic_eps_start},
              {"tol", rc.entropic_tol}}},
            {"solver",
             {{"residual_tol", rc.residual_tol},
              {"max_outer", rc.max_outer},
              {"inner_gap_tol", rc.inner_gap_tol},
              {"inner_kkt_tol", rc.inner_kkt_tol},
              {"inner_max_iters", rc.inner_max_iters}}},
            {"checkpoint_every", rc.checkpoint_every}};
  return j.dump();
}

}  // namespace tvflow
