#include "mimetic/driver.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "mimetic/cases.hpp"
#include "mimetic/errors.hpp"
#include "mimetic/params.hpp"

namespace mimetic {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  Params top(j, "config");

  {
    json cj = top.object("case");
    if (!cj.contains("name") || !cj["name"].is_string()) fail(ErrorKind::Config, "config.case.name: required string");
    c.testcase = cj["name"].get<std::string>();
    cj.erase("name");
    c.case_params = cj;
  }

  {
    Params m(top.object("mesh"), "config.mesh");
    const std::string backend = m.text("backend", "sphere");
    if (backend == "sphere")
      c.mesh.backend = Backend::Sphere;
    else if (backend == "plane")
      c.mesh.backend = Backend::Plane;
    else
      fail(ErrorKind::Config, "config.mesh.backend: expected 'sphere' or 'plane'");
    c.mesh.n = m.integer("elements", 4);
    c.mesh.ny = m.integer("elements_y", c.mesh.n);
    c.mesh.p = m.integer("degree", 3);
    const int q = m.integer("quadrature_points", c.mesh.p + 1);
    if (q != c.mesh.p + 1)
      fail(ErrorKind::Config, "config.mesh.quadrature_points: only degree + 1 (collocated) is supported");
    const int levels = m.integer("levels", 10);
    const double ztop = m.number("z_top_m", 30000.0);
    if (levels < 1) fail(ErrorKind::Config, "config.mesh.levels must be >= 1");
    if (!(ztop > 0.0)) fail(ErrorKind::Config, "config.mesh.z_top_m must be > 0");
    c.mesh.z = uniform_levels(levels, ztop);
    const double radius = m.number("radius_m", 6371220.0);
    c.radius_factor = m.number("radius_factor", 1.0);
    if (!(c.radius_factor >= 1.0)) fail(ErrorKind::Config, "config.mesh.radius_factor must be >= 1");
    if (!(radius > 0.0)) fail(ErrorKind::Config, "config.mesh.radius_m must be > 0");
    c.mesh.radius = radius / c.radius_factor;
    c.mesh.Lx = m.number("lx_m", 1.0e5);
    c.mesh.Ly = m.number("ly_m", c.mesh.Lx);
    m.finish();
  }

  {
    Params p(top.object("physics"), "config.physics");
    c.constants.R = p.number("R_J_per_kg_K", c.constants.R);
    c.constants.cp = p.number("cp_J_per_kg_K", c.constants.cp);
    c.constants.p0 = p.number("p0_Pa", c.constants.p0);
    c.constants.g = p.number("g_m_per_s2", c.constants.g);
    c.constants.Omega = p.number("omega_per_s", c.constants.Omega);
    c.coriolis = p.flag("coriolis", true);
    c.f0 = p.number("f0_per_s", 0.0);
    c.nonhydrostatic = p.flag("nonhydrostatic", true);
    p.finish();
    if (!(c.constants.R > 0.0) || !(c.constants.cp > c.constants.R) || !(c.constants.p0 > 0.0) || !(c.constants.g > 0.0))
      fail(ErrorKind::Config, "config.physics: need R > 0, cp > R, p0 > 0, g > 0");
  }

  {
    Params t(top.object("time"), "config.time");
    c.dt = t.number("dt_seconds");
    c.t_end = t.number("end_seconds");
    const std::string rk = t.text("scheme", "rk3");
    if (rk == "rk3")
      c.rk = RKScheme::RK3;
    else if (rk == "rk2")
      c.rk = RKScheme::RK2;
    else
      fail(ErrorKind::Config, "config.time.scheme: expected 'rk3' or 'rk2'");
    t.finish();
    if (!(c.dt > 0.0)) fail(ErrorKind::Config, "config.time.dt_seconds must be > 0");
    if (c.t_end < 0.0) fail(ErrorKind::Config, "config.time.end_seconds must be >= 0");
  }

  {
    Params s(top.object("solver"), "config.solver");
    const std::string mm = s.text("mass_matrix", "direct");
    if (mm == "direct")
      c.mass_solver = MassSolver::Direct;
    else if (mm == "cg")
      c.mass_solver = MassSolver::CG;
    else
      fail(ErrorKind::Config, "config.solver.mass_matrix: expected 'direct' or 'cg'");
    c.cg_tol = s.number("cg_tolerance", c.cg_tol);
    c.cg_max_iter = s.integer("cg_max_iterations", c.cg_max_iter);
    c.picard_tol = s.number("picard_tolerance", c.picard_tol);
    c.picard_max_iter = s.integer("picard_max_iterations", c.picard_max_iter);
    s.finish();
    if (!(c.cg_tol > 0.0) || c.cg_max_iter < 1 || !(c.picard_tol > 0.0) || c.picard_max_iter < 1)
      fail(ErrorKind::Config, "config.solver: tolerances must be > 0 and iteration limits >= 1");
  }

  {
    Params d(top.object("dissipation"), "config.dissipation");
    c.dissipation = d.flag("enabled", true);
    if (d.has("nu_u_m4_per_s")) c.nu_u = d.number("nu_u_m4_per_s");
    if (d.has("nu_theta_m4_per_s")) c.nu_Theta = d.number("nu_theta_m4_per_s");
    c.rayleigh = d.number("rayleigh_per_s", c.rayleigh);
    d.finish();
    if ((c.nu_u && *c.nu_u < 0.0) || (c.nu_Theta && *c.nu_Theta < 0.0) || c.rayleigh < 0.0)
      fail(ErrorKind::Config, "config.dissipation: coefficients must be >= 0");
  }

  {
    Params o(top.object("output"), "config.output");
    c.output_dir = o.text("directory", c.output_dir);
    c.ledger_file = o.text("ledger", c.ledger_file);
    c.ledger_every = o.integer("ledger_every_steps", 1);
    c.snapshot_interval = o.number("snapshot_interval_seconds", 0.0);
    c.picard_trace_file = o.text("picard_trace", "");
    c.restart = o.text("restart_snapshot", "");
    o.finish();
    if (c.ledger_every < 1) fail(ErrorKind::Config, "config.output.ledger_every_steps must be >= 1");
    if (c.snapshot_interval < 0.0) fail(ErrorKind::Config, "config.output.snapshot_interval_seconds must be >= 0");
    if (c.snapshot_interval > 0.0) {
      const double r = c.snapshot_interval / c.dt;
      if (std::abs(r - std::round(r)) > 1e-9 * r || std::round(r) < 1.0)
        fail(ErrorKind::Config, "config.output.snapshot_interval_seconds must be a multiple of dt_seconds");
    }
  }
  top.finish();
  c.steps();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Config, "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, "config file " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

long RunConfig::steps() const {
  const double r = t_end / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, r))
    fail(ErrorKind::Config, "config.time.end_seconds must be a multiple of dt_seconds");
  return static_cast<long>(n);
}

json RunConfig::to_json() const {
  json j;
  j["case"] = case_params;
  j["case"]["name"] = testcase;
  j["mesh"] = {{"backend", mesh.backend == Backend::Sphere ? "sphere" : "plane"},
               {"elements", mesh.n},
               {"elements_y", mesh.ny},
               {"degree", mesh.p},
               {"levels", static_cast<int>(mesh.z.size()) - 1},
               {"z_top_m", mesh.z.back()},
               {"radius_m", mesh.radius * radius_factor},
               {"radius_factor", radius_factor},
               {"lx_m", mesh.Lx},
               {"ly_m", mesh.Ly}};
  j["physics"] = {{"R_J_per_kg_K", constants.R},  {"cp_J_per_kg_K", constants.cp}, {"p0_Pa", constants.p0},
                  {"g_m_per_s2", constants.g},    {"omega_per_s", constants.Omega}, {"coriolis", coriolis},
                  {"f0_per_s", f0},               {"nonhydrostatic", nonhydrostatic}};
  j["time"] = {{"dt_seconds", dt}, {"end_seconds", t_end}, {"scheme", rk == RKScheme::RK3 ? "rk3" : "rk2"}};
  j["solver"] = {{"mass_matrix", mass_solver == MassSolver::Direct ? "direct" : "cg"},
                 {"cg_tolerance", cg_tol},
                 {"cg_max_iterations", cg_max_iter},
                 {"picard_tolerance", picard_tol},
                 {"picard_max_iterations", picard_max_iter}};
  j["dissipation"] = {{"enabled", dissipation}, {"rayleigh_per_s", rayleigh}};
  if (nu_u) j["dissipation"]["nu_u_m4_per_s"] = *nu_u;
  if (nu_Theta) j["dissipation"]["nu_theta_m4_per_s"] = *nu_Theta;
  j["output"] = {{"directory", output_dir},
                 {"ledger", ledger_file},
                 {"ledger_every_steps", ledger_every},
                 {"snapshot_interval_seconds", snapshot_interval},
                 {"picard_trace", picard_trace_file},
                 {"restart_snapshot", restart}};
  return j;
}

// ---------------------------------------------------------------------------
// Stepping

StepReport strang_step(const Thermo& th, const Horizontal& H, const Vertical& V, State& s, double dt, LedgerRow* row) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "time step must be > 0");
  StepReport rep;
  HorizontalDiag hd;
  VerticalDiag vd;
  if (row) {
    row->t = s.t;
    row->e = energies(th, s);
  }
  V.explicit_half_step(s, dt, row ? &vd : nullptr);
  H.step(s, dt, &hd);
  rep.solve = hd.solve;
  rep.picard = V.implicit_half_step(s, dt);
  s.t += dt;
  if (row) row->x = exchanges(th, &hd, &vd);
  check_finite(s, "strang step");
  return rep;
}

Model::Model(const RunConfig& cfg) : cfg_(cfg) {
  mesh_ = std::make_unique<Mesh>(cfg_.mesh);
  A_ = std::make_unique<Assembly>(*mesh_, cfg_.mass_solver, cfg_.cg_tol, cfg_.cg_max_iter);
  th_ = std::make_unique<Thermo>(*A_, cfg_.constants);
  HorizontalOptions ho;
  ho.rk = cfg_.rk;
  ho.coriolis = cfg_.coriolis;
  ho.f0 = cfg_.f0;
  if (cfg_.dissipation) {
    const double nu = default_viscosity(*mesh_, cfg_.nonhydrostatic);
    ho.nu_u = cfg_.nu_u.value_or(nu);
    ho.nu_Theta = cfg_.nu_Theta.value_or(nu);
  }
  H_ = std::make_unique<Horizontal>(*th_, ho);
  VerticalOptions vo;
  vo.rayleigh = cfg_.dissipation ? cfg_.rayleigh : 0.0;
  vo.picard_tol = cfg_.picard_tol;
  vo.picard_max_iter = cfg_.picard_max_iter;
  V_ = std::make_unique<Vertical>(*th_, vo);
}

Model::~Model() = default;

State Model::initial_state() const { return mimetic::initial_state(cfg_.testcase, cfg_.case_params, *th_); }

// ---------------------------------------------------------------------------
// Snapshots

namespace {

constexpr char kMagic[8] = {'M', 'E', 'S', 'E', 'U', 'L', 'R', '1'};
constexpr int kVersion = 1;

void put_u64(std::ostream& o, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  o.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) fail(ErrorKind::Format, "snapshot truncated in header length");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_array(std::ostream& o, const Eigen::VectorXd& v) {
  if constexpr (std::endian::native == std::endian::little) {
    o.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  } else {
    for (Eigen::Index i = 0; i < v.size(); ++i) put_u64(o, std::bit_cast<std::uint64_t>(v[i]));
  }
}

void get_array(std::istream& in, Eigen::VectorXd& v, const std::string& name) {
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double))))
      fail(ErrorKind::Format, "snapshot truncated in array " + name);
  } else {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::bit_cast<double>(get_u64(in));
  }
}

}  // namespace

json mesh_to_json(const MeshSpec& s) {
  return {{"backend", s.backend == Backend::Sphere ? "sphere" : "plane"},
          {"n", s.n},
          {"ny", s.ny},
          {"p", s.p},
          {"radius_m", s.radius},
          {"lx_m", s.Lx},
          {"ly_m", s.Ly},
          {"z_m", s.z}};
}

MeshSpec mesh_from_json(const json& j) {
  try {
    MeshSpec s;
    const std::string b = j.at("backend").get<std::string>();
    if (b != "sphere" && b != "plane") fail(ErrorKind::Format, "snapshot mesh: unknown backend " + b);
    s.backend = b == "sphere" ? Backend::Sphere : Backend::Plane;
    s.n = j.at("n").get<int>();
    s.ny = j.at("ny").get<int>();
    s.p = j.at("p").get<int>();
    s.radius = j.at("radius_m").get<double>();
    s.Lx = j.at("lx_m").get<double>();
    s.Ly = j.at("ly_m").get<double>();
    s.z = j.at("z_m").get<std::vector<double>>();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("snapshot mesh block: ") + e.what());
  }
}

json constants_to_json(const Constants& c) {
  return {{"R", c.R}, {"cp", c.cp}, {"p0", c.p0}, {"g", c.g}, {"Omega", c.Omega}};
}

Constants constants_from_json(const json& j) {
  try {
    Constants c;
    c.R = j.at("R").get<double>();
    c.cp = j.at("cp").get<double>();
    c.p0 = j.at("p0").get<double>();
    c.g = j.at("g").get<double>();
    c.Omega = j.at("Omega").get<double>();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("snapshot constants block: ") + e.what());
  }
}

std::string mesh_hash(const MeshSpec& spec) {
  // FNV-1a over the canonical JSON text
  const std::string text = mesh_to_json(spec).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

void write_snapshot(const std::string& path, const State& s, const Mesh& mesh, const Constants& c, const json& extra) {
  const MeshSpec& sp = mesh.spec();
  const int L = mesh.nlev();
  const auto& T = mesh.topo();
  json h;
  h["format"] = "MESEULR1";
  h["version"] = kVersion;
  h["time_seconds"] = s.t;
  h["mesh"] = mesh_to_json(sp);
  h["mesh_hash"] = mesh_hash(sp);
  h["constants"] = constants_to_json(c);
  h["arrays"] = json::array({
      {{"name", "u"}, {"space", "Upar"}, {"length", s.u.size()}, {"shape", {T.n_edges, L}}},
      {{"name", "w"}, {"space", "Uperp"}, {"length", s.w.size()}, {"shape", {T.n_cells, L + 1}}},
      {{"name", "rho"}, {"space", "Q"}, {"length", s.rho.size()}, {"shape", {T.n_cells, L}}},
      {{"name", "Theta"}, {"space", "Q"}, {"length", s.Theta.size()}, {"shape", {T.n_cells, L}}},
  });
  h["diagnostics"] = extra;
  const std::string text = h.dump();
  const fs::path tmp = path + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary);
    if (!o) fail(ErrorKind::Format, "cannot write snapshot " + path);
    o.write(kMagic, 8);
    put_u64(o, text.size());
    o.write(text.data(), static_cast<std::streamsize>(text.size()));
    put_array(o, s.u);
    put_array(o, s.w);
    put_array(o, s.rho);
    put_array(o, s.Theta);
    if (!o) fail(ErrorKind::Format, "error while writing snapshot " + path);
  }
  fs::rename(tmp, path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Format, "cannot open snapshot " + path);
  char magic[8];
  if (!in.read(magic, 8)) fail(ErrorKind::Format, "snapshot truncated in magic");
  if (std::memcmp(magic, kMagic, 8) != 0) fail(ErrorKind::Format, "not a snapshot file (bad magic): " + path);
  const std::uint64_t n = get_u64(in);
  if (n > (1u << 30)) fail(ErrorKind::Format, "snapshot header length is implausible");
  std::string text(n, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(n))) fail(ErrorKind::Format, "snapshot truncated in header");
  Snapshot snap;
  try {
    snap.header = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("snapshot header is not valid JSON: ") + e.what());
  }
  const json& h = snap.header;
  if (!h.contains("version") || h["version"] != kVersion) fail(ErrorKind::Format, "snapshot version mismatch");
  if (!h.contains("arrays") || !h["arrays"].is_array() || h["arrays"].size() != 4)
    fail(ErrorKind::Format, "snapshot header must list four arrays");
  const char* names[4] = {"u", "w", "rho", "Theta"};
  Eigen::VectorXd* dst[4] = {&snap.state.u, &snap.state.w, &snap.state.rho, &snap.state.Theta};
  for (int i = 0; i < 4; ++i) {
    const json& a = h["arrays"][i];
    if (!a.contains("name") || a["name"] != names[i] || !a.contains("length") || !a["length"].is_number_unsigned())
      fail(ErrorKind::Format, std::string("snapshot array entry ") + std::to_string(i) + " is malformed");
    dst[i]->resize(a["length"].get<long>());
    get_array(in, *dst[i], names[i]);
  }
  if (in.peek() != std::char_traits<char>::eof()) fail(ErrorKind::Format, "snapshot has trailing bytes");
  snap.state.t = h.value("time_seconds", 0.0);
  return snap;
}

void check_snapshot(const Snapshot& snap, const Assembly& A) {
  const Mesh& m = A.mesh();
  if (snap.header.value("mesh_hash", std::string()) != mesh_hash(m.spec()))
    fail(ErrorKind::Format, "snapshot was written on a different mesh");
  const State z = State::zeros(A);
  if (snap.state.u.size() != z.u.size() || snap.state.w.size() != z.w.size() || snap.state.rho.size() != z.rho.size() ||
      snap.state.Theta.size() != z.Theta.size())
    fail(ErrorKind::Format, "snapshot array lengths do not match the mesh");
}

// ---------------------------------------------------------------------------
// Run loop

RunSummary run(const RunConfig& cfg, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  Model model(cfg);
  const Thermo& th = model.thermo();
  State s;
  if (!cfg.restart.empty()) {
    Snapshot snap = read_snapshot(cfg.restart);
    check_snapshot(snap, model.assembly());
    s = std::move(snap.state);
  } else {
    s = model.initial_state();
  }

  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  LedgerWriter ledger((dir / cfg.ledger_file).string());
  std::ofstream trace;
  if (!cfg.picard_trace_file.empty()) {
    trace.open(dir / cfg.picard_trace_file);
    if (!trace) fail(ErrorKind::Format, "cannot open Picard trace file");
    trace << "step,t,column,iteration,residual\n";
  }

  const double remaining = cfg.t_end - s.t;
  long nsteps = 0;
  if (remaining > 0.0) {
    const double r = remaining / cfg.dt;
    nsteps = static_cast<long>(std::llround(r));
    if (std::abs(r - static_cast<double>(nsteps)) > 1e-9 * std::max(1.0, r))
      fail(ErrorKind::Config, "remaining time is not a multiple of dt_seconds");
  }
  if (opt.max_steps >= 0) nsteps = std::min(nsteps, opt.max_steps);
  const long snap_every = cfg.snapshot_interval > 0.0 ? std::lround(cfg.snapshot_interval / cfg.dt) : 0;

  RunSummary sum;
  sum.first = energies(th, s);
  sum.mass_first = th.total_mass(s.rho);
  const json extra_cfg = {{"case", cfg.testcase}};
  const long report = std::max(1L, nsteps / 20);
  for (long n = 0; n < nsteps; ++n) {
    LedgerRow row;
    const bool record = n % cfg.ledger_every == 0;
    StepReport rep;
    try {
      rep = model.step(s, record ? &row : nullptr);
    } catch (const Error& e) {
      fail(e.kind(), fmt::format("step {} (t = {} s): {}", n + 1, s.t, e.what()));
    }
    if (record) ledger.write(row);
    sum.max_picard_iterations = std::max(sum.max_picard_iterations, rep.picard.max_iterations);
    if (trace.is_open())
      for (size_t i = 0; i < rep.picard.trace.size(); ++i)
        trace << fmt::format("{},{:.17g},{},{},{:.17g}\n", n + 1, s.t, rep.picard.worst_column, i + 1,
                             rep.picard.trace[i]);
    if (snap_every > 0 && (n + 1) % snap_every == 0)
      write_snapshot((dir / fmt::format("snapshot_{:010.0f}.bin", s.t)).string(), s, model.mesh(), cfg.constants,
                     extra_cfg);
    if (opt.verbose && ((n + 1) % report == 0 || n + 1 == nsteps))
      fmt::print(stderr, "step {}/{}  t = {:.6g} s  Picard max {}  max|w| {:.3e} m/s\n", n + 1, nsteps, s.t,
                 rep.picard.max_iterations, th.max_vertical_speed(s.w));
  }
  sum.final_snapshot = (dir / "final.bin").string();
  write_snapshot(sum.final_snapshot, s, model.mesh(), cfg.constants, extra_cfg);
  sum.steps = nsteps;
  sum.t = s.t;
  sum.last = energies(th, s);
  sum.mass_last = th.total_mass(s.rho);
  sum.max_u = th.max_horizontal_speed(s.u);
  sum.max_w = th.max_vertical_speed(s.w);
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sum;
}

}  // namespace mimetic
