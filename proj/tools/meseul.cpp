#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>

#include "mimetic/cases.hpp"
#include "mimetic/driver.hpp"
#include "mimetic/errors.hpp"

using namespace mimetic;
namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& path, bool verbose, long max_steps) {
  const RunConfig cfg = RunConfig::load(path);
  RunOptions opt;
  opt.verbose = verbose;
  opt.max_steps = max_steps;
  const RunSummary s = run(cfg, opt);
  const double e0 = s.first.total(), e1 = s.last.total();
  fmt::print("steps            {}\n", s.steps);
  fmt::print("time             {:.6g} s\n", s.t);
  fmt::print("wall time        {:.3f} s\n", s.wall_seconds);
  fmt::print("energy change    {:.6e} (relative)\n", e0 != 0.0 ? (e1 - e0) / std::abs(e0) : 0.0);
  fmt::print("mass change      {:.6e} (relative)\n", (s.mass_last - s.mass_first) / s.mass_first);
  fmt::print("max Picard iter  {}\n", s.max_picard_iterations);
  fmt::print("max |u|, |w|     {:.6e} {:.6e} m/s\n", s.max_u, s.max_w);
  fmt::print("final snapshot   {}\n", s.final_snapshot);
  return 0;
}

int cmd_hydro_init(const std::string& path, const std::string& output) {
  const RunConfig cfg = RunConfig::load(path);
  const Model model(cfg);
  State s = model.initial_state();
  const Thermo& th = model.thermo();
  HTendency ht;
  model.horizontal().tendency(s, ht);
  VTendency vt;
  model.vertical().tendency(s, vt);
  fmt::print("case                         {}\n", cfg.testcase);
  fmt::print("vertical balance residual    {:.6e}\n", model.vertical().balance_residual(s));
  fmt::print("max |dw/dt| at start         {:.6e} m/s^2\n", th.max_vertical_speed(vt.w));
  fmt::print("max |du/dt| at start         {:.6e} m/s^2\n", th.max_horizontal_speed(ht.u));
  fmt::print("max |u|, |w|                 {:.6e} {:.6e} m/s\n", th.max_horizontal_speed(s.u),
             th.max_vertical_speed(s.w));
  fmt::print("total mass                   {:.17g} kg\n", th.total_mass(s.rho));
  if (!output.empty()) {
    write_snapshot(output, s, model.mesh(), cfg.constants, {{"case", cfg.testcase}});
    fmt::print("initial state written to     {}\n", output);
  }
  return 0;
}

int cmd_diag(const std::string& path, bool as_json) {
  const Snapshot snap = read_snapshot(path);
  const MeshSpec spec = mesh_from_json(snap.header.at("mesh"));
  const Constants c = constants_from_json(snap.header.at("constants"));
  const Mesh mesh(spec);
  const Assembly A(mesh);
  check_snapshot(snap, A);
  const Thermo th(A, c);
  const State& s = snap.state;
  const Energies E = energies(th, s);
  nlohmann::json out = {{"time_seconds", s.t},
                        {"K", E.K},
                        {"P", E.P},
                        {"I", E.I},
                        {"total", E.total()},
                        {"mass", th.total_mass(s.rho)},
                        {"max_u", th.max_horizontal_speed(s.u)},
                        {"max_w", th.max_vertical_speed(s.w)},
                        {"mesh_hash", snap.header.at("mesh_hash")}};
  if (as_json) {
    fmt::print("{}\n", out.dump(2));
    return 0;
  }
  fmt::print("time    {:.6g} s\n", s.t);
  fmt::print("K       {:.17g} J\n", E.K);
  fmt::print("P       {:.17g} J\n", E.P);
  fmt::print("I       {:.17g} J\n", E.I);
  fmt::print("total   {:.17g} J\n", E.total());
  fmt::print("mass    {:.17g} kg\n", th.total_mass(s.rho));
  fmt::print("max |u| {:.6e} m/s\n", th.max_horizontal_speed(s.u));
  fmt::print("max |w| {:.6e} m/s\n", th.max_vertical_speed(s.w));
  return 0;
}

// Fast invariant checks on small meshes.
int cmd_validate() {
  int failures = 0;
  const auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
    if (!ok) ++failures;
  };

  bool exact = true;
  for (int p = 1; p <= 4; ++p) {
    const auto S = element_incidence(p, p);
    exact = exact && is_zero(int_product(S.E21, S.E10)) && is_zero(int_product(S.E32, S.E21));
    const auto topo = build_topology(cube_lattice(1, p), p);
    const auto G = assemble_incidence(Grid3D{&topo, 2, p});
    exact = exact && is_zero(int_product(G.E21, G.E10)) && is_zero(int_product(G.E32, G.E21));
  }
  report("incidence", exact, "E21 E10 = 0 and E32 E21 = 0 for p = 1..4");

  MeshSpec spec;
  spec.n = 2;
  spec.p = 3;
  spec.z = uniform_levels(5, 10000.0);
  const Mesh mesh(spec);
  const Assembly A(mesh);
  const Thermo th(A, Constants{});
  const Vertical V(th, VerticalOptions{});
  {
    const State s = initial_state("isothermal_rest", nlohmann::json::object(), th);
    const double r = V.balance_residual(s);
    report("hydrostatic balance", r <= 1e-12, fmt::format("residual {:.3e}", r));
  }
  {
    const State s = initial_state("random_smooth", {{"seed", 1}}, th);
    HorizontalOptions ho;
    const Horizontal H(th, ho);
    const double d = bracket_audit(th, H, V, s);
    report("energy exchange", d <= 1e-10, fmt::format("relative defect {:.3e}", d));
  }
  {
    const State s = initial_state("random_smooth", {{"seed", 2}}, th);
    const fs::path tmp = fs::temp_directory_path() / "meseul_validate.bin";
    write_snapshot(tmp.string(), s, mesh, th.constants());
    const Snapshot r = read_snapshot(tmp.string());
    fs::remove(tmp);
    const bool same = r.state.u == s.u && r.state.w == s.w && r.state.rho == s.rho && r.state.Theta == s.Theta;
    report("snapshot", same, "bitwise round trip");
  }
  fmt::print("{}\n", failures == 0 ? "all checks passed" : fmt::format("{} check(s) failed", failures));
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mimetic spectral element compressible Euler model"};
  app.require_subcommand(1);

  std::string run_config, init_config, init_output, snapshot;
  bool verbose = false, as_json = false;
  long max_steps = -1;
  auto* run_cmd = app.add_subcommand("run", "integrate a configuration");
  run_cmd->add_option("config", run_config, "JSON configuration")->required();
  run_cmd->add_flag("-v,--verbose", verbose, "print progress");
  run_cmd->add_option("--max-steps", max_steps, "stop after this many steps");
  auto* validate_cmd = app.add_subcommand("validate", "run the quick invariant checks");
  auto* init_cmd = app.add_subcommand("hydro-init", "build an initial state and report its balance");
  init_cmd->add_option("config", init_config, "JSON configuration")->required();
  init_cmd->add_option("-o,--output", init_output, "write the state as a snapshot");
  auto* diag_cmd = app.add_subcommand("diag", "energies and mass of a snapshot");
  diag_cmd->add_option("snapshot", snapshot, "snapshot file")->required();
  diag_cmd->add_flag("--json", as_json, "print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run_cmd) return cmd_run(run_config, verbose, max_steps);
    if (*validate_cmd) return cmd_validate();
    if (*init_cmd) return cmd_hydro_init(init_config, init_output);
    if (*diag_cmd) return cmd_diag(snapshot, as_json);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
