#pragma once

#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "mimetic/energetics.hpp"

namespace mimetic {

struct RunConfig {
  std::string testcase = "isothermal_rest";
  nlohmann::json case_params = nlohmann::json::object();

  MeshSpec mesh;               // z filled from levels and z_top; radius already reduced
  double radius_factor = 1.0;  // planet radius divisor X >= 1

  Constants constants;
  bool coriolis = true;
  double f0 = 0.0;  // plane only
  bool nonhydrostatic = true;

  double dt = 0.0, t_end = 0.0;
  RKScheme rk = RKScheme::RK3;
  MassSolver mass_solver = MassSolver::Direct;
  double cg_tol = 1e-12;
  int cg_max_iter = 2000;
  double picard_tol = 1e-8;
  int picard_max_iter = 50;

  bool dissipation = true;
  std::optional<double> nu_u, nu_Theta;  // unset = mesh-based default
  double rayleigh = 0.2;

  std::string output_dir = "output";
  std::string ledger_file = "ledger.csv";
  std::string picard_trace_file;  // empty = off
  int ledger_every = 1;           // steps between ledger rows
  double snapshot_interval = 0.0; // 0 = final snapshot only
  std::string restart;            // snapshot to start from instead of the test case

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
  long steps() const;
};

struct StepReport {
  PicardReport picard;
  SolveStats solve;
};

// Strang carryover step: vertical explicit half step, horizontal RK step,
// vertical implicit half step.  If row is given it receives the energies at
// the start of the step and the exchanges of the step's operator evaluations.
StepReport strang_step(const Thermo& th, const Horizontal& H, const Vertical& V, State& s, double dt,
                       LedgerRow* row = nullptr);

// Mesh, operators and solvers for one configuration.
class Model {
 public:
  explicit Model(const RunConfig& cfg);
  ~Model();

  const RunConfig& config() const { return cfg_; }
  const Mesh& mesh() const { return *mesh_; }
  const Assembly& assembly() const { return *A_; }
  const Thermo& thermo() const { return *th_; }
  const Horizontal& horizontal() const { return *H_; }
  const Vertical& vertical() const { return *V_; }

  State initial_state() const;
  StepReport step(State& s, LedgerRow* row = nullptr) const { return strang_step(*th_, *H_, *V_, s, cfg_.dt, row); }

 private:
  RunConfig cfg_;
  std::unique_ptr<Mesh> mesh_;
  std::unique_ptr<Assembly> A_;
  std::unique_ptr<Thermo> th_;
  std::unique_ptr<Horizontal> H_;
  std::unique_ptr<Vertical> V_;
};

// Snapshots: magic "MESEULR1", little-endian u64 header length, JSON header,
// then the arrays listed in the header as little-endian f64.
std::string mesh_hash(const MeshSpec& spec);
nlohmann::json mesh_to_json(const MeshSpec& spec);
MeshSpec mesh_from_json(const nlohmann::json& j);
nlohmann::json constants_to_json(const Constants& c);
Constants constants_from_json(const nlohmann::json& j);

void write_snapshot(const std::string& path, const State& s, const Mesh& mesh, const Constants& c,
                    const nlohmann::json& extra = nlohmann::json::object());
struct Snapshot {
  nlohmann::json header;
  State state;
};
Snapshot read_snapshot(const std::string& path);
// Throws a format error unless the snapshot was written on this mesh and matches its sizes.
void check_snapshot(const Snapshot& snap, const Assembly& A);

struct RunOptions {
  bool verbose = false;
  long max_steps = -1;  // stop early (restart tests)
};

struct RunSummary {
  long steps = 0;
  double t = 0.0;
  double wall_seconds = 0.0;
  Energies first, last;
  double mass_first = 0.0, mass_last = 0.0;
  int max_picard_iterations = 0;
  double max_w = 0.0, max_u = 0.0;
  std::string final_snapshot;
};

RunSummary run(const RunConfig& cfg, const RunOptions& opt = {});

}  // namespace mimetic
