#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "mimetic/state_thermo.hpp"

namespace mimetic {

struct VerticalOptions {
  double rayleigh = 0.2;      // top-layer friction coefficient, s^-1
  double picard_tol = 1e-8;  // largest relative change of w, rho, Theta or Pi over a column
  double picard_reference_speed = 1e-3;  // m/s, lower bound of the w scale in the Picard residual
  int picard_max_iter = 50;
};

// Interface quantities of the vertical operators; one interface per column
// of each matrix (n_cells x (nlev + 1)).
struct VerticalDiag {
  Eigen::MatrixXd U;   // vertical mass flux
  Eigen::MatrixXd F;   // vertical temperature flux
  Eigen::MatrixXd SP;  // theta-weighted mass times the vertical pressure gradient
  Eigen::MatrixXd pi_w;  // weak Exner integrals, one layer per column
};

struct VTendency {
  Eigen::VectorXd w, rho, Theta;
};

struct PicardReport {
  int max_iterations = 0;
  double mean_iterations = 0.0;
  int worst_column = -1;
  std::vector<double> trace;  // residual per iteration of the worst column
};

class Vertical {
 public:
  Vertical(const Thermo& th, const VerticalOptions& opt);

  const VerticalOptions& options() const { return opt_; }

  void tendency(const State& s, VTendency& out, VerticalDiag* diag = nullptr) const;
  // Forward Euler over dt/2.
  void explicit_half_step(State& s, double dt, VerticalDiag* diag = nullptr) const;
  // Backward Euler over dt/2 with the linearised Exner update and Picard iteration per column.
  PicardReport implicit_half_step(State& s, double dt) const;
  // Largest imbalance between gravity and the vertical pressure gradient at rest,
  // relative to the gravity term.
  double balance_residual(const State& s) const;

 private:
  int implicit_column(State& s, int e, double dt, const Eigen::VectorXd& pi_w, std::vector<double>* trace) const;
  template <int NC>
  int implicit_column_impl(State& s, int e, double dt, const Eigen::VectorXd& pi_w, std::vector<double>* trace) const;

  const Thermo& th_;
  const Assembly& A_;
  VerticalOptions opt_;
};

// Horizontally uniform reference atmosphere defined by a temperature profile
// and surface pressure; pressure follows from hydrostatic integration.
class Atmosphere {
 public:
  Atmosphere(std::function<double(double)> temperature, double surface_pressure, const Constants& c);
  double temperature(double z) const { return T_(z); }
  double pressure(double z) const;
  double density(double z) const;
  double theta(double z) const;

 private:
  double log_increment(double z, double dz) const;

  std::function<double(double)> T_;
  double ps_;
  Constants c_;
  // ln(p / ps) every 10 m from the ground, extended on demand with compensated summation
  mutable std::vector<double> lnp_;
  mutable double comp_ = 0.0;
};

// Rest state in exact discrete vertical balance with pressure constant on
// every layer, close to the given atmosphere.
State hydrostatic_state(const Thermo& th, const Atmosphere& atm);

// Adjust Theta above the lowest layer so every column is in discrete balance
// at rest with its current density.  Returns the largest remaining residual.
double rebalance_columns(const Thermo& th, State& s);

}  // namespace mimetic
