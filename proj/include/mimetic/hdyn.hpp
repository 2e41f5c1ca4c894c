#pragma once

#include <Eigen/Core>
#include <vector>

#include "mimetic/state_thermo.hpp"

namespace mimetic {

enum class RKScheme { RK3, RK2 };

struct HorizontalOptions {
  RKScheme rk = RKScheme::RK3;
  bool coriolis = true;
  double f0 = 0.0;        // constant Coriolis parameter on the plane, s^-1
  double nu_u = 0.0;      // biharmonic coefficient on u, m^4 s^-1 (0 = off)
  double nu_Theta = 0.0;  // biharmonic coefficient on Theta, m^4 s^-1
};

// One step of the strong-stability-preserving Runge-Kutta scheme for
// y' = f(y, stage).  V is any vector-space type (double, Eigen vectors).
template <class V, class F>
void rk_advance(RKScheme rk, V& y, double dt, F&& f) {
  const V L0 = f(y, 0);
  const V b1 = y + dt * L0;
  const V L1 = f(b1, 1);
  if (rk == RKScheme::RK2) {
    y = y + (0.5 * dt) * (L0 + L1);
    return;
  }
  const V b2 = 0.75 * y + 0.25 * b1 + (0.25 * dt) * L1;
  const V L2 = f(b2, 2);
  y = (1.0 / 3.0) * y + (2.0 / 3.0) * b2 + (2.0 * dt / 3.0) * L2;
}

// Default biharmonic coefficient from the mean GLL node spacing.
double default_viscosity(const Mesh& mesh, bool nonhydrostatic);

// Quantities built during a tendency evaluation, kept for the energy ledger.
// Matrices hold one layer per column.
struct HorizontalDiag {
  Eigen::MatrixXd U;     // mass flux
  Eigen::MatrixXd F;     // temperature flux
  Eigen::MatrixXd P;     // weak (negative) Exner gradient
  Eigen::MatrixXd SP;    // theta-weighted mass times P
  Eigen::MatrixXd pi_w;  // weak Exner integrals
  SolveStats solve;
};

struct HTendency {
  Eigen::VectorXd u, rho, Theta;
};

class Horizontal {
 public:
  Horizontal(const Thermo& th, const HorizontalOptions& opt);

  const HorizontalOptions& options() const { return opt_; }

  void tendency(const State& s, HTendency& out, HorizontalDiag* diag = nullptr) const;
  // One explicit step of the configured Runge-Kutta scheme on (u, rho, Theta).
  // If diag is given it receives the first-stage diagnostics.
  void step(State& s, double dt, HorizontalDiag* diag = nullptr) const;

  // Nodal vorticity coefficients of layer k (W-perp): MP2 omega = rot^T MU2 u.
  Eigen::VectorXd vorticity(const Eigen::VectorXd& u_layer) const;
  // Weak rotation term of layer k before the mass solve, with absolute vorticity omega/h + f.
  Eigen::VectorXd rotation(const Eigen::VectorXd& u_layer, int k) const;
  // Weak vector Laplacian of one layer's u and scalar Laplacian of a Q field.
  Eigen::VectorXd laplacian_u(const Eigen::VectorXd& u_layer) const;
  Eigen::VectorXd laplacian_Q(const Eigen::VectorXd& q_layer) const;
  // Coriolis parameter at the quadrature points (nelem * nqp).
  const std::vector<double>& coriolis() const { return f_; }

 private:
  void rotation_into(const double* u, double* out, const std::vector<double>& q_abs) const;
  void absolute_vorticity(const Eigen::VectorXd& MUu, int k, std::vector<double>& q) const;

  const Thermo& th_;
  const Assembly& A_;
  HorizontalOptions opt_;
  std::vector<double> f_;
};

}  // namespace mimetic
