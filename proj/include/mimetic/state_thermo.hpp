#pragma once

#include <Eigen/Core>
#include <vector>

#include "mimetic/assembly.hpp"

namespace mimetic {

struct Constants {
  double R = 287.0;      // J kg^-1 K^-1
  double cp = 1004.5;    // J kg^-1 K^-1
  double p0 = 1.0e5;     // Pa
  double g = 9.80616;    // m s^-2
  double Omega = 7.292e-5;  // s^-1
  double cv() const { return cp - R; }
  double kappa_v() const { return R / cv(); }  // R / c_v
  // c_p (R / p0)^{R/c_v}; the Exner function is this times Theta^{R/c_v}
  double exner_scale() const;
};

// Prognostic state.  Storage per space:
//   u     (U-parallel)  flux edge + n_edges * layer
//   w     (U-perp)      cell + n_cells * interface, interfaces 0..nlev (ends are zero)
//   rho, Theta (Q)      cell + n_cells * layer
struct State {
  Eigen::VectorXd u, w, rho, Theta;
  double t = 0.0;

  static State zeros(const Assembly& A);
};

// Diagnostic helpers shared by the horizontal and vertical solvers.
class Thermo {
 public:
  Thermo(const Assembly& A, const Constants& c) : A_(A), c_(c) {}

  const Assembly& assembly() const { return A_; }
  const Constants& constants() const { return c_; }
  int nlev() const { return A_.mesh().nlev(); }

  // Weak Exner integrals pi_w = M^Q Pi per cell, all layers.
  void exner_weak(const Eigen::VectorXd& Theta, Eigen::VectorXd& pi_w) const;
  // Exner coefficients Pi = (M^Q)^{-1} pi_w.
  Eigen::VectorXd exner(const Eigen::VectorXd& Theta) const;
  // Exner coefficients from weak integrals (layer-wise h MC^{-1}).
  Eigen::VectorXd exner_from_weak(const Eigen::VectorXd& pi_w) const;
  // Potential temperature from rho theta = Theta (weakly), interfaces 0..nlev, expanded in the
  // reference cell basis so that uniform theta is exact on curved elements.
  void theta(const Eigen::VectorXd& rho, const Eigen::VectorXd& Theta, Eigen::VectorXd& th) const;
  // Theta on one interface of one column from the adjacent layer values (nullptr for a missing layer).
  void theta_column(int e, const double* rho_lo, const double* rho_hi, const double* Th_lo, const double* Th_hi,
                    double* out) const;

  // Pointwise physical density of layer k at the quadrature points of all elements.
  void density_at_quad(const Eigen::VectorXd& rho, int k, std::vector<double>& out) const;
  // Layer-averaged physical theta for layer k at the quadrature points.
  void theta_at_quad(const Eigen::VectorXd& th, int k, std::vector<double>& out) const;

  // Physical pressure from a Theta coefficient field at the quadrature points of layer k.
  void pressure_at_quad(const Eigen::VectorXd& Theta, int k, std::vector<double>& out) const;

  // Total mass sum_c rho_c (each Q basis function integrates to one).
  double total_mass(const Eigen::VectorXd& rho) const;

  // Largest physical speeds over all quadrature points, m s^-1.
  double max_horizontal_speed(const Eigen::VectorXd& u) const;
  double max_vertical_speed(const Eigen::VectorXd& w) const;

 private:
  const Assembly& A_;
  Constants c_;
};

// Throws a divergence error naming the first non-finite entry of any state field.
void check_finite(const State& s, const char* where);

}  // namespace mimetic
