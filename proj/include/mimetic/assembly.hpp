#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <vector>

#include "mimetic/geometry.hpp"

namespace mimetic {

enum class MassSolver { Direct, CG };

struct SolveStats {
  int iterations = 0;        // largest CG iteration count over the right-hand sides
  double rel_residual = 0.0; // largest final relative residual
};

// Horizontal operators of one layer-independent reference surface.  Layer
// scalings (1/h factors) are applied by the callers; see the member notes.
//
// Local conventions inside an element, with quadrature point q = a + b*nq:
//   cell c = (i-1) + (j-1)p carries e_i(xi) e_j(eta)
//   flux: x-component edges l_i(xi) e_j(eta), then y-component e_i(xi) l_j(eta)
class Assembly {
 public:
  Assembly(const Mesh& mesh, MassSolver solver = MassSolver::Direct, double cg_tol = 1e-12, int cg_max_iter = 2000);
  ~Assembly();
  Assembly(const Assembly&) = delete;
  Assembly& operator=(const Assembly&) = delete;

  const Mesh& mesh() const { return mesh_; }
  int n_nodes() const { return mesh_.topo().n_nodes; }
  int n_edges() const { return mesh_.topo().n_edges; }
  int n_cells() const { return mesh_.topo().n_cells; }
  int ncl() const { return mesh_.p() * mesh_.p(); }  // cells per element
  MassSolver solver() const { return solver_; }
  double cg_tol() const { return cg_tol_; }

  // Flux Gram matrix: int u^T G v / det_h.  The U-parallel layer mass is this / h.
  const Eigen::SparseMatrix<double>& MU2() const { return MU2_; }
  // Nodal mass (diagonal under collocation): w det_h.  The W-perp layer mass is this / h.
  const Eigen::VectorXd& MP2() const { return MP2_; }
  // Per-element cell Gram block int e e' / det_h.
  const Eigen::MatrixXd& MC(int e) const { return MC_[e]; }
  const Eigen::MatrixXd& MC_inv(int e) const { return MCinv_[e]; }

  // Integer 2D incidence converted to double.
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& div() const { return div_; }    // cells x flux
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& divT() const { return divT_; }  // flux x cells
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& rot() const { return rot_; }    // flux x nodes
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& rotT() const { return rotT_; }  // nodes x flux

  // Cell field values at the quadrature points: vals[q] = sum_c c[c] e_c(x_q).
  void cell_at_quad(const double* c_loc, double* vals) const;
  // Weak projection: c[c] = sum_q w_q e_c(x_q) vals[q]  (i.e. int e_c f).
  void cell_weak(const double* vals, double* c_loc) const;
  // Reference flux components of the global flux vector u at the quadrature points of e.
  void flux_at_quad(int e, const double* u, double* ux, double* uy) const;
  // out_i += sum_q w_q (a_i . f) over element e; out is a global flux vector.
  void flux_weak(int e, const double* fx, const double* fy, double* out) const;

  // out = MU2_phi u with phi given at quadrature points (nelem * nqp values):
  //   int phi u^T G v / det_h.
  void apply_MU2_weighted(const double* phi, const double* u, double* out) const;

  // Cell-space weighted block W(f) = int (sum f_c e_c) e e' / det_h^2.
  Eigen::MatrixXd W(int e, const double* f_loc) const;
  // out = W(f) x, without forming the block.
  void W_apply(int e, const double* f_loc, const double* x_loc, double* out_loc) const;

  // Reference-basis blocks, for fields expanded without the metric factor (f = sum f_c e_c):
  //   R = int e e', R(f) = int f e e' (both in reference coordinates),
  //   T(e, f) = int f e e' / det_h, the cell-space block weighted by such a field.
  const Eigen::MatrixXd& R() const { return R_; }
  Eigen::MatrixXd R(const double* f_loc) const;
  Eigen::MatrixXd T(int e, const double* f_loc) const;
  void T_apply(int e, const double* f_loc, const double* x_loc, double* out_loc) const;

  // Global cell-space helpers (length n_cells vectors).
  void apply_MC(const double* x, double* out) const;
  void apply_MC_inv(const double* x, double* out) const;

  // Solve MU2 X = B in place; B holds n_edges x m values column-major.
  SolveStats solve_MU2(double* B, int m) const;
  SolveStats solve_MU2(Eigen::Ref<Eigen::MatrixXd> B) const { return solve_MU2(B.data(), static_cast<int>(B.cols())); }

  // e_c at quadrature point q, stored [c * nqp + q].
  double cell_basis(int c, int q) const { return EQ_(c, q); }

 private:
  struct Direct;
  SolveStats solve_cg(double* B, int m) const;

  const Mesh& mesh_;
  MassSolver solver_;
  double cg_tol_;
  int cg_max_iter_;
  Eigen::SparseMatrix<double> MU2_;
  Eigen::VectorXd MP2_;
  std::vector<Eigen::MatrixXd> MC_, MCinv_;
  Eigen::MatrixXd EQ_;  // ncl x nqp
  Eigen::MatrixXd R_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> div_, divT_, rot_, rotT_;
  std::unique_ptr<Direct> direct_;
  // block-Jacobi: each flux edge belongs to the first element that touches it
  std::vector<std::vector<int>> owned_;
  std::vector<Eigen::MatrixXd> block_inv_;
};

}  // namespace mimetic
