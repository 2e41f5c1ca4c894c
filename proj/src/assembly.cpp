#include "mimetic/assembly.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "mimetic/errors.hpp"

namespace mimetic {

// Sparse Cholesky with a triangular solve that sweeps all right-hand sides of
// a row together; the rows are contiguous so the inner loops vectorise.
struct Assembly::Direct {
  Eigen::SparseMatrix<double> L;  // column-major, diagonal first in each column
  Eigen::VectorXi perm;           // permuted[perm[i]] = original[i]
  mutable std::vector<double> buf;

  explicit Direct(const Eigen::SparseMatrix<double>& A) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(A);
    if (llt.info() != Eigen::Success) fail(ErrorKind::Solver, "flux mass matrix is not positive definite");
    L = llt.matrixL();
    L.makeCompressed();
    perm = llt.permutationP().indices();
    for (int j = 0; j < L.cols(); ++j)
      if (L.outerIndexPtr()[j] == L.outerIndexPtr()[j + 1] || L.innerIndexPtr()[L.outerIndexPtr()[j]] != j)
        fail(ErrorKind::Solver, "unexpected Cholesky factor layout");
  }

  void solve(double* B, int m) const {
    const int n = static_cast<int>(L.cols());
    buf.assign(static_cast<size_t>(n) * m, 0.0);
    double* y = buf.data();
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < n; ++i) y[static_cast<size_t>(perm[i]) * m + k] = B[static_cast<size_t>(k) * n + i];
    const int* outer = L.outerIndexPtr();
    const int* inner = L.innerIndexPtr();
    const double* val = L.valuePtr();
    for (int j = 0; j < n; ++j) {
      double* yj = y + static_cast<size_t>(j) * m;
      const double d = 1.0 / val[outer[j]];
      for (int k = 0; k < m; ++k) yj[k] *= d;
      for (int t = outer[j] + 1; t < outer[j + 1]; ++t) {
        double* yi = y + static_cast<size_t>(inner[t]) * m;
        const double l = val[t];
        for (int k = 0; k < m; ++k) yi[k] -= l * yj[k];
      }
    }
    for (int j = n - 1; j >= 0; --j) {
      double* yj = y + static_cast<size_t>(j) * m;
      for (int t = outer[j] + 1; t < outer[j + 1]; ++t) {
        const double* yi = y + static_cast<size_t>(inner[t]) * m;
        const double l = val[t];
        for (int k = 0; k < m; ++k) yj[k] -= l * yi[k];
      }
      const double d = 1.0 / val[outer[j]];
      for (int k = 0; k < m; ++k) yj[k] *= d;
    }
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < n; ++i) B[static_cast<size_t>(k) * n + i] = y[static_cast<size_t>(perm[i]) * m + k];
  }
};

Assembly::~Assembly() = default;

Assembly::Assembly(const Mesh& mesh, MassSolver solver, double cg_tol, int cg_max_iter)
    : mesh_(mesh), solver_(solver), cg_tol_(cg_tol), cg_max_iter_(cg_max_iter) {
  if (!(cg_tol > 0.0)) fail(ErrorKind::Config, "solver tolerance must be > 0");
  const int p = mesh_.p(), nq = mesh_.nq(), nqp = mesh_.nqp();
  const auto& T = mesh_.topo();
  const int ne = mesh_.nelem(), nel = T.nedge_loc(), nc = ncl();

  EQ_.resize(nc, nqp);
  for (int j = 1; j <= p; ++j)
    for (int i = 1; i <= p; ++i)
      for (int b = 0; b < nq; ++b)
        for (int a = 0; a < nq; ++a) EQ_((i - 1) + (j - 1) * p, a + b * nq) = mesh_.edge_at(i, a) * mesh_.edge_at(j, b);
  {
    Eigen::VectorXd w(nqp);
    for (int q = 0; q < nqp; ++q) w[q] = mesh_.weight(q);
    R_ = EQ_ * w.asDiagonal() * EQ_.transpose();
  }

  // local flux basis at quadrature points
  Eigen::MatrixXd Ax = Eigen::MatrixXd::Zero(nel, nqp), Ay = Eigen::MatrixXd::Zero(nel, nqp);
  for (int j = 1; j <= p; ++j)
    for (int i = 0; i <= p; ++i)
      for (int b = 0; b < nq; ++b) Ax(i + (j - 1) * (p + 1), i + b * nq) = mesh_.edge_at(j, b);
  for (int j = 0; j <= p; ++j)
    for (int i = 1; i <= p; ++i)
      for (int a = 0; a < nq; ++a) Ay(p * (p + 1) + (i - 1) + j * p, a + j * nq) = mesh_.edge_at(i, a);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(ne) * nel * nel);
  MP2_ = Eigen::VectorXd::Zero(T.n_nodes);
  MC_.resize(ne);
  MCinv_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    Eigen::MatrixXd Me = Eigen::MatrixXd::Zero(nel, nel);
    Eigen::VectorXd wq(nqp);
    for (int q = 0; q < nqp; ++q) {
      const double wd = mesh_.weight(q) / mesh_.det(e, q);
      wq[q] = wd;
      const auto& G = mesh_.G(e, q);
      Me.noalias() += wd * (G(0, 0) * Ax.col(q) * Ax.col(q).transpose() + G(1, 1) * Ay.col(q) * Ay.col(q).transpose() +
                            G(0, 1) * (Ax.col(q) * Ay.col(q).transpose() + Ay.col(q) * Ax.col(q).transpose()));
      MP2_[T.node[e * T.nnode_loc() + q]] += mesh_.weight(q) * mesh_.det(e, q);
    }
    for (int r = 0; r < nel; ++r)
      for (int c = 0; c < nel; ++c) {
        if (Me(r, c) == 0.0) continue;
        const int gr = e * nel + r, gc = e * nel + c;
        trip.emplace_back(T.flux[gr], T.flux[gc], T.flux_sign[gr] * T.flux_sign[gc] * Me(r, c));
      }
    MC_[e] = EQ_ * wq.asDiagonal() * EQ_.transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(MC_[e]);
    if (llt.info() != Eigen::Success)
      fail(ErrorKind::Solver, "cell mass block not positive definite in element " + std::to_string(e));
    MCinv_[e] = llt.solve(Eigen::MatrixXd::Identity(nc, nc));
    MCinv_[e] = 0.5 * (MCinv_[e] + MCinv_[e].transpose()).eval();
  }
  MU2_.resize(T.n_edges, T.n_edges);
  MU2_.setFromTriplets(trip.begin(), trip.end());

  const auto& inc = mesh_.inc2d();
  div_ = inc.div.cast<double>();
  divT_ = Eigen::SparseMatrix<double, Eigen::RowMajor>(div_.transpose());
  rot_ = inc.rot.cast<double>();
  rotT_ = Eigen::SparseMatrix<double, Eigen::RowMajor>(rot_.transpose());

  if (solver_ == MassSolver::Direct) {
    direct_ = std::make_unique<Direct>(MU2_);
  } else {
    owned_.assign(ne, {});
    std::vector<char> taken(T.n_edges, 0);
    for (int e = 0; e < ne; ++e)
      for (int l = 0; l < nel; ++l) {
        const int g = T.flux[e * nel + l];
        if (!taken[g]) {
          taken[g] = 1;
          owned_[e].push_back(g);
        }
      }
    const Eigen::MatrixXd dummy;
    block_inv_.resize(ne);
    for (int e = 0; e < ne; ++e) {
      const auto& idx = owned_[e];
      const int nb = static_cast<int>(idx.size());
      Eigen::MatrixXd B(nb, nb);
      for (int r = 0; r < nb; ++r)
        for (int c = 0; c < nb; ++c) B(r, c) = MU2_.coeff(idx[r], idx[c]);
      block_inv_[e] = nb ? Eigen::MatrixXd(B.llt().solve(Eigen::MatrixXd::Identity(nb, nb))) : dummy;
    }
  }
}

void Assembly::cell_at_quad(const double* c_loc, double* vals) const {
  Eigen::Map<const Eigen::VectorXd> c(c_loc, ncl());
  Eigen::Map<Eigen::VectorXd>(vals, mesh_.nqp()).noalias() = EQ_.transpose() * c;
}

void Assembly::cell_weak(const double* vals, double* c_loc) const {
  const int nqp = mesh_.nqp();
  Eigen::VectorXd wv(nqp);
  for (int q = 0; q < nqp; ++q) wv[q] = mesh_.weight(q) * vals[q];
  Eigen::Map<Eigen::VectorXd>(c_loc, ncl()).noalias() = EQ_ * wv;
}

void Assembly::flux_at_quad(int e, const double* u, double* ux, double* uy) const {
  const int p = mesh_.p(), nq = mesh_.nq();
  const auto& T = mesh_.topo();
  const int nel = T.nedge_loc(), base = e * nel;
  double ul[64];
  std::vector<double> big;
  double* loc = ul;
  if (nel > 64) {
    big.resize(nel);
    loc = big.data();
  }
  for (int l = 0; l < nel; ++l) loc[l] = T.flux_sign[base + l] * u[T.flux[base + l]];
  const int off = p * (p + 1);
  for (int b = 0; b < nq; ++b)
    for (int a = 0; a < nq; ++a) {
      double sx = 0.0, sy = 0.0;
      for (int j = 1; j <= p; ++j) sx += loc[a + (j - 1) * (p + 1)] * mesh_.edge_at(j, b);
      for (int i = 1; i <= p; ++i) sy += loc[off + (i - 1) + b * p] * mesh_.edge_at(i, a);
      ux[a + b * nq] = sx;
      uy[a + b * nq] = sy;
    }
}

void Assembly::flux_weak(int e, const double* fx, const double* fy, double* out) const {
  const int p = mesh_.p(), nq = mesh_.nq();
  const auto& T = mesh_.topo();
  const auto& w = mesh_.quad().w;
  const int nel = T.nedge_loc(), base = e * nel, off = p * (p + 1);
  for (int j = 1; j <= p; ++j)
    for (int i = 0; i <= p; ++i) {
      double s = 0.0;
      for (int b = 0; b < nq; ++b) s += w[b] * mesh_.edge_at(j, b) * fx[i + b * nq];
      const int l = base + i + (j - 1) * (p + 1);
      out[T.flux[l]] += T.flux_sign[l] * w[i] * s;
    }
  for (int j = 0; j <= p; ++j)
    for (int i = 1; i <= p; ++i) {
      double s = 0.0;
      for (int a = 0; a < nq; ++a) s += w[a] * mesh_.edge_at(i, a) * fy[a + j * nq];
      const int l = base + off + (i - 1) + j * p;
      out[T.flux[l]] += T.flux_sign[l] * w[j] * s;
    }
}

void Assembly::apply_MU2_weighted(const double* phi, const double* u, double* out) const {
  const int nqp = mesh_.nqp();
  std::fill(out, out + n_edges(), 0.0);
  std::vector<double> ux(nqp), uy(nqp), fx(nqp), fy(nqp);
  for (int e = 0; e < mesh_.nelem(); ++e) {
    flux_at_quad(e, u, ux.data(), uy.data());
    for (int q = 0; q < nqp; ++q) {
      const auto& G = mesh_.G(e, q);
      const double s = phi[e * nqp + q] / mesh_.det(e, q);
      fx[q] = s * (G(0, 0) * ux[q] + G(0, 1) * uy[q]);
      fy[q] = s * (G(1, 0) * ux[q] + G(1, 1) * uy[q]);
    }
    flux_weak(e, fx.data(), fy.data(), out);
  }
}

Eigen::MatrixXd Assembly::W(int e, const double* f_loc) const {
  const int nqp = mesh_.nqp();
  Eigen::VectorXd fh = EQ_.transpose() * Eigen::Map<const Eigen::VectorXd>(f_loc, ncl());
  for (int q = 0; q < nqp; ++q) {
    const double d = mesh_.det(e, q);
    fh[q] *= mesh_.weight(q) / (d * d);
  }
  return EQ_ * fh.asDiagonal() * EQ_.transpose();
}

void Assembly::W_apply(int e, const double* f_loc, const double* x_loc, double* out_loc) const {
  const int nqp = mesh_.nqp();
  Eigen::VectorXd fh = EQ_.transpose() * Eigen::Map<const Eigen::VectorXd>(f_loc, ncl());
  Eigen::VectorXd xh = EQ_.transpose() * Eigen::Map<const Eigen::VectorXd>(x_loc, ncl());
  for (int q = 0; q < nqp; ++q) {
    const double d = mesh_.det(e, q);
    xh[q] *= fh[q] * mesh_.weight(q) / (d * d);
  }
  Eigen::Map<Eigen::VectorXd>(out_loc, ncl()).noalias() = EQ_ * xh;
}

Eigen::MatrixXd Assembly::R(const double* f_loc) const {
  Eigen::VectorXd fh = EQ_.transpose() * Eigen::Map<const Eigen::VectorXd>(f_loc, ncl());
  for (int q = 0; q < mesh_.nqp(); ++q) fh[q] *= mesh_.weight(q);
  return EQ_ * fh.asDiagonal() * EQ_.transpose();
}

Eigen::MatrixXd Assembly::T(int e, const double* f_loc) const {
  Eigen::VectorXd fh = EQ_.transpose() * Eigen::Map<const Eigen::VectorXd>(f_loc, ncl());
  for (int q = 0; q < mesh_.nqp(); ++q) fh[q] *= mesh_.weight(q) / mesh_.det(e, q);
  return EQ_ * fh.asDiagonal() * EQ_.transpose();
}

void Assembly::T_apply(int e, const double* f_loc, const double* x_loc, double* out_loc) const {
  const int nqp = mesh_.nqp();
  Eigen::VectorXd fh = EQ_.transpose() * Eigen::Map<const Eigen::VectorXd>(f_loc, ncl());
  Eigen::VectorXd xh = EQ_.transpose() * Eigen::Map<const Eigen::VectorXd>(x_loc, ncl());
  for (int q = 0; q < nqp; ++q) xh[q] *= fh[q] * mesh_.weight(q) / mesh_.det(e, q);
  Eigen::Map<Eigen::VectorXd>(out_loc, ncl()).noalias() = EQ_ * xh;
}

void Assembly::apply_MC(const double* x, double* out) const {
  const int nc = ncl();
  for (int e = 0; e < mesh_.nelem(); ++e)
    Eigen::Map<Eigen::VectorXd>(out + e * nc, nc).noalias() = MC_[e] * Eigen::Map<const Eigen::VectorXd>(x + e * nc, nc);
}

void Assembly::apply_MC_inv(const double* x, double* out) const {
  const int nc = ncl();
  for (int e = 0; e < mesh_.nelem(); ++e)
    Eigen::Map<Eigen::VectorXd>(out + e * nc, nc).noalias() =
        MCinv_[e] * Eigen::Map<const Eigen::VectorXd>(x + e * nc, nc);
}

SolveStats Assembly::solve_MU2(double* B, int m) const {
  if (m <= 0) return {};
  if (solver_ == MassSolver::Direct) {
    direct_->solve(B, m);
    return {};
  }
  return solve_cg(B, m);
}

SolveStats Assembly::solve_cg(double* B, int m) const {
  const int n = n_edges();
  SolveStats st;
  Eigen::VectorXd x(n), r(n), z(n), d(n), Ad(n);
  auto precond = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    for (size_t e = 0; e < owned_.size(); ++e) {
      const auto& idx = owned_[e];
      const int nb = static_cast<int>(idx.size());
      if (!nb) continue;
      Eigen::VectorXd loc(nb);
      for (int i = 0; i < nb; ++i) loc[i] = in[idx[i]];
      const Eigen::VectorXd res = block_inv_[e] * loc;
      for (int i = 0; i < nb; ++i) out[idx[i]] = res[i];
    }
  };
  for (int k = 0; k < m; ++k) {
    Eigen::Map<Eigen::VectorXd> b(B + static_cast<size_t>(k) * n, n);
    const double bn = b.norm();
    if (bn == 0.0) continue;
    x.setZero();
    r = b;
    precond(r, z);
    d = z;
    double rz = r.dot(z);
    int it = 0;
    double rel = 1.0;
    while (true) {
      rel = r.norm() / bn;
      if (rel <= cg_tol_) break;
      if (it >= cg_max_iter_)
        fail(ErrorKind::Solver, "CG did not converge: relative residual " + std::to_string(rel) + " after " +
                                    std::to_string(it) + " iterations");
      Ad.noalias() = MU2_ * d;
      const double alpha = rz / d.dot(Ad);
      x += alpha * d;
      r -= alpha * Ad;
      precond(r, z);
      const double rz_new = r.dot(z);
      d = z + (rz_new / rz) * d;
      rz = rz_new;
      ++it;
    }
    b = x;
    st.iterations = std::max(st.iterations, it);
    st.rel_residual = std::max(st.rel_residual, rel);
  }
  return st;
}

}  // namespace mimetic
