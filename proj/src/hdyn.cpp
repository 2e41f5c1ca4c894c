#include "mimetic/hdyn.hpp"

#include <cmath>
#include <string>

#include "mimetic/errors.hpp"

namespace mimetic {

double default_viscosity(const Mesh& mesh, bool nonhydrostatic) {
  return (nonhydrostatic ? 0.144 : 0.072) * std::pow(mesh.mean_spacing(), 3.2);
}

Horizontal::Horizontal(const Thermo& th, const HorizontalOptions& opt) : th_(th), A_(th.assembly()), opt_(opt) {
  if (opt_.nu_u < 0.0 || opt_.nu_Theta < 0.0) fail(ErrorKind::Config, "viscosity must be >= 0");
  const Mesh& m = A_.mesh();
  f_.assign(static_cast<size_t>(m.nelem()) * m.nqp(), 0.0);
  if (!opt_.coriolis) return;
  for (int e = 0; e < m.nelem(); ++e)
    for (int q = 0; q < m.nqp(); ++q)
      f_[static_cast<size_t>(e) * m.nqp() + q] =
          m.backend() == Backend::Sphere ? 2.0 * th_.constants().Omega * m.sin_lat(e, q) : opt_.f0;
}

Eigen::VectorXd Horizontal::vorticity(const Eigen::VectorXd& u_layer) const {
  const Eigen::VectorXd MUu = A_.MU2() * u_layer;
  return (A_.rotT() * MUu).cwiseQuotient(A_.MP2());
}

void Horizontal::absolute_vorticity(const Eigen::VectorXd& MUu, int k, std::vector<double>& q) const {
  const Mesh& m = A_.mesh();
  const auto& T = m.topo();
  const int nqp = m.nqp();
  const Eigen::VectorXd om = (A_.rotT() * MUu).cwiseQuotient(A_.MP2());
  const double ih = 1.0 / m.h(k);
  q.resize(static_cast<size_t>(m.nelem()) * nqp);
  for (int e = 0; e < m.nelem(); ++e)
    for (int qq = 0; qq < nqp; ++qq) {
      const size_t i = static_cast<size_t>(e) * nqp + qq;
      q[i] = om[T.node[e * T.nnode_loc() + qq]] * ih + f_[i];
    }
}

void Horizontal::rotation_into(const double* u, double* out, const std::vector<double>& q_abs) const {
  const Mesh& m = A_.mesh();
  const int nqp = m.nqp();
  std::vector<double> ux(nqp), uy(nqp), fx(nqp), fy(nqp);
  std::fill(out, out + A_.n_edges(), 0.0);
  for (int e = 0; e < m.nelem(); ++e) {
    A_.flux_at_quad(e, u, ux.data(), uy.data());
    for (int q = 0; q < nqp; ++q) {
      const double qa = q_abs[static_cast<size_t>(e) * nqp + q];
      fx[q] = -qa * uy[q];
      fy[q] = qa * ux[q];
    }
    A_.flux_weak(e, fx.data(), fy.data(), out);
  }
}

Eigen::VectorXd Horizontal::rotation(const Eigen::VectorXd& u_layer, int k) const {
  std::vector<double> q;
  absolute_vorticity(A_.MU2() * u_layer, k, q);
  Eigen::VectorXd out(A_.n_edges());
  rotation_into(u_layer.data(), out.data(), q);
  return out;
}

Eigen::VectorXd Horizontal::laplacian_u(const Eigen::VectorXd& u_layer) const {
  Eigen::VectorXd d = A_.div() * u_layer, Md(d.size());
  A_.apply_MC(d.data(), Md.data());
  Eigen::VectorXd g = A_.divT() * Md;
  A_.solve_MU2(g.data(), 1);
  const Eigen::VectorXd c = vorticity(u_layer);
  return -g - A_.rot() * c;
}

Eigen::VectorXd Horizontal::laplacian_Q(const Eigen::VectorXd& q_layer) const {
  Eigen::VectorXd Mq(q_layer.size());
  A_.apply_MC(q_layer.data(), Mq.data());
  Eigen::VectorXd g = A_.divT() * Mq;
  A_.solve_MU2(g.data(), 1);
  return -(A_.div() * g);
}

void Horizontal::tendency(const State& s, HTendency& out, HorizontalDiag* diag) const {
  const Mesh& m = A_.mesh();
  const int L = m.nlev(), N1 = A_.n_edges(), N2 = A_.n_cells(), nqp = m.nqp(), ne = m.nelem(), nc = A_.ncl();
  const bool du = opt_.nu_u > 0.0, dT = opt_.nu_Theta > 0.0;

  Eigen::VectorXd pw_v, thv;
  th_.exner_weak(s.Theta, pw_v);
  th_.theta(s.rho, s.Theta, thv);
  Eigen::Map<const Eigen::MatrixXd> pw(pw_v.data(), N2, L);
  Eigen::Map<const Eigen::MatrixXd> u(s.u.data(), N1, L);
  Eigen::Map<const Eigen::MatrixXd> Th(s.Theta.data(), N2, L);
  const Eigen::MatrixXd MUu = A_.MU2() * u;

  const int cLu = 2, cLQ = 2 + (du ? 1 : 0);
  Eigen::MatrixXd B1(N1, (2 + (du ? 1 : 0) + (dT ? 1 : 0)) * L);
  std::vector<double> buf;
  Eigen::VectorXd tmp(N2), tmp2(N2);
  for (int k = 0; k < L; ++k) {
    B1.col(k).noalias() = A_.divT() * pw.col(k);
    th_.density_at_quad(s.rho, k, buf);
    A_.apply_MU2_weighted(buf.data(), u.col(k).data(), B1.col(L + k).data());
    if (du) {
      tmp.noalias() = A_.div() * u.col(k);
      A_.apply_MC(tmp.data(), tmp2.data());
      B1.col(cLu * L + k).noalias() = A_.divT() * tmp2;
    }
    if (dT) {
      A_.apply_MC(Th.col(k).data(), tmp2.data());
      B1.col(cLQ * L + k).noalias() = A_.divT() * tmp2;
    }
  }
  SolveStats st = A_.solve_MU2(B1);

  Eigen::MatrixXd P(N1, L), Lu, LQ;
  for (int k = 0; k < L; ++k) P.col(k) = m.h(k) * B1.col(k);
  if (du) {
    Lu.resize(N1, L);
    for (int k = 0; k < L; ++k)
      Lu.col(k) = -B1.col(cLu * L + k) - A_.rot() * (A_.rotT() * MUu.col(k)).cwiseQuotient(A_.MP2());
  }
  if (dT) {
    LQ.resize(N2, L);
    for (int k = 0; k < L; ++k) LQ.col(k).noalias() = -(A_.div() * B1.col(cLQ * L + k));
  }

  Eigen::MatrixXd B2(N1, (1 + (dT ? 1 : 0)) * L);
  std::vector<std::vector<double>> thq(L);
  for (int k = 0; k < L; ++k) {
    th_.theta_at_quad(thv, k, thq[k]);
    A_.apply_MU2_weighted(thq[k].data(), B1.col(L + k).data(), B2.col(k).data());
    if (dT) {
      A_.apply_MC(LQ.col(k).data(), tmp2.data());
      B2.col(L + k).noalias() = A_.divT() * tmp2;
    }
  }
  const SolveStats st2 = A_.solve_MU2(B2);

  Eigen::MatrixXd B3(N1, L);
  std::vector<double> qa, ux(nqp), uy(nqp), px(nqp), py(nqp), fx(nqp), fy(nqp), ke(nqp);
  Eigen::VectorXd Tk(N2);
  for (int k = 0; k < L; ++k) {
    const double h = m.h(k), ih = 1.0 / h;
    absolute_vorticity(MUu.col(k), k, qa);
    double* o = B3.col(k).data();
    std::fill(o, o + N1, 0.0);
    for (int e = 0; e < ne; ++e) {
      A_.flux_at_quad(e, u.col(k).data(), ux.data(), uy.data());
      A_.flux_at_quad(e, P.col(k).data(), px.data(), py.data());
      for (int q = 0; q < nqp; ++q) {
        const size_t i = static_cast<size_t>(e) * nqp + q;
        const auto& G = m.G(e, q);
        const double d = m.det(e, q);
        const double tq = thq[k][i] / d, qq = qa[i];
        fx[q] = tq * (G(0, 0) * px[q] + G(0, 1) * py[q]) + qq * uy[q];
        fy[q] = tq * (G(1, 0) * px[q] + G(1, 1) * py[q]) - qq * ux[q];
        const double s2 = ih / d;
        ke[q] = 0.5 * (ux[q] * (G(0, 0) * ux[q] + 2.0 * G(0, 1) * uy[q]) + G(1, 1) * uy[q] * uy[q]) * s2 * s2;
      }
      A_.flux_weak(e, fx.data(), fy.data(), o);
      A_.cell_weak(ke.data(), Tk.data() + static_cast<size_t>(e) * nc);
    }
    B3.col(k).noalias() += h * (A_.divT() * Tk);
    if (du) {
      tmp.noalias() = A_.div() * Lu.col(k);
      A_.apply_MC(tmp.data(), tmp2.data());
      B3.col(k).noalias() += opt_.nu_u * (A_.divT() * tmp2);
    }
  }
  const SolveStats st3 = A_.solve_MU2(B3);

  out.u.resize(s.u.size());
  out.rho.resize(s.rho.size());
  out.Theta.resize(s.Theta.size());
  Eigen::Map<Eigen::MatrixXd> ut(out.u.data(), N1, L), rt(out.rho.data(), N2, L), Tt(out.Theta.data(), N2, L);
  for (int k = 0; k < L; ++k) {
    ut.col(k) = B3.col(k);
    if (du) {
      const Eigen::VectorXd MLu = A_.MU2() * Lu.col(k);
      ut.col(k).noalias() += opt_.nu_u * (A_.rot() * (A_.rotT() * MLu).cwiseQuotient(A_.MP2()));
    }
    rt.col(k).noalias() = -(A_.div() * B1.col(L + k));
    Tt.col(k).noalias() = -(A_.div() * B2.col(k));
    if (dT) Tt.col(k).noalias() += opt_.nu_Theta * (A_.div() * B2.col(L + k));
  }

  if (diag) {
    diag->U = B1.middleCols(L, L);
    diag->F = B2.leftCols(L);
    diag->P = P;
    diag->SP.resize(N1, L);
    for (int k = 0; k < L; ++k) {
      A_.apply_MU2_weighted(thq[k].data(), P.col(k).data(), diag->SP.col(k).data());
      diag->SP.col(k) /= m.h(k);
    }
    diag->pi_w = pw;
    diag->solve.iterations = std::max({st.iterations, st2.iterations, st3.iterations});
    diag->solve.rel_residual = std::max({st.rel_residual, st2.rel_residual, st3.rel_residual});
  }
  for (Eigen::Index i = 0; i < out.u.size(); ++i)
    if (!std::isfinite(out.u[i]))
      fail(ErrorKind::Divergence, "non-finite horizontal momentum tendency in layer " + std::to_string(i / N1));
}

void Horizontal::step(State& s, double dt, HorizontalDiag* diag) const {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "time step must be > 0");
  const Eigen::Index nu = s.u.size(), nr = s.rho.size();
  Eigen::VectorXd y(nu + 2 * nr);
  y << s.u, s.rho, s.Theta;
  State b = s;
  HTendency L;
  rk_advance(opt_.rk, y, dt, [&](const Eigen::VectorXd& x, int stage) {
    b.u = x.head(nu);
    b.rho = x.segment(nu, nr);
    b.Theta = x.tail(nr);
    tendency(b, L, stage == 0 ? diag : nullptr);
    Eigen::VectorXd t(x.size());
    t << L.u, L.rho, L.Theta;
    return t;
  });
  s.u = y.head(nu);
  s.rho = y.segment(nu, nr);
  s.Theta = y.tail(nr);
}

}  // namespace mimetic
