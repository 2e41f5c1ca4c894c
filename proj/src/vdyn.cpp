#include "mimetic/vdyn.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "mimetic/errors.hpp"

namespace mimetic {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Column segment of a level-major cell field.
Eigen::Map<Vec> seg(Eigen::VectorXd& v, int N2, int level, int e, int nc) {
  return Eigen::Map<Vec>(v.data() + static_cast<size_t>(N2) * level + static_cast<size_t>(e) * nc, nc);
}
Eigen::Map<const Vec> seg(const Eigen::VectorXd& v, int N2, int level, int e, int nc) {
  return Eigen::Map<const Vec>(v.data() + static_cast<size_t>(N2) * level + static_cast<size_t>(e) * nc, nc);
}

// U-perp mass weight of interface i: half of each adjacent layer thickness.
double iface_mass(const Mesh& m, int i) {
  double s = 0.0;
  if (i > 0) s += 0.5 * m.h(i - 1);
  if (i < m.nlev()) s += 0.5 * m.h(i);
  return s;
}

// Weak Exner integrals of one element and layer.
Vec exner_weak_local(const Assembly& A, const Constants& c, int e, int k, const Vec& Th) {
  const Mesh& m = A.mesh();
  const int nqp = m.nqp();
  std::vector<double> v(nqp);
  A.cell_at_quad(Th.data(), v.data());
  const double s = c.exner_scale(), kv = c.kappa_v(), h = m.h(k);
  for (int q = 0; q < nqp; ++q) {
    const double x = v[q] / (m.det(e, q) * h);
    if (!(x > 0.0)) fail(ErrorKind::Domain, "non-positive Theta in element " + std::to_string(e));
    v[q] = s * std::pow(x, kv);
  }
  Vec out(A.ncl());
  A.cell_weak(v.data(), out.data());
  return out;
}

}  // namespace

Vertical::Vertical(const Thermo& th, const VerticalOptions& opt) : th_(th), A_(th.assembly()), opt_(opt) {
  if (opt_.rayleigh < 0.0) fail(ErrorKind::Config, "Rayleigh coefficient must be >= 0");
  if (!(opt_.picard_tol > 0.0)) fail(ErrorKind::Config, "Picard tolerance must be > 0");
  if (opt_.picard_max_iter < 1) fail(ErrorKind::Config, "Picard iteration limit must be >= 1");
}

void Vertical::tendency(const State& s, VTendency& out, VerticalDiag* diag) const {
  const Mesh& m = A_.mesh();
  const Constants& c = th_.constants();
  const int L = m.nlev(), N2 = A_.n_cells(), nc = A_.ncl(), ne = m.nelem();
  Vec pw, thv;
  th_.exner_weak(s.Theta, pw);
  th_.theta(s.rho, s.Theta, thv);
  out.w = Vec::Zero(s.w.size());
  out.rho.resize(s.rho.size());
  out.Theta.resize(s.Theta.size());
  Mat U = Mat::Zero(N2, L + 1), F = Mat::Zero(N2, L + 1), SP = Mat::Zero(N2, L + 1);
  Vec tmp(nc), tmp2(nc), y_lo(nc), y_hi(nc), rsum(nc);
  std::vector<Vec> Tw(L);
  for (int e = 0; e < ne; ++e) {
    const Mat& MCi = A_.MC_inv(e);
    // kinetic Q-projection per layer from interface values
    std::vector<Vec> ww(L + 1, Vec::Zero(nc));
    for (int i = 0; i <= L; ++i) {
      auto wi = seg(s.w, N2, i, e, nc);
      if (wi.squaredNorm() == 0.0) continue;
      A_.W_apply(e, wi.data(), wi.data(), ww[i].data());
    }
    for (int k = 0; k < L; ++k) Tw[k] = 0.25 * (ww[k] + ww[k + 1]);
    for (int i = 1; i < L; ++i) {
      auto wi = seg(s.w, N2, i, e, nc);
      const double mi = iface_mass(m, i);
      auto th_i = seg(thv, N2, i, e, nc);
      tmp = MCi * (seg(pw, N2, i - 1, e, nc) - seg(pw, N2, i, e, nc));
      Eigen::Map<Vec> sp(SP.col(i).data() + static_cast<size_t>(e) * nc, nc);
      A_.T_apply(e, th_i.data(), tmp.data(), sp.data());
      Vec num = Tw[i - 1] - Tw[i] + sp;
      num.array() += c.g * (m.zmid(i - 1) - m.zmid(i));
      if (i == L - 1 && opt_.rayleigh > 0.0) num -= opt_.rayleigh * 0.5 * m.h(L - 1) * (A_.MC(e) * wi);
      seg(out.w, N2, i, e, nc) = (MCi * num) / mi;
      rsum = 0.5 * (seg(s.rho, N2, i - 1, e, nc) + seg(s.rho, N2, i, e, nc));
      A_.W_apply(e, rsum.data(), wi.data(), tmp.data());
      Eigen::Map<Vec> Ui(U.col(i).data() + static_cast<size_t>(e) * nc, nc);
      Ui = (MCi * tmp) / mi;
      A_.T_apply(e, th_i.data(), Ui.data(), tmp2.data());
      Eigen::Map<Vec>(F.col(i).data() + static_cast<size_t>(e) * nc, nc) = MCi * tmp2;
    }
  }
  for (int k = 0; k < L; ++k) {
    out.rho.segment(static_cast<Eigen::Index>(N2) * k, N2) = -(U.col(k + 1) - U.col(k));
    out.Theta.segment(static_cast<Eigen::Index>(N2) * k, N2) = -(F.col(k + 1) - F.col(k));
  }
  if (diag) {
    diag->U = std::move(U);
    diag->F = std::move(F);
    diag->SP = std::move(SP);
    diag->pi_w = Eigen::Map<const Mat>(pw.data(), N2, L);
  }
}

void Vertical::explicit_half_step(State& s, double dt, VerticalDiag* diag) const {
  if (dt < 0.0) fail(ErrorKind::InvalidArgument, "time step must be >= 0");
  VTendency t;
  tendency(s, t, diag);
  s.w += (0.5 * dt) * t.w;
  s.rho += (0.5 * dt) * t.rho;
  s.Theta += (0.5 * dt) * t.Theta;
  for (Eigen::Index i = 0; i < s.w.size(); ++i)
    if (!std::isfinite(s.w[i]))
      fail(ErrorKind::Divergence, "non-finite vertical velocity in column " +
                                      std::to_string((i % A_.n_cells()) / A_.ncl()));
}

double Vertical::balance_residual(const State& s) const {
  const Mesh& m = A_.mesh();
  const Constants& c = th_.constants();
  const int L = m.nlev(), N2 = A_.n_cells(), nc = A_.ncl();
  Vec pw, thv, tmp(nc), sp(nc);
  th_.exner_weak(s.Theta, pw);
  th_.theta(s.rho, s.Theta, thv);
  double worst = 0.0;
  for (int e = 0; e < m.nelem(); ++e)
    for (int i = 1; i < L; ++i) {
      tmp = A_.MC_inv(e) * (seg(pw, N2, i - 1, e, nc) - seg(pw, N2, i, e, nc));
      A_.T_apply(e, seg(thv, N2, i, e, nc).data(), tmp.data(), sp.data());
      const double grav = c.g * (m.zmid(i) - m.zmid(i - 1));
      worst = std::max(worst, (sp.array() - grav).abs().maxCoeff() / grav);
    }
  return worst;
}

template <int NC>
int Vertical::implicit_column_impl(State& s, int e, double dt, const Eigen::VectorXd& pi_w,
                                   std::vector<double>* trace) const {
  using Mat = Eigen::Matrix<double, NC, NC>;
  using Vec = Eigen::Matrix<double, NC, 1>;
  const Mesh& m = A_.mesh();
  const Constants& c = th_.constants();
  const int L = m.nlev(), N2 = A_.n_cells(), nc = A_.ncl();
  const Mat MC = A_.MC(e);
  const Mat MCi = A_.MC_inv(e);
  const double a_ex = dt * c.R / (2.0 * c.cv());
  const double kap = dt * dt * c.R / (4.0 * c.cv());
  // Velocity changes are measured relative to the larger of the iterate and a small reference speed.
  double area = 0.0;
  for (int q = 0; q < m.nqp(); ++q) area += m.weight(q) * m.det(e, q);
  const double w_floor = (L - 1) * area * area / nc * opt_.picard_reference_speed * opt_.picard_reference_speed;

  std::vector<Vec> rho0(L), Th0(L), pi0(L), Pi0(L), rho(L), Th(L), Pi(L), w0(L + 1), w(L + 1);
  std::vector<Mat> A(L);
  for (int k = 0; k < L; ++k) {
    rho0[k] = seg(s.rho, N2, k, e, nc);
    Th0[k] = seg(s.Theta, N2, k, e, nc);
    pi0[k] = seg(pi_w, N2, k, e, nc);
    Pi0[k] = m.h(k) * (MCi * pi0[k]);
    Eigen::PartialPivLU<Mat> lu(Mat(A_.W(e, Th0[k].data())));
    A[k] = (MC * lu.solve(A_.W(e, Pi0[k].data()))) / m.h(k);
  }
  for (int i = 0; i <= L; ++i) w0[i] = seg(s.w, N2, i, e, nc);
  rho = rho0;
  Th = Th0;
  Pi = Pi0;
  w = w0;

  const int n = L - 1;
  std::vector<Mat> D(n), Lo(n), Up(n), B(n), C(n);
  std::vector<Vec> th(n), r(n), x(L + 1, Vec::Zero(nc)), U(L + 1, Vec::Zero(nc)), Fl(L + 1, Vec::Zero(nc));
  std::vector<Eigen::PartialPivLU<Mat>> Dlu(n);
  Vec tmp(nc);
  int it = 0;
  for (;;) {
    ++it;
    for (int j = 0; j < n; ++j) {
      const int i = j + 1;
      th[j].resize(nc);
      th_.theta_column(e, rho[i - 1].data(), rho[i].data(), Th[i - 1].data(), Th[i].data(), th[j].data());
      B[j] = A_.T(e, th[j].data()) * MCi;
      const Vec rs = 0.5 * (rho[i - 1] + rho[i]);
      C[j] = (MCi * A_.T(e, th[j].data()) * MCi * A_.W(e, rs.data())) / iface_mass(m, i);
    }
    for (int j = 0; j < n; ++j) {
      const int i = j + 1;
      const double mi = iface_mass(m, i);
      D[j] = mi * MC + kap * B[j] * (A[i - 1] + A[i]) * C[j];
      if (i == L - 1 && opt_.rayleigh > 0.0) D[j] += 0.5 * dt * opt_.rayleigh * 0.5 * m.h(L - 1) * MC;
      if (j > 0) Lo[j] = -(dt / 8.0) * A_.W(e, w[i - 1].data()) - kap * B[j] * A[i - 1] * C[j - 1];
      if (j < n - 1) Up[j] = (dt / 8.0) * A_.W(e, w[i + 1].data()) - kap * B[j] * A[i] * C[j + 1];
      r[j] = mi * (MC * w0[i]) + 0.5 * dt * (B[j] * (pi0[i - 1] - pi0[i]));
      r[j].array() += 0.5 * dt * c.g * (m.zmid(i - 1) - m.zmid(i));
    }
    // block Thomas
    for (int j = 0; j < n; ++j) {
      if (j > 0) {
        D[j] -= Lo[j] * Dlu[j - 1].solve(Up[j - 1]);
        r[j] -= Lo[j] * Dlu[j - 1].solve(r[j - 1]);
      }
      Dlu[j].compute(D[j]);
    }
    std::vector<Vec> wn(L + 1, Vec::Zero(nc));
    for (int j = n - 1; j >= 0; --j) {
      Vec rhs = r[j];
      if (j < n - 1) rhs -= Up[j] * wn[j + 2];
      wn[j + 1] = Dlu[j].solve(rhs);
    }
    for (int i = 1; i < L; ++i) {
      if (!wn[i].allFinite()) fail(ErrorKind::Divergence, "non-finite implicit vertical velocity in column " + std::to_string(e));
      x[i] = C[i - 1] * wn[i];
      const Vec rs = 0.5 * (rho[i - 1] + rho[i]);
      A_.W_apply(e, rs.data(), wn[i].data(), tmp.data());
      U[i] = (MCi * tmp) / iface_mass(m, i);
      A_.T_apply(e, th[i - 1].data(), U[i].data(), tmp.data());
      Fl[i] = MCi * tmp;
    }
    double dw = 0.0, nw = 0.0, dr = 0.0, nr = 0.0, dT = 0.0, nT = 0.0, dP = 0.0, nP = 0.0;
    for (int i = 1; i < L; ++i) {
      dw += (wn[i] - w[i]).squaredNorm();
      nw += wn[i].squaredNorm();
    }
    for (int k = 0; k < L; ++k) {
      const Vec pin = pi0[k] - a_ex * (A[k] * (x[k + 1] - x[k]));
      const Vec Pin = m.h(k) * (MCi * pin);
      const Vec rn = rho0[k] - 0.5 * dt * (U[k + 1] - U[k]);
      const Vec Tn = Th0[k] - 0.5 * dt * (Fl[k + 1] - Fl[k]);
      dr += (rn - rho[k]).squaredNorm();
      nr += rn.squaredNorm();
      dT += (Tn - Th[k]).squaredNorm();
      nT += Tn.squaredNorm();
      dP += (Pin - Pi[k]).squaredNorm();
      nP += Pin.squaredNorm();
      rho[k] = rn;
      Th[k] = Tn;
      Pi[k] = Pin;
    }
    w = std::move(wn);
    const double res = std::sqrt(std::max({dw / std::max(nw, w_floor), dr / nr, dT / nT, dP / nP}));
    if (trace) trace->push_back(res);
    if (res < opt_.picard_tol) break;
    if (it >= opt_.picard_max_iter)
      fail(ErrorKind::Solver, fmt::format("Picard iteration did not converge in column {} (residual {:.3e} after {} "
                                          "iterations)",
                                          e, res, it));
  }
  for (int k = 0; k < L; ++k) {
    seg(s.rho, N2, k, e, nc) = rho[k];
    seg(s.Theta, N2, k, e, nc) = Th[k];
  }
  for (int i = 1; i < L; ++i) seg(s.w, N2, i, e, nc) = w[i];
  return it;
}

int Vertical::implicit_column(State& s, int e, double dt, const Eigen::VectorXd& pi_w,
                              std::vector<double>* trace) const {
  switch (A_.ncl()) {
    case 1: return implicit_column_impl<1>(s, e, dt, pi_w, trace);
    case 4: return implicit_column_impl<4>(s, e, dt, pi_w, trace);
    case 9: return implicit_column_impl<9>(s, e, dt, pi_w, trace);
    case 16: return implicit_column_impl<16>(s, e, dt, pi_w, trace);
    default: return implicit_column_impl<Eigen::Dynamic>(s, e, dt, pi_w, trace);
  }
}

PicardReport Vertical::implicit_half_step(State& s, double dt) const {
  if (dt < 0.0) fail(ErrorKind::InvalidArgument, "time step must be >= 0");
  PicardReport rep;
  const Mesh& m = A_.mesh();
  if (m.nlev() < 2) return rep;
  Vec pw;
  th_.exner_weak(s.Theta, pw);
  long total = 0;
  std::vector<double> tr;
  for (int e = 0; e < m.nelem(); ++e) {
    tr.clear();
    const int it = implicit_column(s, e, dt, pw, &tr);
    total += it;
    if (it > rep.max_iterations) {
      rep.max_iterations = it;
      rep.worst_column = e;
      rep.trace = tr;
    }
  }
  rep.mean_iterations = static_cast<double>(total) / m.nelem();
  return rep;
}

namespace {
constexpr double table_dz = 10.0;
}  // namespace

Atmosphere::Atmosphere(std::function<double(double)> temperature, double surface_pressure, const Constants& c)
    : T_(std::move(temperature)), ps_(surface_pressure), c_(c) {
  if (!(ps_ > 0.0)) fail(ErrorKind::Config, "surface pressure must be > 0");
  lnp_.push_back(0.0);
}

double Atmosphere::log_increment(double z, double dz) const {
  // Simpson on d ln p / dz = -g / (R T)
  auto f = [&](double zz) {
    const double T = T_(zz);
    if (!(T > 0.0)) fail(ErrorKind::Domain, "non-positive temperature at z = " + std::to_string(zz));
    return -c_.g / (c_.R * T);
  };
  return dz / 6.0 * (f(z) + 4.0 * f(z + 0.5 * dz) + f(z + dz));
}

double Atmosphere::pressure(double z) const {
  if (!(z >= 0.0)) fail(ErrorKind::Domain, "atmosphere queried below the ground");
  const size_t i = static_cast<size_t>(z / table_dz);
  while (lnp_.size() <= i) {
    const double y = log_increment((lnp_.size() - 1) * table_dz, table_dz) - comp_;
    const double t = lnp_.back() + y;
    comp_ = (t - lnp_.back()) - y;
    lnp_.push_back(t);
  }
  const double z0 = i * table_dz;
  double lp = lnp_[i];
  if (z > z0) lp += log_increment(z0, z - z0);
  return ps_ * std::exp(lp);
}

double Atmosphere::density(double z) const { return pressure(z) / (c_.R * T_(z)); }

double Atmosphere::theta(double z) const { return T_(z) * std::pow(c_.p0 / pressure(z), c_.R / c_.cp); }

State hydrostatic_state(const Thermo& th, const Atmosphere& atm) {
  const Assembly& A = th.assembly();
  const Mesh& m = A.mesh();
  const Constants& c = th.constants();
  const int L = m.nlev(), N2 = A.n_cells(), nc = A.ncl(), nqp = m.nqp();
  const double kv = c.kappa_v(), c0 = c.exner_scale(), cinv = std::pow(c0, 1.0 / kv);
  State s = State::zeros(A);

  std::vector<Vec> wTh(m.nelem()), rhat(m.nelem());
  const Vec ones = Vec::Ones(nc);
  std::vector<double> v(nqp), dv(nqp);
  for (int e = 0; e < m.nelem(); ++e) {
    const Mat& MCi = A.MC_inv(e);
    const Vec x = MCi * ones;
    // Theta pattern whose weak Exner integral is one in every cell
    Vec wt = std::pow(c0, -1.0 / kv) * x;
    for (int it = 0; it < 50; ++it) {
      A.cell_at_quad(wt.data(), v.data());
      Mat J = Mat::Zero(nc, nc);
      for (int q = 0; q < nqp; ++q) {
        const double a = v[q] / m.det(e, q);
        if (!(a > 0.0)) fail(ErrorKind::Domain, "hydrostatic pattern lost positivity");
        dv[q] = c0 * kv * std::pow(a, kv - 1.0) / m.det(e, q);
        v[q] = c0 * std::pow(a, kv);
        for (int r = 0; r < nc; ++r)
          for (int cc = 0; cc < nc; ++cc) J(r, cc) += m.weight(q) * A.cell_basis(r, q) * dv[q] * A.cell_basis(cc, q);
      }
      Vec Fv(nc);
      A.cell_weak(v.data(), Fv.data());
      Fv -= ones;
      const Vec dx = J.partialPivLu().solve(Fv);
      wt -= dx;
      if (Fv.cwiseAbs().maxCoeff() < 1e-15) break;
    }
    wTh[e] = wt;
    const Vec thh = A.T(e, x.data()).llt().solve(ones);
    rhat[e] = A.R(thh.data()).llt().solve(A.R() * wt);
  }

  std::vector<double> r(L), t(L), pi(L);
  for (int k = 0; k < L; ++k) r[k] = atm.density(m.zmid(k)) * m.h(k) * cinv;
  t[0] = atm.density(m.zmid(0)) * atm.theta(m.zmid(0)) * m.h(0) * cinv;
  pi[0] = std::pow(t[0] / m.h(0), kv);
  for (int i = 1; i < L; ++i) {
    const double h = m.h(i), rs = r[i - 1] + r[i], rhs = c.g * (m.zmid(i) - m.zmid(i - 1));
    double ti = atm.density(m.zmid(i)) * atm.theta(m.zmid(i)) * h * cinv;
    for (int it = 0; it < 100; ++it) {
      const double pii = std::pow(ti / h, kv);
      const double f = (t[i - 1] + ti) / rs * (pi[i - 1] - pii) - rhs;
      const double df = (pi[i - 1] - pii) / rs - (t[i - 1] + ti) / rs * kv * pii / ti;
      const double step = f / df;
      ti -= step;
      if (!(ti > 0.0)) fail(ErrorKind::Domain, "hydrostatic balance has no positive solution at layer " + std::to_string(i));
      if (std::abs(step) <= 1e-15 * ti) break;
    }
    t[i] = ti;
    pi[i] = std::pow(ti / h, kv);
  }
  for (int k = 0; k < L; ++k)
    for (int e = 0; e < m.nelem(); ++e) {
      seg(s.rho, N2, k, e, nc) = r[k] * rhat[e];
      seg(s.Theta, N2, k, e, nc) = t[k] * wTh[e];
    }
  return s;
}

double rebalance_columns(const Thermo& th, State& s) {
  const Assembly& A = th.assembly();
  const Mesh& m = A.mesh();
  const Constants& c = th.constants();
  const int L = m.nlev(), N2 = A.n_cells(), nc = A.ncl();
  double worst = 0.0;
  Vec thi(nc), sp(nc);
  for (int e = 0; e < m.nelem(); ++e) {
    const Mat& MCi = A.MC_inv(e);
    Vec pi_lo = exner_weak_local(A, c, e, 0, seg(s.Theta, N2, 0, e, nc));
    for (int i = 1; i < L; ++i) {
      const Vec rlo = seg(s.rho, N2, i - 1, e, nc), rhi = seg(s.rho, N2, i, e, nc);
      const Vec Tlo = seg(s.Theta, N2, i - 1, e, nc);
      const double grav = c.g * (m.zmid(i) - m.zmid(i - 1));
      auto resid = [&](const Vec& Thi) {
        th.theta_column(e, rlo.data(), rhi.data(), Tlo.data(), Thi.data(), thi.data());
        const Vec dp = MCi * (pi_lo - exner_weak_local(A, c, e, i, Thi));
        A.T_apply(e, thi.data(), dp.data(), sp.data());
        return Vec((sp.array() - grav).matrix() / grav);
      };
      Vec T = seg(s.Theta, N2, i, e, nc);
      Vec Fv = resid(T);
      for (int it = 0; it < 40 && Fv.cwiseAbs().maxCoeff() > 1e-14; ++it) {
        Mat J(nc, nc);
        for (int j = 0; j < nc; ++j) {
          const double eps = 1e-7 * std::max(std::abs(T[j]), 1e-300);
          Vec Tp = T;
          Tp[j] += eps;
          J.col(j) = (resid(Tp) - Fv) / eps;
        }
        T -= J.partialPivLu().solve(Fv);
        Fv = resid(T);
      }
      worst = std::max(worst, Fv.cwiseAbs().maxCoeff());
      seg(s.Theta, N2, i, e, nc) = T;
      pi_lo = exner_weak_local(A, c, e, i, T);
    }
  }
  return worst;
}

}  // namespace mimetic
