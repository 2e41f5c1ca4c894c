#include "mimetic/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "mimetic/errors.hpp"

namespace mimetic {

Energies energies(const Thermo& th, const State& s) {
  const Assembly& A = th.assembly();
  const Mesh& m = A.mesh();
  const Constants& c = th.constants();
  const int L = m.nlev(), N1 = A.n_edges(), N2 = A.n_cells(), nc = A.ncl();
  Energies E;
  std::vector<double> rq;
  Eigen::VectorXd Nu(N1);
  for (int k = 0; k < L; ++k) {
    th.density_at_quad(s.rho, k, rq);
    const double* uk = s.u.data() + static_cast<size_t>(N1) * k;
    A.apply_MU2_weighted(rq.data(), uk, Nu.data());
    E.K += 0.5 * Eigen::Map<const Eigen::VectorXd>(uk, N1).dot(Nu) / m.h(k);
  }
  Eigen::VectorXd rs(nc), Ww(nc);
  for (int i = 1; i < L; ++i)
    for (int e = 0; e < m.nelem(); ++e) {
      const size_t lo = static_cast<size_t>(N2) * (i - 1) + static_cast<size_t>(e) * nc;
      const size_t wi = static_cast<size_t>(N2) * i + static_cast<size_t>(e) * nc;
      rs = 0.5 * (s.rho.segment(lo, nc) + s.rho.segment(lo + N2, nc));
      A.W_apply(e, rs.data(), s.w.data() + wi, Ww.data());
      E.K += 0.5 * s.w.segment(wi, nc).dot(Ww);
    }
  for (int k = 0; k < L; ++k) E.P += c.g * m.zmid(k) * s.rho.segment(static_cast<Eigen::Index>(N2) * k, N2).sum();
  Eigen::VectorXd pw;
  th.exner_weak(s.Theta, pw);
  E.I = c.cv() / c.cp * pw.dot(s.Theta);
  return E;
}

Exchanges exchanges(const Thermo& th, const HorizontalDiag* h, const VerticalDiag* v) {
  const Assembly& A = th.assembly();
  const Mesh& m = A.mesh();
  const double g = th.constants().g;
  const int L = m.nlev(), N2 = A.n_cells();
  Exchanges x;
  if (h) {
    for (int k = 0; k < L; ++k) {
      const Eigen::VectorXd zq = Eigen::VectorXd::Constant(N2, m.zmid(k));
      x.K2P += g * h->U.col(k).dot(A.divT() * zq);
      x.P2K -= g * zq.dot(A.div() * h->U.col(k));
      x.K2I += h->U.col(k).dot(h->SP.col(k));
      // summed as flux times Exner gradient: the Exner field has a large mean that
      // would otherwise cancel
      x.I2K -= h->F.col(k).dot(A.divT() * h->pi_w.col(k));
    }
  }
  if (v) {
    double kp = 0.0, pk = 0.0, ki = 0.0, ik = 0.0;
    for (int i = 1; i < L; ++i) {
      kp += g * (m.zmid(i - 1) - m.zmid(i)) * v->U.col(i).sum();
      ki += v->U.col(i).dot(v->SP.col(i));
    }
    for (int k = 0; k < L; ++k) pk -= g * m.zmid(k) * (v->U.col(k + 1) - v->U.col(k)).sum();
    for (int i = 1; i < L; ++i) ik += v->F.col(i).dot(v->pi_w.col(i) - v->pi_w.col(i - 1));
    x.K2P += kp;
    x.P2K += pk;
    x.K2I += ki;
    x.I2K += ik;
    x.vpow_KP = kp;
    x.vpow_PI = ki;
  }
  return x;
}

double relative_balance(double a, double b) {
  if (a == 0.0 && b == 0.0) return 0.0;
  return std::abs(a + b) / std::abs(a);
}

double bracket_audit(const Thermo& th, const Horizontal& H, const Vertical& V, const State& s) {
  HorizontalDiag hd;
  VerticalDiag vd;
  HTendency ht;
  VTendency vt;
  H.tendency(s, ht, &hd);
  V.tendency(s, vt, &vd);
  const Exchanges x = exchanges(th, &hd, &vd);
  const Assembly& A = th.assembly();
  const int N1 = A.n_edges();
  double rot = 0.0;
  for (int k = 0; k < A.mesh().nlev(); ++k) {
    const Eigen::VectorXd uk = s.u.segment(static_cast<Eigen::Index>(N1) * k, N1);
    rot += uk.dot(H.rotation(uk, k));
  }
  const double scale = std::max({std::abs(x.K2P), std::abs(x.K2I), std::abs(x.P2K), std::abs(x.I2K)});
  if (scale == 0.0) return std::abs(rot);
  return (std::abs(x.K2P + x.P2K) + std::abs(x.K2I + x.I2K) + std::abs(rot)) / scale;
}

LedgerWriter::LedgerWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) fail(ErrorKind::Format, "cannot open ledger file " + path);
  out_ << header() << '\n';
}

void LedgerWriter::write(const LedgerRow& r) {
  const double vals[] = {r.t, r.e.K, r.e.P, r.e.I, r.x.K2P, r.x.P2K, r.x.K2I, r.x.I2K, r.x.vpow_PI, r.x.vpow_KP};
  for (double v : vals)
    if (!std::isfinite(v)) fail(ErrorKind::Divergence, "non-finite ledger entry at t = " + fmt::format("{}", r.t));
  out_ << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", vals[0],
                      vals[1], vals[2], vals[3], vals[4], vals[5], vals[6], vals[7], vals[8], vals[9]);
  out_.flush();
}

}  // namespace mimetic
