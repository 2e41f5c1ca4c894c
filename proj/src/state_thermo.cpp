#include "mimetic/state_thermo.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <string>

#include "mimetic/errors.hpp"

namespace mimetic {

double Constants::exner_scale() const { return cp * std::pow(R / p0, kappa_v()); }

State State::zeros(const Assembly& A) {
  const int L = A.mesh().nlev();
  State s;
  s.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(A.n_edges()) * L);
  s.w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(A.n_cells()) * (L + 1));
  s.rho = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(A.n_cells()) * L);
  s.Theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(A.n_cells()) * L);
  return s;
}

void Thermo::exner_weak(const Eigen::VectorXd& Theta, Eigen::VectorXd& pi_w) const {
  const Mesh& m = A_.mesh();
  const int N2 = A_.n_cells(), nc = A_.ncl(), nqp = m.nqp();
  pi_w.resize(Theta.size());
  const double s = c_.exner_scale(), kv = c_.kappa_v();
  std::vector<double> v(nqp);
  for (int k = 0; k < m.nlev(); ++k) {
    const double h = m.h(k);
    for (int e = 0; e < m.nelem(); ++e) {
      const size_t off = static_cast<size_t>(N2) * k + static_cast<size_t>(e) * nc;
      A_.cell_at_quad(Theta.data() + off, v.data());
      for (int q = 0; q < nqp; ++q) {
        const double Th = v[q] / (m.det(e, q) * h);
        if (!(Th > 0.0))
          fail(ErrorKind::Domain, "non-positive Theta in element " + std::to_string(e) + ", layer " + std::to_string(k));
        v[q] = s * std::pow(Th, kv);
      }
      A_.cell_weak(v.data(), pi_w.data() + off);
    }
  }
}

Eigen::VectorXd Thermo::exner_from_weak(const Eigen::VectorXd& pi_w) const {
  const Mesh& m = A_.mesh();
  const int N2 = A_.n_cells();
  Eigen::VectorXd Pi(pi_w.size());
  for (int k = 0; k < m.nlev(); ++k) {
    A_.apply_MC_inv(pi_w.data() + static_cast<size_t>(N2) * k, Pi.data() + static_cast<size_t>(N2) * k);
    Pi.segment(static_cast<Eigen::Index>(N2) * k, N2) *= m.h(k);
  }
  return Pi;
}

Eigen::VectorXd Thermo::exner(const Eigen::VectorXd& Theta) const {
  Eigen::VectorXd pi_w;
  exner_weak(Theta, pi_w);
  return exner_from_weak(pi_w);
}

void Thermo::theta_column(int e, const double* rho_lo, const double* rho_hi, const double* Th_lo,
                          const double* Th_hi, double* out) const {
  const int nc = A_.ncl();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(nc), T = Eigen::VectorXd::Zero(nc);
  if (rho_lo) {
    r += Eigen::Map<const Eigen::VectorXd>(rho_lo, nc);
    T += Eigen::Map<const Eigen::VectorXd>(Th_lo, nc);
  }
  if (rho_hi) {
    r += Eigen::Map<const Eigen::VectorXd>(rho_hi, nc);
    T += Eigen::Map<const Eigen::VectorXd>(Th_hi, nc);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A_.R(r.data()));
  if (llt.info() != Eigen::Success) fail(ErrorKind::Domain, "non-positive density in element " + std::to_string(e));
  Eigen::Map<Eigen::VectorXd>(out, nc) = llt.solve(A_.R() * T);
}

void Thermo::theta(const Eigen::VectorXd& rho, const Eigen::VectorXd& Theta, Eigen::VectorXd& th) const {
  const Mesh& m = A_.mesh();
  const int L = m.nlev(), N2 = A_.n_cells(), nc = A_.ncl();
  th.resize(static_cast<Eigen::Index>(N2) * (L + 1));
  for (int i = 0; i <= L; ++i)
    for (int e = 0; e < m.nelem(); ++e) {
      const size_t lo = static_cast<size_t>(N2) * (i - 1) + static_cast<size_t>(e) * nc;
      const size_t hi = static_cast<size_t>(N2) * i + static_cast<size_t>(e) * nc;
      theta_column(e, i > 0 ? rho.data() + lo : nullptr, i < L ? rho.data() + hi : nullptr,
                   i > 0 ? Theta.data() + lo : nullptr, i < L ? Theta.data() + hi : nullptr,
                   th.data() + static_cast<size_t>(N2) * i + static_cast<size_t>(e) * nc);
    }
}

void Thermo::density_at_quad(const Eigen::VectorXd& rho, int k, std::vector<double>& out) const {
  const Mesh& m = A_.mesh();
  const int N2 = A_.n_cells(), nc = A_.ncl(), nqp = m.nqp();
  out.resize(static_cast<size_t>(m.nelem()) * nqp);
  const double h = m.h(k);
  for (int e = 0; e < m.nelem(); ++e) {
    double* v = out.data() + static_cast<size_t>(e) * nqp;
    A_.cell_at_quad(rho.data() + static_cast<size_t>(N2) * k + static_cast<size_t>(e) * nc, v);
    for (int q = 0; q < nqp; ++q) v[q] /= m.det(e, q) * h;
  }
}

void Thermo::theta_at_quad(const Eigen::VectorXd& th, int k, std::vector<double>& out) const {
  const Mesh& m = A_.mesh();
  const int N2 = A_.n_cells(), nc = A_.ncl(), nqp = m.nqp();
  out.resize(static_cast<size_t>(m.nelem()) * nqp);
  Eigen::VectorXd avg(nc);
  for (int e = 0; e < m.nelem(); ++e) {
    const size_t lo = static_cast<size_t>(N2) * k + static_cast<size_t>(e) * nc;
    avg = 0.5 * (th.segment(lo, nc) + th.segment(lo + N2, nc));
    double* v = out.data() + static_cast<size_t>(e) * nqp;
    A_.cell_at_quad(avg.data(), v);
  }
}

void Thermo::pressure_at_quad(const Eigen::VectorXd& Theta, int k, std::vector<double>& out) const {
  const Mesh& m = A_.mesh();
  const int N2 = A_.n_cells(), nc = A_.ncl(), nqp = m.nqp();
  out.resize(static_cast<size_t>(m.nelem()) * nqp);
  const double h = m.h(k), gamma = c_.cp / c_.cv();
  for (int e = 0; e < m.nelem(); ++e) {
    double* v = out.data() + static_cast<size_t>(e) * nqp;
    A_.cell_at_quad(Theta.data() + static_cast<size_t>(N2) * k + static_cast<size_t>(e) * nc, v);
    for (int q = 0; q < nqp; ++q) v[q] = c_.p0 * std::pow(c_.R * v[q] / (m.det(e, q) * h) / c_.p0, gamma);
  }
}

double Thermo::total_mass(const Eigen::VectorXd& rho) const { return rho.sum(); }

double Thermo::max_horizontal_speed(const Eigen::VectorXd& u) const {
  const Mesh& m = A_.mesh();
  const int N1 = A_.n_edges(), nqp = m.nqp();
  std::vector<double> ux(nqp), uy(nqp);
  double best = 0.0;
  for (int k = 0; k < m.nlev(); ++k)
    for (int e = 0; e < m.nelem(); ++e) {
      A_.flux_at_quad(e, u.data() + static_cast<size_t>(N1) * k, ux.data(), uy.data());
      for (int q = 0; q < nqp; ++q) {
        const Eigen::Vector2d v = m.Jh(e, q) * Eigen::Vector2d(ux[q], uy[q]) / (m.det(e, q) * m.h(k));
        best = std::max(best, v.norm());
      }
    }
  return best;
}

double Thermo::max_vertical_speed(const Eigen::VectorXd& w) const {
  const Mesh& m = A_.mesh();
  const int N2 = A_.n_cells(), nc = A_.ncl(), nqp = m.nqp();
  std::vector<double> v(nqp);
  double best = 0.0;
  for (int i = 0; i <= m.nlev(); ++i)
    for (int e = 0; e < m.nelem(); ++e) {
      A_.cell_at_quad(w.data() + static_cast<size_t>(N2) * i + static_cast<size_t>(e) * nc, v.data());
      for (int q = 0; q < nqp; ++q) best = std::max(best, std::abs(v[q] / m.det(e, q)));
    }
  return best;
}

void check_finite(const State& s, const char* where) {
  auto chk = [&](const Eigen::VectorXd& v, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!std::isfinite(v[i]))
        fail(ErrorKind::Divergence, std::string(where) + ": non-finite " + name + " at index " + std::to_string(i));
  };
  chk(s.u, "u");
  chk(s.w, "w");
  chk(s.rho, "rho");
  chk(s.Theta, "Theta");
}

}  // namespace mimetic
