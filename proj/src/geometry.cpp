#include "mimetic/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "mimetic/errors.hpp"

namespace mimetic {

std::vector<double> uniform_levels(int nlev, double z_top) {
  if (nlev < 1 || !(z_top > 0.0)) fail(ErrorKind::InvalidArgument, "uniform_levels: need nlev >= 1 and z_top > 0");
  std::vector<double> z(nlev + 1);
  for (int k = 0; k <= nlev; ++k) z[k] = z_top * k / nlev;
  z[nlev] = z_top;
  return z;
}

Eigen::Matrix3d PointJacobian::full() const {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  J.topLeftCorner<2, 2>() = Jh;
  J(2, 2) = z_zeta;
  return J;
}

Eigen::MatrixXd metric_factor(MetricSpace s, const PointJacobian& J) {
  const Eigen::Matrix2d G = J.Jh.transpose() * J.Jh;
  const double dh = J.Jh.determinant();
  const double d = dh * J.z_zeta;
  Eigen::MatrixXd out(1, 1);
  switch (s) {
    case MetricSpace::Wpar: return G.inverse();
    case MetricSpace::Upar: return G / (d * d);
    case MetricSpace::Wperp: out(0, 0) = 1.0 / (J.z_zeta * J.z_zeta); return out;
    case MetricSpace::Uperp: out(0, 0) = J.z_zeta * J.z_zeta / (d * d); return out;
    case MetricSpace::Q: out(0, 0) = 1.0 / (d * d); return out;
    case MetricSpace::UperpQ: out(0, 0) = (J.z_zeta / d) * (1.0 / d); return out;
  }
  fail(ErrorKind::InvalidArgument, "metric_factor: unknown space");
}

namespace {

Eigen::Vector3d to_vec(const IVec3& a) { return Eigen::Vector3d(double(a[0]), double(a[1]), double(a[2])); }

}  // namespace

Mesh::Mesh(const MeshSpec& spec)
    : spec_(spec), quad_(gll_quadrature(spec.p + 1)), nodal_(spec.p) {
  if (spec_.p < 1) fail(ErrorKind::Config, "mesh: degree must be >= 1");
  if (spec_.n < 1 || (spec_.backend == Backend::Plane && spec_.ny < 1))
    fail(ErrorKind::Config, "mesh: element counts must be >= 1");
  if (spec_.z.size() < 2) fail(ErrorKind::Config, "mesh: need at least one layer");
  if (spec_.z.front() != 0.0) fail(ErrorKind::Config, "mesh: lowest interface must be z = 0");
  for (size_t k = 1; k < spec_.z.size(); ++k)
    if (!(spec_.z[k] > spec_.z[k - 1])) fail(ErrorKind::Config, "mesh: interfaces must increase strictly");
  if (spec_.backend == Backend::Sphere && !(spec_.radius > 0.0)) fail(ErrorKind::Config, "mesh: radius must be > 0");
  if (spec_.backend == Backend::Plane && !(spec_.Lx > 0.0 && spec_.Ly > 0.0))
    fail(ErrorKind::Config, "mesh: plane extents must be > 0");

  const int p = spec_.p;
  topo_ = build_topology(spec_.backend == Backend::Sphere ? cube_lattice(spec_.n, p)
                                                           : plane_lattice(spec_.n, spec_.ny, p),
                         p);
  inc_ = assemble_incidence_2d(topo_);
  for (int e = 0; e < topo_.nelem; ++e)
    for (int l = 0; l < topo_.ncell_loc(); ++l)
      if (topo_.cell[e * topo_.ncell_loc() + l] != e * topo_.ncell_loc() + l)
        fail(ErrorKind::Domain, "mesh: cell numbering is not element-contiguous");

  const int nq = this->nq();
  EdgeBasis eb(nodal_);
  edge_tab_.resize(p * nq);
  for (int i = 1; i <= p; ++i)
    for (int a = 0; a < nq; ++a) edge_tab_[(i - 1) * nq + a] = eb.eval(i, quad_.x[a]);

  const size_t n = static_cast<size_t>(nelem()) * nqp();
  det_.resize(n);
  sinlat_.resize(n);
  G_.resize(n);
  J_.resize(n);
  X_.resize(n);
  for (int e = 0; e < nelem(); ++e)
    for (int b = 0; b < nq; ++b)
      for (int a = 0; a < nq; ++a) {
        const size_t idx = static_cast<size_t>(e) * nqp() + a + b * nq;
        Eigen::Vector3d X, dxi, deta, east, north;
        tangents(e, quad_.x[a], quad_.x[b], X, dxi, deta);
        east_north(e, X, east, north);
        Eigen::Matrix2d J;
        J << east.dot(dxi), east.dot(deta), north.dot(dxi), north.dot(deta);
        J_[idx] = J;
        G_[idx] = J.transpose() * J;
        det_[idx] = J.determinant();
        if (!(det_[idx] > 0.0)) fail(ErrorKind::Domain, "mesh: non-positive Jacobian in element " + std::to_string(e));
        X_[idx] = X;
        sinlat_[idx] = spec_.backend == Backend::Sphere ? X.z() / X.norm() : 0.0;
      }
}

void Mesh::tangents(int e, double xi, double eta, Eigen::Vector3d& X, Eigen::Vector3d& dxi,
                    Eigen::Vector3d& deta) const {
  if (e < 0 || e >= nelem()) fail(ErrorKind::InvalidArgument, "mesh: element id out of range");
  const int n = spec_.n;
  if (spec_.backend == Backend::Plane) {
    const double dx = spec_.Lx / n, dy = spec_.Ly / spec_.ny;
    const int ex = e % n, ey = e / n;
    X = Eigen::Vector3d((ex + 0.5 * (xi + 1.0)) * dx, (ey + 0.5 * (eta + 1.0)) * dy, 0.0);
    dxi = Eigen::Vector3d(0.5 * dx, 0.0, 0.0);
    deta = Eigen::Vector3d(0.0, 0.5 * dy, 0.0);
    return;
  }
  const int panel = e / (n * n), r = e % (n * n), ex = r % n, ey = r / n;
  const auto F = cube_panel_frame(panel);
  const Eigen::Vector3d e1 = to_vec(F[0]), e2 = to_vec(F[1]), nv = to_vec(F[2]);
  const double quarter = std::numbers::pi / 4.0;
  const double dal = std::numbers::pi / (4.0 * n);  // d(alpha)/d(xi)
  const double al = -quarter + (ex + 0.5 * (xi + 1.0)) * (2.0 * quarter / n);
  const double be = -quarter + (ey + 0.5 * (eta + 1.0)) * (2.0 * quarter / n);
  const double ta = std::tan(al), tb = std::tan(be);
  const Eigen::Vector3d v = nv + ta * e1 + tb * e2;
  const double vn = v.norm();
  const Eigen::Vector3d vh = v / vn;
  const double R = spec_.radius;
  X = R * vh;
  auto proj = [&](const Eigen::Vector3d& t) { return (t - vh * vh.dot(t)) * (R / vn); };
  dxi = proj(e1 * (1.0 + ta * ta)) * dal;
  deta = proj(e2 * (1.0 + tb * tb)) * dal;
}

Eigen::Vector3d Mesh::up(const Eigen::Vector3d& X) const {
  if (spec_.backend == Backend::Plane) return Eigen::Vector3d::UnitZ();
  return X.normalized();
}

void Mesh::east_north(int e, const Eigen::Vector3d& X, Eigen::Vector3d& east, Eigen::Vector3d& north) const {
  if (spec_.backend == Backend::Plane) {
    east = Eigen::Vector3d::UnitX();
    north = Eigen::Vector3d::UnitY();
    return;
  }
  const Eigen::Vector3d r = X.normalized();
  Eigen::Vector3d t = Eigen::Vector3d::UnitZ().cross(r);
  if (t.norm() < 1e-12) {
    // at a pole east is undefined; use the panel's first axis
    const int n = spec_.n;
    const Eigen::Vector3d e1 = to_vec(cube_panel_frame(e / (n * n))[0]);
    t = e1 - e1.dot(r) * r;
  }
  east = t.normalized();
  north = r.cross(east);
}

std::array<double, 3> Mesh::map_point(int e, double xi, double eta, double zeta, int layer) const {
  for (double v : {xi, eta, zeta})
    if (v < -1.0 || v > 1.0) fail(ErrorKind::Domain, "map_point: coordinate outside [-1,1]");
  if (layer < 0 || layer >= nlev()) fail(ErrorKind::InvalidArgument, "map_point: layer out of range");
  Eigen::Vector3d X, a, b;
  tangents(e, xi, eta, X, a, b);
  const double z = spec_.z[layer] + 0.5 * (zeta + 1.0) * h(layer);
  if (spec_.backend == Backend::Plane) return {X.x(), X.y(), z};
  return {std::atan2(X.y(), X.x()), std::asin(std::clamp(X.z() / X.norm(), -1.0, 1.0)), z};
}

PointJacobian Mesh::jacobian(int e, double xi, double eta, int layer) const {
  if (layer < 0 || layer >= nlev()) fail(ErrorKind::InvalidArgument, "jacobian: layer out of range");
  Eigen::Vector3d X, dxi, deta, east, north;
  tangents(e, xi, eta, X, dxi, deta);
  east_north(e, X, east, north);
  PointJacobian J;
  J.Jh << east.dot(dxi), east.dot(deta), north.dot(dxi), north.dot(deta);
  J.z_zeta = 0.5 * h(layer);
  return J;
}

double Mesh::area() const {
  double s = 0.0;
  for (int e = 0; e < nelem(); ++e)
    for (int q = 0; q < nqp(); ++q) s += weight(q) * det(e, q);
  return s;
}

double Mesh::mean_spacing() const { return std::sqrt(area() / topo_.n_nodes); }

}  // namespace mimetic
