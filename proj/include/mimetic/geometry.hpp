#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "mimetic/basis1d.hpp"
#include "mimetic/derham.hpp"

namespace mimetic {

enum class Backend { Plane, Sphere };

struct MeshSpec {
  Backend backend = Backend::Sphere;
  int n = 4;            // elements per panel side (sphere) or along x (plane)
  int ny = 4;           // elements along y (plane only)
  int p = 3;            // horizontal degree
  double radius = 6371220.0;  // already divided by any reduction factor
  double Lx = 1.0, Ly = 1.0;  // plane extents, m
  std::vector<double> z;      // layer interfaces, z[0] = 0 < ... < z[nlev] = z_top
};

// Uniform layer interfaces on [0, z_top].
std::vector<double> uniform_levels(int nlev, double z_top);

// Space tags accepted by metric_factor.
enum class MetricSpace { Wpar, Wperp, Upar, Uperp, Q, UperpQ };

// Per-point Jacobian data for the flat-layer map: horizontal 2x2 block and z_zeta.
struct PointJacobian {
  Eigen::Matrix2d Jh;
  double z_zeta = 1.0;
  Eigen::Matrix3d full() const;
  double det() const { return Jh.determinant() * z_zeta; }
};

// Pointwise Piola factors. Vector spaces return a 2x2 matrix, scalar spaces a
// 1x1 matrix.
Eigen::MatrixXd metric_factor(MetricSpace s, const PointJacobian& J);

class Mesh {
 public:
  explicit Mesh(const MeshSpec& spec);

  Backend backend() const { return spec_.backend; }
  const MeshSpec& spec() const { return spec_; }
  int p() const { return spec_.p; }
  int nq() const { return spec_.p + 1; }            // quadrature points per direction
  int nqp() const { return nq() * nq(); }           // per element
  int nelem() const { return topo_.nelem; }
  int nlev() const { return static_cast<int>(spec_.z.size()) - 1; }
  double z(int i) const { return spec_.z[i]; }
  double h(int k) const { return spec_.z[k + 1] - spec_.z[k]; }
  double zmid(int k) const { return 0.5 * (spec_.z[k] + spec_.z[k + 1]); }
  double z_top() const { return spec_.z.back(); }
  double radius() const { return spec_.radius; }

  const Topology2D& topo() const { return topo_; }
  const Incidence2D& inc2d() const { return inc_; }
  const Quadrature& quad() const { return quad_; }
  const NodalBasis& nodal() const { return nodal_; }
  // e_i(x_a) stored at [(i-1) * nq + a]
  double edge_at(int i, int a) const { return edge_tab_[(i - 1) * nq() + a]; }

  // Geometry at an arbitrary reference point: physical position and the two
  // tangent vectors (3D; the plane lives in z = 0).
  void tangents(int e, double xi, double eta, Eigen::Vector3d& X, Eigen::Vector3d& dxi,
                Eigen::Vector3d& deta) const;
  // Unit outward normal (sphere) or +z (plane).
  Eigen::Vector3d up(const Eigen::Vector3d& X) const;
  // Local east and north unit vectors (plane: x and y).
  void east_north(int e, const Eigen::Vector3d& X, Eigen::Vector3d& east, Eigen::Vector3d& north) const;

  // (lon, lat, z) on the sphere, (x, y, z) on the plane.
  std::array<double, 3> map_point(int e, double xi, double eta, double zeta, int layer) const;
  PointJacobian jacobian(int e, double xi, double eta, int layer) const;

  // Cached values at quadrature point q = a + b*nq of element e.
  double det(int e, int q) const { return det_[e * nqp() + q]; }
  const Eigen::Matrix2d& G(int e, int q) const { return G_[e * nqp() + q]; }
  const Eigen::Matrix2d& Jh(int e, int q) const { return J_[e * nqp() + q]; }
  double sin_lat(int e, int q) const { return sinlat_[e * nqp() + q]; }
  const Eigen::Vector3d& X(int e, int q) const { return X_[e * nqp() + q]; }
  double weight(int q) const { return quad_.w[q % nq()] * quad_.w[q / nq()]; }

  // Horizontal area (sum of det * weights over all elements).
  double area() const;
  // Average spacing between GLL nodes, sqrt(area / number of distinct nodes).
  double mean_spacing() const;

 private:
  MeshSpec spec_;
  Topology2D topo_;
  Incidence2D inc_;
  Quadrature quad_;
  NodalBasis nodal_;
  std::vector<double> edge_tab_;
  std::vector<double> det_, sinlat_;
  std::vector<Eigen::Matrix2d> G_, J_;
  std::vector<Eigen::Vector3d> X_;
};

}  // namespace mimetic
