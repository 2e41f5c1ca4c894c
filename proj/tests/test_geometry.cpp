#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "mimetic/errors.hpp"
#include "mimetic/geometry.hpp"

using namespace mimetic;

namespace {

MeshSpec sphere_spec(int n, int p, double r = 6371220.0) {
  MeshSpec s;
  s.backend = Backend::Sphere;
  s.n = n;
  s.p = p;
  s.radius = r;
  s.z = uniform_levels(2, 1000.0);
  return s;
}

MeshSpec plane_spec(int nx, int ny, int p, double Lx, double Ly) {
  MeshSpec s;
  s.backend = Backend::Plane;
  s.n = nx;
  s.ny = ny;
  s.p = p;
  s.Lx = Lx;
  s.Ly = Ly;
  s.z = uniform_levels(3, 3000.0);
  return s;
}

}  // namespace

TEST_CASE("sphere surface area") {
  const double r = 6371220.0;
  Mesh m(sphere_spec(6, 3, r));
  const double exact = 4.0 * std::numbers::pi * r * r;
  CHECK(std::abs(m.area() - exact) / exact < 1e-8);
  CHECK(m.nelem() == 216);
  CHECK(m.topo().n_nodes == 6 * 18 * 18 + 2);
}

TEST_CASE("plane Jacobian is diagonal") {
  Mesh m(plane_spec(3, 2, 2, 3000.0, 4000.0));
  for (int e = 0; e < m.nelem(); ++e)
    for (int q = 0; q < m.nqp(); ++q) {
      const auto& J = m.Jh(e, q);
      CHECK(J(0, 0) == doctest::Approx(500.0));
      CHECK(J(1, 1) == doctest::Approx(1000.0));
      CHECK(J(0, 1) == 0.0);
      CHECK(J(1, 0) == 0.0);
      CHECK(m.sin_lat(e, q) == 0.0);
    }
  CHECK(m.area() == doctest::Approx(1.2e7));
  const auto pt = m.map_point(4, -1.0, 1.0, 1.0, 1);
  CHECK(pt[0] == doctest::Approx(1000.0));
  CHECK(pt[1] == doctest::Approx(4000.0));
  CHECK(pt[2] == doctest::Approx(2000.0));
}

TEST_CASE("sphere tangents match finite differences") {
  Mesh m(sphere_spec(2, 3, 1.0));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-0.9, 0.9);
  std::uniform_int_distribution<int> E(0, m.nelem() - 1);
  const double eps = 1e-6;
  for (int t = 0; t < 50; ++t) {
    const int e = E(rng);
    const double xi = U(rng), eta = U(rng);
    Eigen::Vector3d X, a, b, Xp, Xm, d1, d2;
    m.tangents(e, xi, eta, X, a, b);
    CHECK(std::abs(X.norm() - 1.0) < 1e-14);
    m.tangents(e, xi + eps, eta, Xp, d1, d2);
    m.tangents(e, xi - eps, eta, Xm, d1, d2);
    CHECK(((Xp - Xm) / (2 * eps) - a).norm() < 1e-8);
    m.tangents(e, xi, eta + eps, Xp, d1, d2);
    m.tangents(e, xi, eta - eps, Xm, d1, d2);
    CHECK(((Xp - Xm) / (2 * eps) - b).norm() < 1e-8);
    CHECK(std::abs(a.dot(X)) < 1e-14);
    CHECK(std::abs(b.dot(X)) < 1e-14);
    // outward orientation: a x b points along X
    CHECK(a.cross(b).dot(X) > 0.0);
  }
}

TEST_CASE("shared GLL points coincide across elements and panels") {
  for (int n : {1, 2, 3}) {
    Mesh m(sphere_spec(n, 3, 1.0));
    const auto& T = m.topo();
    std::vector<Eigen::Vector3d> pos(T.n_nodes);
    std::vector<int> seen(T.n_nodes, 0);
    const auto& x = m.quad().x;
    for (int e = 0; e < m.nelem(); ++e)
      for (int j = 0; j <= m.p(); ++j)
        for (int i = 0; i <= m.p(); ++i) {
          Eigen::Vector3d X, a, b;
          m.tangents(e, x[i], x[j], X, a, b);
          const int g = T.node[e * T.nnode_loc() + i + j * (m.p() + 1)];
          if (seen[g]++) CHECK((pos[g] - X).norm() < 1e-14);
          else pos[g] = X;
        }
  }
}

TEST_CASE("east/north frame and latitude") {
  Mesh m(sphere_spec(2, 2, 1.0));
  for (int e = 0; e < m.nelem(); ++e)
    for (int q = 0; q < m.nqp(); ++q) {
      const Eigen::Vector3d X = m.X(e, q);
      Eigen::Vector3d east, north;
      m.east_north(e, X, east, north);
      CHECK(std::abs(east.norm() - 1.0) < 1e-14);
      CHECK(std::abs(north.norm() - 1.0) < 1e-14);
      CHECK(std::abs(east.dot(north)) < 1e-14);
      CHECK(std::abs(east.dot(X)) < 1e-14);
      CHECK(east.cross(north).dot(X) > 0.0);
      CHECK(m.sin_lat(e, q) == doctest::Approx(X.z()));
      CHECK(m.det(e, q) > 0.0);
      // G is the Gram matrix of the tangents
      Eigen::Vector3d Y, a, b;
      m.tangents(e, m.quad().x[q % m.nq()], m.quad().x[q / m.nq()], Y, a, b);
      CHECK(std::abs(m.G(e, q)(0, 0) - a.dot(a)) < 1e-14);
      CHECK(std::abs(m.G(e, q)(0, 1) - a.dot(b)) < 1e-14);
      CHECK(std::abs(m.det(e, q) - a.cross(b).norm()) < 1e-14);
    }
}

TEST_CASE("metric factors and Piola duality") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    PointJacobian J;
    J.Jh << 2.0 + U(rng), 0.3 * U(rng), 0.3 * U(rng), 1.5 + U(rng) * 0.5;
    J.z_zeta = 1.0 + 0.5 * U(rng);
    const double d = J.det();
    CHECK(std::abs(J.full().determinant() - d) < 1e-12);
    // W-parallel and U-parallel transforms are inverse-transposes up to det:
    // (J^-T a) . (J b / d) = a.b / d
    const Eigen::Matrix2d Wf = metric_factor(MetricSpace::Wpar, J);
    const Eigen::Matrix2d Uf = metric_factor(MetricSpace::Upar, J);
    const Eigen::Matrix2d G = J.Jh.transpose() * J.Jh;
    CHECK((Wf * G - Eigen::Matrix2d::Identity()).norm() < 1e-12);
    CHECK((Uf * d * d - G).norm() < 1e-12);
    const Eigen::Vector2d a(U(rng), U(rng)), b(U(rng), U(rng));
    const Eigen::Vector2d Wa = J.Jh.transpose().inverse() * a;
    const Eigen::Vector2d Ub = J.Jh * b / J.Jh.determinant();
    CHECK(std::abs(Wa.dot(Ub) - a.dot(b) / J.Jh.determinant()) < 1e-12);
    CHECK(metric_factor(MetricSpace::Q, J)(0, 0) == doctest::Approx(1.0 / (d * d)));
    CHECK(metric_factor(MetricSpace::Wperp, J)(0, 0) == doctest::Approx(1.0 / (J.z_zeta * J.z_zeta)));
    const double dh = J.Jh.determinant();
    CHECK(metric_factor(MetricSpace::Uperp, J)(0, 0) == doctest::Approx(1.0 / (dh * dh)));
    CHECK(metric_factor(MetricSpace::UperpQ, J)(0, 0) == doctest::Approx(J.z_zeta / (d * d)));
  }
}

TEST_CASE("mesh validation") {
  MeshSpec s = sphere_spec(2, 2);
  s.z = {0.0, 100.0, 100.0};
  CHECK_THROWS_AS(Mesh{s}, Error);
  s.z = {10.0, 100.0};
  CHECK_THROWS_AS(Mesh{s}, Error);
  Mesh m(sphere_spec(2, 2));
  CHECK_THROWS_AS(m.map_point(0, 1.5, 0.0, 0.0, 0), Error);
  CHECK_THROWS_AS(m.map_point(0, 0.0, 0.0, 0.0, 5), Error);
  Eigen::Vector3d X, a, b;
  CHECK_THROWS_AS(m.tangents(99, 0.0, 0.0, X, a, b), Error);
  CHECK_THROWS_AS(uniform_levels(0, 1.0), Error);
  const auto ll = m.map_point(0, 0.0, 0.0, -1.0, 1);
  CHECK(ll[2] == doctest::Approx(500.0));
}
