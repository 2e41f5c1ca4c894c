#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "mimetic/basis1d.hpp"
#include "mimetic/errors.hpp"

using namespace mimetic;

namespace {

// Monomial coefficients of the nodal interpolant, obtained from a Vandermonde
// solve; differentiated term by term as an independent derivative oracle.
double monomial_derivative(const std::vector<double>& nodes, const std::vector<double>& q, double x) {
  const int n = static_cast<int>(nodes.size());
  Eigen::MatrixXd V(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) V(i, k) = std::pow(nodes[i], k);
    b[i] = q[i];
  }
  Eigen::VectorXd c = V.fullPivLu().solve(b);
  double d = 0.0;
  for (int k = 1; k < n; ++k) d += k * c[k] * std::pow(x, k - 1);
  return d;
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  const Quadrature Q = gll_quadrature(20);
  double s = 0.0;
  for (int i = 0; i < Q.size(); ++i) s += Q.w[i] * f(0.5 * (a + b) + 0.5 * (b - a) * Q.x[i]);
  return 0.5 * (b - a) * s;
}

}  // namespace

TEST_CASE("gll nodes: endpoints, ordering and known values") {
  CHECK(gll_nodes(1) == std::vector<double>{-1.0, 1.0});
  const auto n2 = gll_nodes(2);
  CHECK(n2[1] == 0.0);
  // p=3 oracle: bisection on dL3 = (15x^2 - 3)/2.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (lo + hi);
    ((15 * m * m - 3) < 0 ? lo : hi) = m;
  }
  const auto n3 = gll_nodes(3);
  CHECK(n3[2] == doctest::Approx(lo).epsilon(1e-15));
  CHECK(n3[2] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-15));
  CHECK(n3[1] == -n3[2]);
  for (int p = 1; p <= 16; ++p) {
    const auto x = gll_nodes(p);
    CHECK(x.front() == -1.0);
    CHECK(x.back() == 1.0);
    for (int i = 1; i <= p; ++i) CHECK(x[i] > x[i - 1]);
    for (int i = 1; i < p; ++i) {
      double L, dL;
      legendre(p, x[i], L, dL);
      CHECK(std::abs(dL) <= 1e-13 * std::max(1.0, std::abs(L) * p * p));
    }
  }
  CHECK_THROWS_AS(gll_nodes(0), Error);
  CHECK_THROWS_AS(gll_nodes(-2), Error);
}

TEST_CASE("nodal basis: Kronecker property and partition of unity") {
  for (int p = 1; p <= 8; ++p) {
    NodalBasis B(p);
    for (int i = 0; i <= p; ++i)
      for (int j = 0; j <= p; ++j) CHECK(std::abs(B.eval(i, B.nodes()[j]) - (i == j ? 1.0 : 0.0)) <= 1e-14);
    double s = 0.0;
    for (int i = 0; i <= p; ++i) s += B.eval(i, 0.3);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(NodalBasis(1).eval(0, 0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(NodalBasis(2).eval(3, 0.0), Error);
  CHECK_THROWS_AS(NodalBasis(2).eval(-1, 0.0), Error);
}

TEST_CASE("edge basis: histopolation property") {
  NodalBasis B1(1);
  EdgeBasis E1(B1);
  for (double x : {-1.0, -0.3, 0.0, 0.7, 1.0}) CHECK(E1.eval(1, x) == doctest::Approx(0.5).epsilon(1e-15));
  for (int p = 1; p <= 8; ++p) {
    NodalBasis B(p);
    EdgeBasis E(B);
    const auto& x = B.nodes();
    for (int i = 1; i <= p; ++i) {
      for (int j = 1; j <= p; ++j) {
        const double v = integrate([&](double s) { return E.eval(i, s); }, x[j - 1], x[j]);
        CHECK(std::abs(v - (i == j ? 1.0 : 0.0)) <= 1e-12);
      }
      CHECK(integrate([&](double s) { return E.eval(i, s); }, -1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(EdgeBasis(NodalBasis(3)).eval(0, 0.0), Error);
  CHECK_THROWS_AS(EdgeBasis(NodalBasis(3)).eval(4, 0.0), Error);
}

TEST_CASE("diff_to_edge: examples and commuting property") {
  CHECK(diff_to_edge({2.0, 2.0, 2.0}) == std::vector<double>{0.0, 0.0});
  const auto x = gll_nodes(4);
  const auto g = diff_to_edge(x);
  for (int i = 1; i <= 4; ++i) CHECK(g[i - 1] == x[i] - x[i - 1]);

  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int p = 1; p <= 6; ++p) {
    NodalBasis B(p);
    EdgeBasis E(B);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> q(p + 1);
      for (auto& v : q) v = U(rng);
      const auto gg = diff_to_edge(q);
      for (int s = 0; s < 50; ++s) {
        const double xi = U(rng);
        double lhs = 0.0;
        for (int i = 1; i <= p; ++i) lhs += gg[i - 1] * E.eval(i, xi);
        worst = std::max(worst, std::abs(lhs - monomial_derivative(B.nodes(), q, xi)));
      }
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("gll quadrature") {
  const auto Q2 = gll_quadrature(2);
  CHECK(Q2.x == std::vector<double>{-1.0, 1.0});
  CHECK(Q2.w[0] == doctest::Approx(1.0));
  CHECK(Q2.w[1] == doctest::Approx(1.0));
  for (int q = 2; q <= 8; ++q) {
    const auto Q = gll_quadrature(q);
    double s = 0.0;
    for (double w : Q.w) {
      CHECK(w > 0.0);
      s += w;
    }
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * q - 3; ++k) {
      double v = 0.0;
      for (int i = 0; i < q; ++i) v += Q.w[i] * std::pow(Q.x[i], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(std::abs(v - exact) <= 1e-13);
    }
  }
  const auto Q3 = gll_quadrature(3);
  double v = 0.0;
  for (int i = 0; i < 3; ++i) v += Q3.w[i] * Q3.x[i] * Q3.x[i];
  CHECK(v == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(gll_quadrature(1), Error);
}
