#include "mimetic/basis1d.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mimetic/errors.hpp"

namespace mimetic {

void legendre(int n, double x, double& L, double& dL) {
  if (n == 0) {
    L = 1.0;
    dL = 0.0;
    return;
  }
  double l0 = 1.0, l1 = x;
  double d0 = 0.0, d1 = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double l2 = ((2.0 * k - 1.0) * x * l1 - (k - 1.0) * l0) / k;
    const double d2 = d0 + (2.0 * k - 1.0) * l1;
    l0 = l1;
    l1 = l2;
    d0 = d1;
    d1 = d2;
  }
  L = l1;
  dL = d1;
}

std::vector<double> gll_nodes(int p) {
  if (p < 1) fail(ErrorKind::InvalidArgument, "gll_nodes: invalid degree " + std::to_string(p));
  std::vector<double> x(p + 1);
  x[0] = -1.0;
  x[p] = 1.0;
  for (int i = 1; i < p; ++i) {
    // Chebyshev-Gauss-Lobatto guess, then Newton on dL_p using the Legendre ODE for d2L_p.
    double xi = -std::cos(std::numbers::pi * i / p);
    for (int it = 0; it < 100; ++it) {
      double L, dL;
      legendre(p, xi, L, dL);
      const double d2L = (2.0 * xi * dL - p * (p + 1.0) * L) / (1.0 - xi * xi);
      const double step = dL / d2L;
      xi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    x[i] = xi;
  }
  // Symmetrize so mirrored nodes are bitwise negatives of each other.
  for (int i = 0; i <= p / 2; ++i) {
    const double a = 0.5 * (x[p - i] - x[i]);
    x[i] = -a;
    x[p - i] = a;
  }
  if (p % 2 == 0) x[p / 2] = 0.0;
  return x;
}

Quadrature gll_quadrature(int q) {
  if (q < 2) fail(ErrorKind::InvalidArgument, "gll_quadrature: need at least 2 points, got " + std::to_string(q));
  const int p = q - 1;
  Quadrature Q;
  Q.x = gll_nodes(p);
  Q.w.resize(q);
  for (int i = 0; i < q; ++i) {
    double L, dL;
    legendre(p, Q.x[i], L, dL);
    Q.w[i] = 2.0 / (p * (p + 1.0) * L * L);
  }
  return Q;
}

NodalBasis::NodalBasis(int p) : p_(p), nodes_(gll_nodes(p)), denom_(p + 1, 1.0) {
  for (int i = 0; i <= p_; ++i)
    for (int m = 0; m <= p_; ++m)
      if (m != i) denom_[i] *= nodes_[i] - nodes_[m];
}

double NodalBasis::eval(int i, double xi) const {
  if (i < 0 || i > p_) fail(ErrorKind::InvalidArgument, "eval_nodal: index out of range");
  double num = 1.0;
  for (int m = 0; m <= p_; ++m)
    if (m != i) num *= xi - nodes_[m];
  return num / denom_[i];
}

double NodalBasis::deriv(int i, double xi) const {
  if (i < 0 || i > p_) fail(ErrorKind::InvalidArgument, "deriv_nodal: index out of range");
  double sum = 0.0;
  for (int m = 0; m <= p_; ++m) {
    if (m == i) continue;
    double prod = 1.0;
    for (int k = 0; k <= p_; ++k)
      if (k != i && k != m) prod *= xi - nodes_[k];
    sum += prod;
  }
  return sum / denom_[i];
}

void NodalBasis::eval_all(double xi, double* out) const {
  for (int i = 0; i <= p_; ++i) out[i] = eval(i, xi);
}

void NodalBasis::deriv_all(double xi, double* out) const {
  for (int i = 0; i <= p_; ++i) out[i] = deriv(i, xi);
}

double EdgeBasis::eval(int i, double xi) const {
  const int p = nodal_.degree();
  if (i < 1 || i > p) fail(ErrorKind::InvalidArgument, "eval_edge: index out of range");
  double s = 0.0;
  for (int k = 0; k < i; ++k) s -= nodal_.deriv(k, xi);
  return s;
}

void EdgeBasis::eval_all(double xi, double* out) const {
  const int p = nodal_.degree();
  double s = 0.0;
  for (int k = 0; k < p; ++k) {
    s -= nodal_.deriv(k, xi);
    out[k] = s;
  }
}

std::vector<double> diff_to_edge(const std::vector<double>& q) {
  std::vector<double> g(q.empty() ? 0 : q.size() - 1);
  for (std::size_t i = 1; i < q.size(); ++i) g[i - 1] = q[i] - q[i - 1];
  return g;
}

}  // namespace mimetic
