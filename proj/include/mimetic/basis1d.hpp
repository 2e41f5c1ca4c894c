#pragma once

#include <vector>

namespace mimetic {

struct Quadrature {
  std::vector<double> x;
  std::vector<double> w;
  int size() const { return static_cast<int>(x.size()); }
};

// Legendre polynomial L_n and its first derivative at x.
void legendre(int n, double x, double& L, double& dL);

// p+1 Gauss-Lobatto-Legendre nodes, ascending, endpoints exactly -1 and +1.
std::vector<double> gll_nodes(int p);

// q-point GLL rule on [-1,1]; exact for degree <= 2q-3.
Quadrature gll_quadrature(int q);

class NodalBasis {
 public:
  explicit NodalBasis(int p);

  int degree() const { return p_; }
  const std::vector<double>& nodes() const { return nodes_; }

  double eval(int i, double xi) const;
  double deriv(int i, double xi) const;
  void eval_all(double xi, double* out) const;
  void deriv_all(double xi, double* out) const;

 private:
  int p_;
  std::vector<double> nodes_;
  std::vector<double> denom_;  // prod_{m != i} (x_i - x_m)
};

// Histopolant polynomials e_1..e_p built from the derivatives of the nodal basis.
class EdgeBasis {
 public:
  explicit EdgeBasis(const NodalBasis& nodal) : nodal_(nodal) {}

  int degree() const { return nodal_.degree(); }
  // i in 1..p
  double eval(int i, double xi) const;
  // out[i-1] = e_i(xi)
  void eval_all(double xi, double* out) const;

 private:
  NodalBasis nodal_;
};

// g_i = q_i - q_{i-1}, i = 1..p (the 1D incidence action).
std::vector<double> diff_to_edge(const std::vector<double>& q);

}  // namespace mimetic
