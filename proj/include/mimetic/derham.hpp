#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mimetic {

using IncMat = Eigen::SparseMatrix<int, Eigen::RowMajor>;

enum class Space { P, Wpar, Wperp, Upar, Uperp, Q };
const char* space_name(Space s);

// Whole 3D spaces (parallel and perpendicular parts together).
enum class Family { P, W, U, Q };

struct SpaceDims {
  int ph = 0, pv = 0;
  long dP = 0, dW = 0, dU = 0, dQ = 0;
  long dWpar = 0, dWperp = 0, dUpar = 0, dUperp = 0;
};

SpaceDims space_dims(int ph, int pv);

// Local basis numbering on one hexahedron.  Lattice indices follow the basis
// definitions: nodal directions run 0..p, edge directions run 1..p.
struct LocalIndex {
  int ph, pv;
  int P(int i, int j, int k) const { return i + j * (ph + 1) + k * (ph + 1) * (ph + 1); }
  int Wx(int i, int j, int k) const { return (i - 1) + j * ph + k * ph * (ph + 1); }
  int Wy(int i, int j, int k) const {
    return i + (j - 1) * (ph + 1) + k * ph * (ph + 1) + ph * (ph + 1) * (pv + 1);
  }
  int Wz(int i, int j, int k) const {
    return i + j * (ph + 1) + (k - 1) * (ph + 1) * (ph + 1) + 2 * ph * (ph + 1) * (pv + 1);
  }
  int Ux(int i, int j, int k) const { return i + (j - 1) * (ph + 1) + (k - 1) * ph * (ph + 1); }
  int Uy(int i, int j, int k) const { return (i - 1) + j * ph + (k - 1) * ph * (ph + 1) + (ph + 1) * ph * pv; }
  int Uz(int i, int j, int k) const { return (i - 1) + (j - 1) * ph + k * ph * ph + 2 * (ph + 1) * ph * pv; }
  int Q(int i, int j, int k) const { return (i - 1) + (j - 1) * ph + (k - 1) * ph * ph; }
};

struct IncidenceSet {
  IncMat E10;  // W x P
  IncMat E21;  // U x W
  IncMat E32;  // Q x U
  long nWpar = 0;  // rows of E10 / columns of E21 belonging to W-parallel
  long nUpar = 0;  // rows of E21 / columns of E32 belonging to U-parallel

  IncMat E10_par() const;
  IncMat E10_perp() const;
  IncMat E21_parpar() const;
  IncMat E21_parperp() const;
  IncMat E21_perp() const;
  IncMat E21_perpperp() const;  // structurally zero
  IncMat E32_par() const;
  IncMat E32_perp() const;
};

IncidenceSet element_incidence(int ph, int pv);

// Exact integer product; used to check the complex property.
IncMat int_product(const IncMat& A, const IncMat& B);
bool is_zero(const IncMat& A);

Eigen::VectorXd apply_incidence(const IncMat& E, const Eigen::VectorXd& x);

void dump_triplets(const IncMat& E, const std::string& path);

// ---------------------------------------------------------------------------
// Horizontal connectivity.  Elements carry a (p+1)x(p+1) lattice of GLL
// points; each lattice point is identified by an integer 3-vector in doubled
// coordinates so shared points, edges and cells of neighbouring elements
// collide on the same key.

using IVec3 = std::array<long, 3>;

struct LatticeEmbedding {
  int nelem = 0;
  std::function<IVec3(int e, int i, int j)> point;  // unwrapped, even components
  std::function<IVec3(int e)> normal;               // outward normal of the element's panel
  IVec3 period{0, 0, 0};                            // wrap period per component, 0 = none
  bool planar = true;
};

struct Topology2D {
  int p = 0, nelem = 0;
  int n_nodes = 0, n_edges = 0, n_cells = 0;
  // Per-element maps, local orderings:
  //   node: i + j(p+1)
  //   circ: xi-edges (i-1) + j p, then eta-edges p(p+1) + i + (j-1)(p+1)
  //   flux: eta-edges i + (j-1)(p+1), then xi-edges p(p+1) + (i-1) + j p
  //   cell: (i-1) + (j-1) p
  std::vector<int> node, circ, flux, cell;
  std::vector<std::int8_t> circ_sign, flux_sign;

  int nnode_loc() const { return (p + 1) * (p + 1); }
  int nedge_loc() const { return 2 * p * (p + 1); }
  int ncell_loc() const { return p * p; }
};

Topology2D build_topology(const LatticeEmbedding& emb, int p);

// Doubly periodic nx by ny plane; element e = ex + nx*ey.
LatticeEmbedding plane_lattice(int nx, int ny, int p);
// Six-panel cube with n by n elements per panel; element e = panel*n*n + ex + n*ey.
LatticeEmbedding cube_lattice(int n, int p);
// Right-handed frame (e1, e2, outward normal) of each cube panel.
std::array<IVec3, 3> cube_panel_frame(int panel);

// 2D horizontal incidence on the assembled surface.
struct Incidence2D {
  IncMat grad;  // circulation edges x nodes
  IncMat curl;  // cells x circulation edges
  IncMat rot;   // flux edges x nodes (curl of a vertical vector potential)
  IncMat div;   // cells x flux edges
};
Incidence2D assemble_incidence_2d(const Topology2D& topo);

// Global 3D numbering of the horizontal topology extruded over nlev layers of
// vertical degree pv: each space is a 2D entity index plus (2D count) x (vertical index).
struct Grid3D {
  const Topology2D* topo = nullptr;
  int nlev = 1;
  int pv = 1;
  long nP() const;
  long nWpar() const;
  long nWperp() const;
  long nUpar() const;
  long nUperp() const;
  long nQ() const;
};

IncidenceSet assemble_incidence(const Grid3D& grid);

// Appendix-style 2D slice in the x-z plane with nx by nz lowest-order cells.
// Nodes are numbered column-wise (z fastest); parallel (x) blocks come first.
IncidenceSet xz_slice_incidence(int nx, int nz);

// Evaluate a local field at reference point (xi, eta, zeta).  Scalar spaces
// return component 0; vector spaces return reference components (x, y, z).
std::array<double, 3> eval_local(Family f, int ph, int pv, const Eigen::VectorXd& coeffs, double xi, double eta,
                                 double zeta);

}  // namespace mimetic
