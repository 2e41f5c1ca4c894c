#include "mimetic/derham.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "mimetic/basis1d.hpp"
#include "mimetic/errors.hpp"

namespace mimetic {

const char* space_name(Space s) {
  switch (s) {
    case Space::P: return "P";
    case Space::Wpar: return "Wpar";
    case Space::Wperp: return "Wperp";
    case Space::Upar: return "Upar";
    case Space::Uperp: return "Uperp";
    case Space::Q: return "Q";
  }
  return "?";
}

SpaceDims space_dims(int ph, int pv) {
  if (ph < 1 || pv < 1) fail(ErrorKind::InvalidArgument, "space_dims: degrees must be >= 1");
  SpaceDims d;
  d.ph = ph;
  d.pv = pv;
  const long a = ph + 1, b = pv + 1;
  d.dP = a * a * b;
  d.dWpar = 2L * ph * a * b;
  d.dWperp = a * a * pv;
  d.dUpar = 2L * a * ph * pv;
  d.dUperp = 1L * ph * ph * b;
  d.dQ = 1L * ph * ph * pv;
  d.dW = d.dWpar + d.dWperp;
  d.dU = d.dUpar + d.dUperp;
  return d;
}

namespace {

// Collects entries with "set" semantics: a global entry may be written by
// several elements, but all writes must agree.
class EntrySet {
 public:
  void set(long r, long c, int v) { t_.emplace_back(static_cast<int>(r), static_cast<int>(c), v); }

  IncMat build(long rows, long cols, const char* what) {
    std::sort(t_.begin(), t_.end(), [](const auto& a, const auto& b) {
      return a.row() != b.row() ? a.row() < b.row() : a.col() < b.col();
    });
    std::vector<Eigen::Triplet<int>> u;
    u.reserve(t_.size());
    for (const auto& e : t_) {
      if (!u.empty() && u.back().row() == e.row() && u.back().col() == e.col()) {
        if (u.back().value() != e.value())
          fail(ErrorKind::Domain, std::string("inconsistent orientation while assembling ") + what);
        continue;
      }
      u.push_back(e);
    }
    IncMat M(rows, cols);
    M.setFromTriplets(u.begin(), u.end());
    return M;
  }

 private:
  std::vector<Eigen::Triplet<int>> t_;
};

IncMat block(const IncMat& A, long r0, long nr, long c0, long nc) {
  IncMat B = A.block(r0, c0, nr, nc);
  B.makeCompressed();
  return B;
}

}  // namespace

IncMat IncidenceSet::E10_par() const { return block(E10, 0, nWpar, 0, E10.cols()); }
IncMat IncidenceSet::E10_perp() const { return block(E10, nWpar, E10.rows() - nWpar, 0, E10.cols()); }
IncMat IncidenceSet::E21_parpar() const { return block(E21, 0, nUpar, 0, nWpar); }
IncMat IncidenceSet::E21_parperp() const { return block(E21, 0, nUpar, nWpar, E21.cols() - nWpar); }
IncMat IncidenceSet::E21_perp() const { return block(E21, nUpar, E21.rows() - nUpar, 0, nWpar); }
IncMat IncidenceSet::E21_perpperp() const {
  return block(E21, nUpar, E21.rows() - nUpar, nWpar, E21.cols() - nWpar);
}
IncMat IncidenceSet::E32_par() const { return block(E32, 0, E32.rows(), 0, nUpar); }
IncMat IncidenceSet::E32_perp() const { return block(E32, 0, E32.rows(), nUpar, E32.cols() - nUpar); }

namespace {

// Local incidence entries generated from the exterior derivative on the
// tensor lattice.  `put(space_row, row, space_col, col, value)` receives each.
template <class Put>
void local_entries(int ph, int pv, Put&& put) {
  const LocalIndex L{ph, pv};
  const int p = ph;
  // gradient
  for (int k = 0; k <= pv; ++k)
    for (int j = 0; j <= p; ++j)
      for (int i = 1; i <= p; ++i) {
        put(0, L.Wx(i, j, k), L.P(i, j, k), 1);
        put(0, L.Wx(i, j, k), L.P(i - 1, j, k), -1);
      }
  for (int k = 0; k <= pv; ++k)
    for (int j = 1; j <= p; ++j)
      for (int i = 0; i <= p; ++i) {
        put(0, L.Wy(i, j, k), L.P(i, j, k), 1);
        put(0, L.Wy(i, j, k), L.P(i, j - 1, k), -1);
      }
  for (int k = 1; k <= pv; ++k)
    for (int j = 0; j <= p; ++j)
      for (int i = 0; i <= p; ++i) {
        put(0, L.Wz(i, j, k), L.P(i, j, k), 1);
        put(0, L.Wz(i, j, k), L.P(i, j, k - 1), -1);
      }
  // curl
  for (int k = 1; k <= pv; ++k)
    for (int j = 1; j <= p; ++j)
      for (int i = 0; i <= p; ++i) {
        const int r = L.Ux(i, j, k);
        put(1, r, L.Wz(i, j, k), 1);
        put(1, r, L.Wz(i, j - 1, k), -1);
        put(1, r, L.Wy(i, j, k), -1);
        put(1, r, L.Wy(i, j, k - 1), 1);
      }
  for (int k = 1; k <= pv; ++k)
    for (int j = 0; j <= p; ++j)
      for (int i = 1; i <= p; ++i) {
        const int r = L.Uy(i, j, k);
        put(1, r, L.Wx(i, j, k), 1);
        put(1, r, L.Wx(i, j, k - 1), -1);
        put(1, r, L.Wz(i, j, k), -1);
        put(1, r, L.Wz(i - 1, j, k), 1);
      }
  for (int k = 0; k <= pv; ++k)
    for (int j = 1; j <= p; ++j)
      for (int i = 1; i <= p; ++i) {
        const int r = L.Uz(i, j, k);
        put(1, r, L.Wy(i, j, k), 1);
        put(1, r, L.Wy(i - 1, j, k), -1);
        put(1, r, L.Wx(i, j, k), -1);
        put(1, r, L.Wx(i, j - 1, k), 1);
      }
  // divergence
  for (int k = 1; k <= pv; ++k)
    for (int j = 1; j <= p; ++j)
      for (int i = 1; i <= p; ++i) {
        const int r = L.Q(i, j, k);
        put(2, r, L.Ux(i, j, k), 1);
        put(2, r, L.Ux(i - 1, j, k), -1);
        put(2, r, L.Uy(i, j, k), 1);
        put(2, r, L.Uy(i, j - 1, k), -1);
        put(2, r, L.Uz(i, j, k), 1);
        put(2, r, L.Uz(i, j, k - 1), -1);
      }
}

}  // namespace

IncidenceSet element_incidence(int ph, int pv) {
  const SpaceDims d = space_dims(ph, pv);
  EntrySet s[3];
  local_entries(ph, pv, [&](int which, int r, int c, int v) { s[which].set(r, c, v); });
  IncidenceSet out;
  out.E10 = s[0].build(d.dW, d.dP, "E10");
  out.E21 = s[1].build(d.dU, d.dW, "E21");
  out.E32 = s[2].build(d.dQ, d.dU, "E32");
  out.nWpar = d.dWpar;
  out.nUpar = d.dUpar;
  return out;
}

IncMat int_product(const IncMat& A, const IncMat& B) {
  if (A.cols() != B.rows()) fail(ErrorKind::InvalidArgument, "int_product: shape mismatch");
  IncMat C = (A * B).pruned();
  return C;
}

bool is_zero(const IncMat& A) {
  for (int r = 0; r < A.outerSize(); ++r)
    for (IncMat::InnerIterator it(A, r); it; ++it)
      if (it.value() != 0) return false;
  return true;
}

Eigen::VectorXd apply_incidence(const IncMat& E, const Eigen::VectorXd& x) {
  if (E.cols() != x.size()) fail(ErrorKind::InvalidArgument, "apply_incidence: dimension mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(E.rows());
  for (int r = 0; r < E.outerSize(); ++r) {
    double acc = 0.0;
    for (IncMat::InnerIterator it(E, r); it; ++it) acc += it.value() > 0 ? x[it.col()] : -x[it.col()];
    y[r] = acc;
  }
  return y;
}

void dump_triplets(const IncMat& E, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::Format, "cannot open " + path);
  for (int r = 0; r < E.outerSize(); ++r)
    for (IncMat::InnerIterator it(E, r); it; ++it) f << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

// ---------------------------------------------------------------------------

namespace {

IVec3 add(const IVec3& a, const IVec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
IVec3 sub(const IVec3& a, const IVec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
IVec3 half(const IVec3& a) { return {a[0] / 2, a[1] / 2, a[2] / 2}; }
IVec3 cross(const IVec3& a, const IVec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
long dot(const IVec3& a, const IVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Flip so the first nonzero component is positive.
IVec3 canonical(const IVec3& a) {
  for (int c = 0; c < 3; ++c) {
    if (a[c] > 0) return a;
    if (a[c] < 0) return {-a[0], -a[1], -a[2]};
  }
  return a;
}

IVec3 wrap(IVec3 a, const IVec3& period) {
  for (int c = 0; c < 3; ++c)
    if (period[c] > 0) a[c] = ((a[c] % period[c]) + period[c]) % period[c];
  return a;
}

class KeyIndex {
 public:
  int id(const IVec3& k) {
    auto [it, fresh] = map_.try_emplace(k, static_cast<int>(map_.size()));
    return it->second;
  }
  int size() const { return static_cast<int>(map_.size()); }

 private:
  std::map<IVec3, int> map_;
};

}  // namespace

Topology2D build_topology(const LatticeEmbedding& emb, int p) {
  if (emb.nelem <= 0) fail(ErrorKind::InvalidArgument, "build_topology: zero elements");
  if (p < 1) fail(ErrorKind::InvalidArgument, "build_topology: invalid degree");
  Topology2D t;
  t.p = p;
  t.nelem = emb.nelem;
  const int nn = t.nnode_loc(), ne = t.nedge_loc(), nc = t.ncell_loc();
  t.node.resize(static_cast<size_t>(emb.nelem) * nn);
  t.circ.resize(static_cast<size_t>(emb.nelem) * ne);
  t.flux.resize(static_cast<size_t>(emb.nelem) * ne);
  t.circ_sign.resize(t.circ.size());
  t.flux_sign.resize(t.flux.size());
  t.cell.resize(static_cast<size_t>(emb.nelem) * nc);

  KeyIndex nodes, edges, cells;
  const int pp = p * (p + 1);

  // Orientation of a lattice edge from a to b.  Returns the circulation sign and
  // the sign of the flux whose local normal is `local_normal`.
  auto edge = [&](const IVec3& a, const IVec3& b, const IVec3& local_normal, int& id, std::int8_t& cs,
                  std::int8_t& fs) {
    if (wrap(a, emb.period) == wrap(b, emb.period))
      fail(ErrorKind::InvalidArgument, "build_topology: periodic grid too small (edge endpoints coincide)");
    const IVec3 mid = half(add(a, b));
    id = edges.id(wrap(mid, emb.period));
    const IVec3 t_loc = sub(b, a);
    const IVec3 t_c = canonical(t_loc);
    cs = (t_loc == t_c) ? 1 : -1;
    const IVec3 radial = emb.planar ? IVec3{0, 0, 1} : mid;
    const IVec3 n_c = canonical(cross(t_c, radial));
    const long s = dot(local_normal, n_c);
    if (s == 0) fail(ErrorKind::Domain, "build_topology: degenerate flux orientation");
    fs = s > 0 ? 1 : -1;
  };

  for (int e = 0; e < emb.nelem; ++e) {
    const IVec3 n_out = emb.normal(e);
    auto P = [&](int i, int j) { return emb.point(e, i, j); };
    for (int j = 0; j <= p; ++j)
      for (int i = 0; i <= p; ++i) t.node[static_cast<size_t>(e) * nn + i + j * (p + 1)] = nodes.id(wrap(P(i, j), emb.period));
    // xi-direction lattice edges: circulation x-component, flux y-component
    for (int j = 0; j <= p; ++j)
      for (int i = 1; i <= p; ++i) {
        const IVec3 a = P(i - 1, j), b = P(i, j);
        const IVec3 nrm = cross(n_out, sub(b, a));
        int id;
        std::int8_t cs, fs;
        edge(a, b, nrm, id, cs, fs);
        const size_t lc = static_cast<size_t>(e) * ne + (i - 1) + j * p;
        const size_t lf = static_cast<size_t>(e) * ne + pp + (i - 1) + j * p;
        t.circ[lc] = id;
        t.circ_sign[lc] = cs;
        t.flux[lf] = id;
        t.flux_sign[lf] = fs;
      }
    // eta-direction lattice edges: circulation y-component, flux x-component
    for (int j = 1; j <= p; ++j)
      for (int i = 0; i <= p; ++i) {
        const IVec3 a = P(i, j - 1), b = P(i, j);
        const IVec3 nrm = cross(sub(b, a), n_out);
        int id;
        std::int8_t cs, fs;
        edge(a, b, nrm, id, cs, fs);
        const size_t lc = static_cast<size_t>(e) * ne + pp + i + (j - 1) * (p + 1);
        const size_t lf = static_cast<size_t>(e) * ne + i + (j - 1) * (p + 1);
        t.circ[lc] = id;
        t.circ_sign[lc] = cs;
        t.flux[lf] = id;
        t.flux_sign[lf] = fs;
      }
    for (int j = 1; j <= p; ++j)
      for (int i = 1; i <= p; ++i) {
        const IVec3 c = half(add(P(i - 1, j - 1), P(i, j)));
        t.cell[static_cast<size_t>(e) * nc + (i - 1) + (j - 1) * p] = cells.id(wrap(c, emb.period));
      }
  }
  t.n_nodes = nodes.size();
  t.n_edges = edges.size();
  t.n_cells = cells.size();
  if (t.n_cells != emb.nelem * nc) fail(ErrorKind::Domain, "build_topology: cells collide (grid too small to wrap)");
  return t;
}

Incidence2D assemble_incidence_2d(const Topology2D& t) {
  const int p = t.p, nn = t.nnode_loc(), ne = t.nedge_loc(), nc = t.ncell_loc();
  const int pp = p * (p + 1);
  EntrySet g, c, r, d;
  for (int e = 0; e < t.nelem; ++e) {
    const size_t bn = static_cast<size_t>(e) * nn, be = static_cast<size_t>(e) * ne, bc = static_cast<size_t>(e) * nc;
    auto N = [&](int i, int j) { return t.node[bn + i + j * (p + 1)]; };
    auto cx = [&](int i, int j) { return be + (i - 1) + j * p; };             // xi-edge (i-1,j)-(i,j)
    auto cy = [&](int i, int j) { return be + pp + i + (j - 1) * (p + 1); };  // eta-edge (i,j-1)-(i,j)
    auto fx = [&](int i, int j) { return be + i + (j - 1) * (p + 1); };
    auto fy = [&](int i, int j) { return be + pp + (i - 1) + j * p; };
    auto C = [&](int i, int j) { return t.cell[bc + (i - 1) + (j - 1) * p]; };
    for (int j = 0; j <= p; ++j)
      for (int i = 1; i <= p; ++i) {
        const size_t l = cx(i, j);
        g.set(t.circ[l], N(i, j), t.circ_sign[l]);
        g.set(t.circ[l], N(i - 1, j), -t.circ_sign[l]);
        const size_t m = fy(i, j);
        r.set(t.flux[m], N(i, j), -t.flux_sign[m]);
        r.set(t.flux[m], N(i - 1, j), t.flux_sign[m]);
      }
    for (int j = 1; j <= p; ++j)
      for (int i = 0; i <= p; ++i) {
        const size_t l = cy(i, j);
        g.set(t.circ[l], N(i, j), t.circ_sign[l]);
        g.set(t.circ[l], N(i, j - 1), -t.circ_sign[l]);
        const size_t m = fx(i, j);
        r.set(t.flux[m], N(i, j), t.flux_sign[m]);
        r.set(t.flux[m], N(i, j - 1), -t.flux_sign[m]);
      }
    for (int j = 1; j <= p; ++j)
      for (int i = 1; i <= p; ++i) {
        const int q = C(i, j);
        c.set(q, t.circ[cx(i, j - 1)], t.circ_sign[cx(i, j - 1)]);
        c.set(q, t.circ[cx(i, j)], -t.circ_sign[cx(i, j)]);
        c.set(q, t.circ[cy(i, j)], t.circ_sign[cy(i, j)]);
        c.set(q, t.circ[cy(i - 1, j)], -t.circ_sign[cy(i - 1, j)]);
        d.set(q, t.flux[fx(i, j)], t.flux_sign[fx(i, j)]);
        d.set(q, t.flux[fx(i - 1, j)], -t.flux_sign[fx(i - 1, j)]);
        d.set(q, t.flux[fy(i, j)], t.flux_sign[fy(i, j)]);
        d.set(q, t.flux[fy(i, j - 1)], -t.flux_sign[fy(i, j - 1)]);
      }
  }
  Incidence2D out;
  out.grad = g.build(t.n_edges, t.n_nodes, "2D gradient");
  out.curl = c.build(t.n_cells, t.n_edges, "2D curl");
  out.rot = r.build(t.n_edges, t.n_nodes, "2D rot");
  out.div = d.build(t.n_cells, t.n_edges, "2D divergence");
  return out;
}

long Grid3D::nP() const { return static_cast<long>(topo->n_nodes) * (nlev * pv + 1); }
long Grid3D::nWpar() const { return static_cast<long>(topo->n_edges) * (nlev * pv + 1); }
long Grid3D::nWperp() const { return static_cast<long>(topo->n_nodes) * (nlev * pv); }
long Grid3D::nUpar() const { return static_cast<long>(topo->n_edges) * (nlev * pv); }
long Grid3D::nUperp() const { return static_cast<long>(topo->n_cells) * (nlev * pv + 1); }
long Grid3D::nQ() const { return static_cast<long>(topo->n_cells) * (nlev * pv); }

IncidenceSet assemble_incidence(const Grid3D& grid) {
  if (grid.topo == nullptr || grid.nlev < 1) fail(ErrorKind::InvalidArgument, "assemble_incidence: invalid grid");
  const Topology2D& t = *grid.topo;
  const int p = t.p, pv = grid.pv;
  const SpaceDims d = space_dims(p, pv);
  const LocalIndex L{p, pv};
  const long N0 = t.n_nodes, N1 = t.n_edges, N2 = t.n_cells;
  const long nWpar = grid.nWpar(), nUpar = grid.nUpar();
  const int nn = t.nnode_loc(), ne = t.nedge_loc(), nc = t.ncell_loc(), pp = p * (p + 1);

  // Local-to-global map with orientation, one table per 3D family.
  std::vector<long> gP(d.dP), gW(d.dW), gU(d.dU), gQ(d.dQ);
  std::vector<int> sW(d.dW), sU(d.dU);

  EntrySet s[3];
  for (int lev = 0; lev < grid.nlev; ++lev)
    for (int e = 0; e < t.nelem; ++e) {
      const size_t bn = static_cast<size_t>(e) * nn, be = static_cast<size_t>(e) * ne, bc = static_cast<size_t>(e) * nc;
      for (int k = 0; k <= pv; ++k) {
        const long kg = static_cast<long>(lev) * pv + k;
        for (int j = 0; j <= p; ++j)
          for (int i = 0; i <= p; ++i) gP[L.P(i, j, k)] = t.node[bn + i + j * (p + 1)] + N0 * kg;
        for (int j = 0; j <= p; ++j)
          for (int i = 1; i <= p; ++i) {
            const size_t l = be + (i - 1) + j * p;
            gW[L.Wx(i, j, k)] = t.circ[l] + N1 * kg;
            sW[L.Wx(i, j, k)] = t.circ_sign[l];
          }
        for (int j = 1; j <= p; ++j)
          for (int i = 0; i <= p; ++i) {
            const size_t l = be + pp + i + (j - 1) * (p + 1);
            gW[L.Wy(i, j, k)] = t.circ[l] + N1 * kg;
            sW[L.Wy(i, j, k)] = t.circ_sign[l];
          }
        for (int j = 1; j <= p; ++j)
          for (int i = 1; i <= p; ++i) {
            gU[L.Uz(i, j, k)] = nUpar + t.cell[bc + (i - 1) + (j - 1) * p] + N2 * kg;
            sU[L.Uz(i, j, k)] = 1;
          }
      }
      for (int k = 1; k <= pv; ++k) {
        const long ks = static_cast<long>(lev) * pv + k - 1;
        for (int j = 0; j <= p; ++j)
          for (int i = 0; i <= p; ++i) {
            gW[L.Wz(i, j, k)] = nWpar + t.node[bn + i + j * (p + 1)] + N0 * ks;
            sW[L.Wz(i, j, k)] = 1;
          }
        for (int j = 1; j <= p; ++j)
          for (int i = 0; i <= p; ++i) {
            const size_t l = be + i + (j - 1) * (p + 1);
            gU[L.Ux(i, j, k)] = t.flux[l] + N1 * ks;
            sU[L.Ux(i, j, k)] = t.flux_sign[l];
          }
        for (int j = 0; j <= p; ++j)
          for (int i = 1; i <= p; ++i) {
            const size_t l = be + pp + (i - 1) + j * p;
            gU[L.Uy(i, j, k)] = t.flux[l] + N1 * ks;
            sU[L.Uy(i, j, k)] = t.flux_sign[l];
          }
        for (int j = 1; j <= p; ++j)
          for (int i = 1; i <= p; ++i) gQ[L.Q(i, j, k)] = t.cell[bc + (i - 1) + (j - 1) * p] + N2 * ks;
      }
      local_entries(p, pv, [&](int which, int r, int c, int v) {
        switch (which) {
          case 0: s[0].set(gW[r], gP[c], sW[r] * v); break;
          case 1: s[1].set(gU[r], gW[c], sU[r] * sW[c] * v); break;
          default: s[2].set(gQ[r], gU[c], sU[c] * v); break;
        }
      });
    }
  IncidenceSet out;
  out.nWpar = nWpar;
  out.nUpar = nUpar;
  out.E10 = s[0].build(nWpar + grid.nWperp(), grid.nP(), "E10");
  out.E21 = s[1].build(nUpar + grid.nUperp(), nWpar + grid.nWperp(), "E21");
  out.E32 = s[2].build(grid.nQ(), nUpar + grid.nUperp(), "E32");
  return out;
}

IncidenceSet xz_slice_incidence(int nx, int nz) {
  if (nx < 1 || nz < 1) fail(ErrorKind::InvalidArgument, "xz_slice_incidence: empty mesh");
  auto node = [&](int a, int c) { return c + a * (nz + 1); };
  const int nxe = nx * (nz + 1);  // x-directed edges
  const int nze = (nx + 1) * nz;  // z-directed edges
  auto xedge = [&](int a, int c) { return c + a * (nz + 1); };
  auto zedge = [&](int a, int c) { return nxe + c + a * nz; };
  auto face = [&](int a, int c) { return c + a * nz; };
  auto xflux = [&](int a, int c) { return c + a * nz; };
  const int nxf = (nx + 1) * nz;
  auto zflux = [&](int a, int c) { return nxf + c + a * (nz + 1); };

  EntrySet g, cu, dv;
  for (int a = 0; a < nx; ++a)
    for (int c = 0; c <= nz; ++c) {
      g.set(xedge(a, c), node(a, c), -1);
      g.set(xedge(a, c), node(a + 1, c), 1);
    }
  for (int a = 0; a <= nx; ++a)
    for (int c = 0; c < nz; ++c) {
      g.set(zedge(a, c), node(a, c), -1);
      g.set(zedge(a, c), node(a, c + 1), 1);
    }
  for (int a = 0; a < nx; ++a)
    for (int c = 0; c < nz; ++c) {
      const int f = face(a, c);
      cu.set(f, xedge(a, c), 1);
      cu.set(f, xedge(a, c + 1), -1);
      cu.set(f, zedge(a, c), -1);
      cu.set(f, zedge(a + 1, c), 1);
      dv.set(f, xflux(a, c), -1);
      dv.set(f, xflux(a + 1, c), 1);
      dv.set(f, zflux(a, c), -1);
      dv.set(f, zflux(a, c + 1), 1);
    }
  IncidenceSet out;
  out.nWpar = nxe;
  out.nUpar = nxf;
  out.E10 = g.build(nxe + nze, (nx + 1) * (nz + 1), "slice E10");
  out.E21 = cu.build(nx * nz, nxe + nze, "slice E21");
  out.E32 = dv.build(nx * nz, nxf + nx * (nz + 1), "slice E32");
  return out;
}

std::array<double, 3> eval_local(Family f, int ph, int pv, const Eigen::VectorXd& c, double xi, double eta,
                                 double zeta) {
  for (double v : {xi, eta, zeta})
    if (v < -1.0 || v > 1.0) fail(ErrorKind::Domain, "eval_local: coordinate outside [-1,1]");
  const SpaceDims d = space_dims(ph, pv);
  const long expect = f == Family::P ? d.dP : f == Family::W ? d.dW : f == Family::U ? d.dU : d.dQ;
  if (c.size() != expect) fail(ErrorKind::InvalidArgument, "eval_local: coefficient length mismatch");
  const NodalBasis nh(ph), nv(pv);
  const EdgeBasis eh(nh), ev(nv);
  std::vector<double> lx(ph + 1), ly(ph + 1), lz(pv + 1), ex(ph), ey(ph), ez(pv);
  nh.eval_all(xi, lx.data());
  nh.eval_all(eta, ly.data());
  nv.eval_all(zeta, lz.data());
  eh.eval_all(xi, ex.data());
  eh.eval_all(eta, ey.data());
  ev.eval_all(zeta, ez.data());
  const LocalIndex L{ph, pv};
  std::array<double, 3> out{0.0, 0.0, 0.0};
  switch (f) {
    case Family::P:
      for (int k = 0; k <= pv; ++k)
        for (int j = 0; j <= ph; ++j)
          for (int i = 0; i <= ph; ++i) out[0] += c[L.P(i, j, k)] * lx[i] * ly[j] * lz[k];
      break;
    case Family::W:
      for (int k = 0; k <= pv; ++k)
        for (int j = 0; j <= ph; ++j)
          for (int i = 1; i <= ph; ++i) out[0] += c[L.Wx(i, j, k)] * ex[i - 1] * ly[j] * lz[k];
      for (int k = 0; k <= pv; ++k)
        for (int j = 1; j <= ph; ++j)
          for (int i = 0; i <= ph; ++i) out[1] += c[L.Wy(i, j, k)] * lx[i] * ey[j - 1] * lz[k];
      for (int k = 1; k <= pv; ++k)
        for (int j = 0; j <= ph; ++j)
          for (int i = 0; i <= ph; ++i) out[2] += c[L.Wz(i, j, k)] * lx[i] * ly[j] * ez[k - 1];
      break;
    case Family::U:
      for (int k = 1; k <= pv; ++k)
        for (int j = 1; j <= ph; ++j)
          for (int i = 0; i <= ph; ++i) out[0] += c[L.Ux(i, j, k)] * lx[i] * ey[j - 1] * ez[k - 1];
      for (int k = 1; k <= pv; ++k)
        for (int j = 0; j <= ph; ++j)
          for (int i = 1; i <= ph; ++i) out[1] += c[L.Uy(i, j, k)] * ex[i - 1] * ly[j] * ez[k - 1];
      for (int k = 0; k <= pv; ++k)
        for (int j = 1; j <= ph; ++j)
          for (int i = 1; i <= ph; ++i) out[2] += c[L.Uz(i, j, k)] * ex[i - 1] * ey[j - 1] * lz[k];
      break;
    case Family::Q:
      for (int k = 1; k <= pv; ++k)
        for (int j = 1; j <= ph; ++j)
          for (int i = 1; i <= ph; ++i) out[0] += c[L.Q(i, j, k)] * ex[i - 1] * ey[j - 1] * ez[k - 1];
      break;
  }
  return out;
}

}  // namespace mimetic

namespace mimetic {

LatticeEmbedding plane_lattice(int nx, int ny, int p) {
  if (nx < 1 || ny < 1 || p < 1) fail(ErrorKind::InvalidArgument, "plane_lattice: invalid size");
  LatticeEmbedding L;
  L.nelem = nx * ny;
  L.planar = true;
  L.period = {2L * nx * p, 2L * ny * p, 0};
  L.point = [nx, p](int e, int i, int j) -> IVec3 {
    const int ex = e % nx, ey = e / nx;
    return {2L * (ex * p + i), 2L * (ey * p + j), 0};
  };
  L.normal = [](int) -> IVec3 { return {0, 0, 1}; };
  return L;
}

std::array<IVec3, 3> cube_panel_frame(int panel) {
  static const std::array<std::array<IVec3, 3>, 6> frames{{
      {{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}},
      {{{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}}},
      {{{0, -1, 0}, {0, 0, 1}, {-1, 0, 0}}},
      {{{1, 0, 0}, {0, 0, 1}, {0, -1, 0}}},
      {{{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}}},
      {{{0, 1, 0}, {1, 0, 0}, {0, 0, -1}}},
  }};
  if (panel < 0 || panel > 5) fail(ErrorKind::InvalidArgument, "cube_panel_frame: panel out of range");
  return frames[panel];
}

LatticeEmbedding cube_lattice(int n, int p) {
  if (n < 1 || p < 1) fail(ErrorKind::InvalidArgument, "cube_lattice: invalid size");
  LatticeEmbedding L;
  L.nelem = 6 * n * n;
  L.planar = false;
  const long N = static_cast<long>(n) * p;
  L.point = [n, p, N](int e, int i, int j) -> IVec3 {
    const int panel = e / (n * n), r = e % (n * n);
    const auto F = cube_panel_frame(panel);
    const long I = static_cast<long>(r % n) * p + i, J = static_cast<long>(r / n) * p + j;
    IVec3 out;
    for (int c = 0; c < 3; ++c) out[c] = N * F[2][c] + (2 * I - N) * F[0][c] + (2 * J - N) * F[1][c];
    return out;
  };
  L.normal = [n](int e) -> IVec3 { return cube_panel_frame(e / (n * n))[2]; };
  return L;
}

}  // namespace mimetic
