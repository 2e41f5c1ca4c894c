// Acceptance checks: one PASS/FAIL line per item.  Run with item numbers as
// arguments to select a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fmt/format.h>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "mimetic/basis1d.hpp"
#include "mimetic/cases.hpp"
#include "mimetic/derham.hpp"
#include "mimetic/driver.hpp"
#include "mimetic/errors.hpp"

using namespace mimetic;
using clk = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(clk::time_point t) { return std::chrono::duration<double>(clk::now() - t).count(); }

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Compensated sum; resolves mass changes far below the plain summation error.
double exact_sum(const Eigen::VectorXd& v) {
  long double s = 0.0L, c = 0.0L;
  for (double x : v) {
    const long double t = s + x;
    c += std::fabs(static_cast<double>(s)) >= std::fabs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return static_cast<double>(s + c);
}

// ---------------------------------------------------------------------------

Outcome exactness() {
  const auto t0 = clk::now();
  int grids = 0;
  bool ok = true;
  const auto check = [&](const IncidenceSet& S) {
    ok = ok && is_zero(int_product(S.E21, S.E10)) && is_zero(int_product(S.E32, S.E21));
    ++grids;
  };
  for (int p = 1; p <= 4; ++p) {
    check(element_incidence(p, p));
    const auto plane = build_topology(plane_lattice(2, 2, p), p);
    check(assemble_incidence(Grid3D{&plane, 2, p}));
    const auto cube = build_topology(cube_lattice(1, p), p);
    check(assemble_incidence(Grid3D{&cube, 2, p}));
  }
  const double t = seconds_since(t0);
  return {ok && t < 5.0, fmt::format("{} grids, p = 1..4, products identically zero: {}, {:.2f} s", grids,
                                     ok ? "yes" : "no", t)};
}

Eigen::MatrixXi rows(std::initializer_list<std::initializer_list<int>> r) {
  Eigen::MatrixXi M(static_cast<int>(r.size()), static_cast<int>(r.begin()->size()));
  int i = 0;
  for (const auto& row : r) {
    int j = 0;
    for (int v : row) M(i, j++) = v;
    ++i;
  }
  return M;
}

Outcome golden_matrices() {
  const auto S = xz_slice_incidence(2, 2);
  const auto E10 = rows({{-1, 0, 0, 1, 0, 0, 0, 0, 0},
                         {0, -1, 0, 0, 1, 0, 0, 0, 0},
                         {0, 0, -1, 0, 0, 1, 0, 0, 0},
                         {0, 0, 0, -1, 0, 0, 1, 0, 0},
                         {0, 0, 0, 0, -1, 0, 0, 1, 0},
                         {0, 0, 0, 0, 0, -1, 0, 0, 1},
                         {-1, 1, 0, 0, 0, 0, 0, 0, 0},
                         {0, -1, 1, 0, 0, 0, 0, 0, 0},
                         {0, 0, 0, -1, 1, 0, 0, 0, 0},
                         {0, 0, 0, 0, -1, 1, 0, 0, 0},
                         {0, 0, 0, 0, 0, 0, -1, 1, 0},
                         {0, 0, 0, 0, 0, 0, 0, -1, 1}});
  const auto E21 = rows({{1, -1, 0, 0, 0, 0, -1, 0, 1, 0, 0, 0},
                         {0, 1, -1, 0, 0, 0, 0, -1, 0, 1, 0, 0},
                         {0, 0, 0, 1, -1, 0, 0, 0, -1, 0, 1, 0},
                         {0, 0, 0, 0, 1, -1, 0, 0, 0, -1, 0, 1}});
  const auto E32 = rows({{-1, 0, 1, 0, 0, 0, -1, 1, 0, 0, 0, 0},
                         {0, -1, 0, 1, 0, 0, 0, -1, 1, 0, 0, 0},
                         {0, 0, -1, 0, 1, 0, 0, 0, 0, -1, 1, 0},
                         {0, 0, 0, -1, 0, 1, 0, 0, 0, 0, -1, 1}});
  const bool a = Eigen::MatrixXi(S.E10) == E10, b = Eigen::MatrixXi(S.E21) == E21, c = Eigen::MatrixXi(S.E32) == E32;
  return {a && b && c, fmt::format("E10 {}, E21 {}, E32 {}", a ? "identical" : "differs", b ? "identical" : "differs",
                                   c ? "identical" : "differs")};
}

// Polynomial in monomial form with exact derivative and antiderivative.
struct Poly {
  std::vector<double> c;
  double operator()(double x) const {
    double s = 0.0;
    for (size_t k = c.size(); k-- > 0;) s = s * x + c[k];
    return s;
  }
  Poly deriv() const {
    Poly d;
    for (size_t k = 1; k < c.size(); ++k) d.c.push_back(static_cast<double>(k) * c[k]);
    if (d.c.empty()) d.c.push_back(0.0);
    return d;
  }
  double integral(double a, double b) const {
    double A = 0.0, B = 0.0;
    for (size_t k = c.size(); k-- > 0;) {
      A = A * a + c[k] / static_cast<double>(k + 1);
      B = B * b + c[k] / static_cast<double>(k + 1);
    }
    return B * b - A * a;
  }
};

Poly random_poly(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Poly p;
  for (int k = 0; k <= degree; ++k) p.c.push_back(U(rng));
  return p;
}

// Separable field a(x) b(y) c(z).
struct Tensor {
  Poly f[3];
  double operator()(double x, double y, double z) const { return f[0](x) * f[1](y) * f[2](z); }
};

Tensor random_tensor(std::mt19937_64& rng, int dx, int dy, int dz) {
  return {{random_poly(rng, dx), random_poly(rng, dy), random_poly(rng, dz)}};
}

// Degrees of the polynomial fields that the discrete spaces reproduce exactly,
// with the commuting diagram checked for the gradient, curl and divergence.
Outcome commuting() {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double worst1d = 0.0, worst3d = 0.0;
  const int trials = 200;
  for (int p = 1; p <= 6; ++p) {
    const NodalBasis B(p);
    const EdgeBasis E(B);
    const auto& x = B.nodes();
    // one dimension: derivative of the interpolant is the histopolant of the derivative
    for (int t = 0; t < trials; ++t) {
      const Poly f = random_poly(rng, p), df = f.deriv();
      std::vector<double> q(p + 1);
      for (int i = 0; i <= p; ++i) q[i] = f(x[i]);
      const auto g = diff_to_edge(q);
      for (int s = 0; s < 20; ++s) {
        const double xi = U(rng);
        double v = 0.0;
        for (int i = 1; i <= p; ++i) v += g[i - 1] * E.eval(i, xi);
        worst1d = std::max(worst1d, std::abs(v - df(xi)));
      }
    }
    // three dimensions on one element
    const auto S = element_incidence(p, p);
    const SpaceDims d = space_dims(p, p);
    const LocalIndex L{p, p};
    for (int t = 0; t < trials; ++t) {
      // gradient of a nodal field
      const Tensor f = random_tensor(rng, p, p, p);
      Eigen::VectorXd q(d.dP);
      for (int k = 0; k <= p; ++k)
        for (int j = 0; j <= p; ++j)
          for (int i = 0; i <= p; ++i) q[L.P(i, j, k)] = f(x[i], x[j], x[k]);
      const Eigen::VectorXd gq = apply_incidence(S.E10, q);

      // curl of an edge field: F = (a, b, c) with each component in the edge space
      const Tensor F[3] = {random_tensor(rng, p - 1, p, p), random_tensor(rng, p, p - 1, p),
                           random_tensor(rng, p, p, p - 1)};
      Eigen::VectorXd w(d.dW);
      for (int k = 0; k <= p; ++k)
        for (int j = 0; j <= p; ++j)
          for (int i = 1; i <= p; ++i)
            w[L.Wx(i, j, k)] = F[0].f[0].integral(x[i - 1], x[i]) * F[0].f[1](x[j]) * F[0].f[2](x[k]);
      for (int k = 0; k <= p; ++k)
        for (int j = 1; j <= p; ++j)
          for (int i = 0; i <= p; ++i)
            w[L.Wy(i, j, k)] = F[1].f[0](x[i]) * F[1].f[1].integral(x[j - 1], x[j]) * F[1].f[2](x[k]);
      for (int k = 1; k <= p; ++k)
        for (int j = 0; j <= p; ++j)
          for (int i = 0; i <= p; ++i)
            w[L.Wz(i, j, k)] = F[2].f[0](x[i]) * F[2].f[1](x[j]) * F[2].f[2].integral(x[k - 1], x[k]);
      const Eigen::VectorXd cw = apply_incidence(S.E21, w);

      // divergence of a face field
      const Tensor G[3] = {random_tensor(rng, p, p - 1, p - 1), random_tensor(rng, p - 1, p, p - 1),
                           random_tensor(rng, p - 1, p - 1, p)};
      Eigen::VectorXd u(d.dU);
      for (int k = 1; k <= p; ++k)
        for (int j = 1; j <= p; ++j)
          for (int i = 0; i <= p; ++i)
            u[L.Ux(i, j, k)] =
                G[0].f[0](x[i]) * G[0].f[1].integral(x[j - 1], x[j]) * G[0].f[2].integral(x[k - 1], x[k]);
      for (int k = 1; k <= p; ++k)
        for (int j = 0; j <= p; ++j)
          for (int i = 1; i <= p; ++i)
            u[L.Uy(i, j, k)] =
                G[1].f[0].integral(x[i - 1], x[i]) * G[1].f[1](x[j]) * G[1].f[2].integral(x[k - 1], x[k]);
      for (int k = 0; k <= p; ++k)
        for (int j = 1; j <= p; ++j)
          for (int i = 1; i <= p; ++i)
            u[L.Uz(i, j, k)] =
                G[2].f[0].integral(x[i - 1], x[i]) * G[2].f[1].integral(x[j - 1], x[j]) * G[2].f[2](x[k]);
      const Eigen::VectorXd du = apply_incidence(S.E32, u);

      for (int s = 0; s < 3; ++s) {
        const double a = U(rng), b = U(rng), c = U(rng);
        const auto gv = eval_local(Family::W, p, p, gq, a, b, c);
        const double grad[3] = {f.f[0].deriv()(a) * f.f[1](b) * f.f[2](c), f.f[0](a) * f.f[1].deriv()(b) * f.f[2](c),
                                f.f[0](a) * f.f[1](b) * f.f[2].deriv()(c)};
        // partial derivative of component m along direction n
        const auto dF = [&](int m, int n) {
          double v = 1.0;
          for (int r = 0; r < 3; ++r) {
            const double z = r == 0 ? a : r == 1 ? b : c;
            v *= r == n ? F[m].f[r].deriv()(z) : F[m].f[r](z);
          }
          return v;
        };
        const double curl[3] = {dF(2, 1) - dF(1, 2), dF(0, 2) - dF(2, 0), dF(1, 0) - dF(0, 1)};
        const auto cv = eval_local(Family::U, p, p, cw, a, b, c);
        double div = 0.0;
        for (int m = 0; m < 3; ++m) {
          double v = 1.0;
          for (int r = 0; r < 3; ++r) {
            const double z = r == 0 ? a : r == 1 ? b : c;
            v *= r == m ? G[m].f[r].deriv()(z) : G[m].f[r](z);
          }
          div += v;
        }
        const double dv = eval_local(Family::Q, p, p, du, a, b, c)[0];
        for (int m = 0; m < 3; ++m)
          worst3d = std::max({worst3d, std::abs(gv[m] - grad[m]), std::abs(cv[m] - curl[m])});
        worst3d = std::max(worst3d, std::abs(dv - div));
      }
    }
  }
  const double worst = std::max(worst1d, worst3d);
  return {worst <= 1e-12, fmt::format("{} random polynomials per degree, p = 1..6: max error 1D {:.2e}, "
                                      "3D grad/curl/div {:.2e}",
                                      trials, worst1d, worst3d)};
}

// ---------------------------------------------------------------------------

nlohmann::json plane_bubble_config(const std::string& solver) {
  return {{"case",
           {{"name", "neutral_bubble"},
            {"theta_amplitude_K", 2.0},
            {"bubble_radius_m", 2000.0},
            {"bubble_height_m", 1500.0},
            {"bubble_center", {5000.0, 5000.0, 2000.0}}}},
          {"mesh",
           {{"backend", "plane"}, {"elements", 4}, {"degree", 3}, {"levels", 10}, {"z_top_m", 8000.0},
            {"lx_m", 10000.0}}},
          {"physics", {{"coriolis", false}}},
          {"time", {{"dt_seconds", 1.0}, {"end_seconds", 100.0}}},
          {"solver", {{"mass_matrix", solver}, {"cg_tolerance", 1e-12}}},
          {"dissipation", {{"enabled", false}}}};
}

// Per-step exchange balance of a 100-step plane run.
std::vector<LedgerRow> plane_run(const std::string& solver) {
  const Model M(RunConfig::from_json(plane_bubble_config(solver)));
  State s = M.initial_state();
  std::vector<LedgerRow> rows;
  for (long n = 0; n < M.config().steps(); ++n) {
    LedgerRow r;
    M.step(s, &r);
    rows.push_back(r);
  }
  return rows;
}

MeshSpec small_sphere(int n, int p, int nlev, double ztop) {
  MeshSpec s;
  s.n = n;
  s.p = p;
  s.z = uniform_levels(nlev, ztop);
  return s;
}

MeshSpec small_plane(int n, int p, int nlev, double ztop) {
  MeshSpec s;
  s.backend = Backend::Plane;
  s.n = s.ny = n;
  s.p = p;
  s.Lx = 4000.0;
  s.Ly = 3000.0;
  s.z = uniform_levels(nlev, ztop);
  return s;
}

template <class F>
double over_random_states(F&& measure) {
  double worst = 0.0;
  for (const MeshSpec& spec : {small_sphere(2, 3, 5, 10000.0), small_plane(3, 3, 4, 4000.0)}) {
    const Mesh mesh(spec);
    const Assembly A(mesh);
    const Thermo th(A, Constants{});
    HorizontalOptions ho;
    ho.f0 = 1e-4;
    const Horizontal H(th, ho);
    const Vertical V(th, VerticalOptions{});
    for (int seed = 1; seed <= 5; ++seed) {
      const State s = initial_state("random_smooth", {{"seed", seed}}, th);
      HorizontalDiag hd;
      VerticalDiag vd;
      HTendency ht;
      VTendency vt;
      H.tendency(s, ht, &hd);
      V.tendency(s, vt, &vd);
      worst = std::max(worst, measure(exchanges(th, &hd, &vd)));
    }
  }
  return worst;
}

Outcome kinetic_potential() {
  const double smooth = over_random_states([](const Exchanges& x) { return relative_balance(x.K2P, x.P2K); });
  double run = 0.0;
  for (const auto& r : plane_run("direct")) run = std::max(run, relative_balance(r.x.K2P, r.x.P2K));
  return {smooth <= 1e-12 && run <= 1e-11,
          fmt::format("random smooth states {:.2e} (<= 1e-12), 100-step plane run max per step {:.2e} (<= 1e-11)",
                      smooth, run)};
}

Outcome kinetic_internal() {
  const auto stats = [](const std::vector<LedgerRow>& rows) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(relative_balance(r.x.K2I, r.x.I2K));
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    return std::pair{sorted.back(), sorted[sorted.size() / 2]};
  };
  const auto [cg_max, cg_median] = stats(plane_run("cg"));
  const auto [direct_max, direct_median] = stats(plane_run("direct"));
  const bool ok = cg_max <= 1e-5 && cg_median <= 1e-6 && direct_max <= 1e-10;
  return {ok, fmt::format("CG (tol 1e-12) max {:.2e} median {:.2e}; direct max {:.2e} median {:.2e}", cg_max,
                          cg_median, direct_max, direct_median)};
}

nlohmann::json gravity_wave_config(int elements, int levels, double dt, double end, const std::string& scheme) {
  return {{"case", {{"name", "gravity_wave"}}},
          {"mesh",
           {{"backend", "sphere"}, {"elements", elements}, {"degree", 3}, {"levels", levels}, {"z_top_m", 10000.0},
            {"radius_factor", 125.0}}},
          {"physics", {{"omega_per_s", 0.0}}},
          {"time", {{"dt_seconds", dt}, {"end_seconds", end}, {"scheme", scheme}}},
          {"dissipation", {{"enabled", false}}}};
}

Outcome mass() {
  std::string detail;
  bool ok = true;
  for (const char* scheme : {"rk2", "rk3"}) {
    const Model M(RunConfig::from_json(gravity_wave_config(4, 10, 1.0, 1000.0, scheme)));
    State s = M.initial_state();
    const double m0 = exact_sum(s.rho);
    std::vector<double> drift;
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      M.step(s);
      drift.push_back(exact_sum(s.rho) / m0 - 1.0);
      worst = std::max(worst, std::abs(drift.back()));
    }
    if (std::string(scheme) == "rk2") {
      ok = ok && worst <= 1e-11;
      detail += fmt::format("RK2 max |dM|/M {:.2e} (<= 1e-11); ", worst);
    } else {
      // least-squares line through the drift history
      const double n = static_cast<double>(drift.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
      for (size_t i = 0; i < drift.size(); ++i) {
        const double x = static_cast<double>(i + 1), y = drift[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
      }
      const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
      const double r2 = vy > 0.0 ? cov * cov / (vx * vy) : 0.0;
      ok = ok && r2 >= 0.99;
      detail += fmt::format("RK3 drift {:.2e} per step, final {:.2e}, R^2 {:.4f} (>= 0.99)", cov / vx, drift.back(), r2);
    }
  }
  return {ok, detail};
}

Outcome hydrostatic_rest() {
  const auto t0 = clk::now();
  const nlohmann::json j = {
      {"case", {{"name", "isothermal_rest"}, {"temperature_K", 300.0}}},
      {"mesh", {{"backend", "sphere"}, {"elements", 4}, {"degree", 3}, {"levels", 10}, {"z_top_m", 30000.0}}},
      {"time", {{"dt_seconds", 60.0}, {"end_seconds", 30000.0}}},
      {"dissipation", {{"enabled", true}, {"nu_theta_m4_per_s", 0.0}}}};
  const Model M(RunConfig::from_json(j));
  State s = M.initial_state();
  double wmax = 0.0, umax = 0.0;
  for (int n = 0; n < 500; ++n) {
    M.step(s);
    wmax = std::max(wmax, M.thermo().max_vertical_speed(s.w));
    umax = std::max(umax, M.thermo().max_horizontal_speed(s.u));
  }
  const double t = seconds_since(t0);
  return {wmax <= 1e-8 && umax <= 1e-8 && t < 300.0,
          fmt::format("500 steps of 60 s: max |w| {:.2e}, max |u| {:.2e} m/s (<= 1e-8), {:.1f} s (< 300)", wmax, umax,
                      t)};
}

Outcome picard() {
  const nlohmann::json j = {
      {"case", {{"name", "standard_atmosphere"}, {"theta_amplitude_K", 1.0}, {"w_amplitude_m_per_s", 0.5}}},
      {"mesh",
       {{"backend", "plane"}, {"elements", 1}, {"degree", 3}, {"levels", 30}, {"z_top_m", 30000.0},
        {"lx_m", 100000.0}}},
      {"time", {{"dt_seconds", 120.0}, {"end_seconds", 1200.0}}},
      {"solver", {{"picard_tolerance", 1e-8}, {"picard_max_iterations", 30}}},
      {"dissipation", {{"enabled", false}}}};
  const Model M(RunConfig::from_json(j));
  State s = M.initial_state();
  int worst = 0;
  bool monotone = true;
  std::string first_trace;
  for (long n = 0; n < M.config().steps(); ++n) {
    const StepReport r = M.step(s);
    worst = std::max(worst, r.picard.max_iterations);
    const auto& tr = r.picard.trace;
    for (size_t i = 1; i < tr.size(); ++i) monotone = monotone && tr[i] < tr[i - 1];
    if (n == 0)
      for (double v : tr) first_trace += fmt::format(" {:.1e}", v);
  }
  return {worst <= 30 && monotone,
          fmt::format("10 steps of 120 s: at most {} iterations to 1e-8, residuals monotone: {}; first step:{}", worst,
                      monotone ? "yes" : "no", first_trace)};
}

State integrate(const Model& M, double dt, double end) {
  State s = M.initial_state();
  const long n = std::lround(end / dt);
  for (long i = 0; i < n; ++i) strang_step(M.thermo(), M.horizontal(), M.vertical(), s, dt);
  return s;
}

Outcome strang_order() {
  const double end = 16.0, dt = 0.5;
  nlohmann::json j = gravity_wave_config(2, 10, dt, end, "rk3");
  j["solver"] = {{"picard_tolerance", 1e-11}};
  const Model M(RunConfig::from_json(j));
  const State a = integrate(M, dt, end), b = integrate(M, dt / 2, end), c = integrate(M, dt / 4, end);
  const auto norm = [](const State& x, const State& y) {
    return std::sqrt((x.u - y.u).squaredNorm() + (x.w - y.w).squaredNorm());
  };
  const double ratio = norm(a, b) / norm(b, c);
  return {ratio >= 3.6 && ratio <= 4.4,
          fmt::format("velocity differences over {} s, dt = {}, {}, {} s: ratio {:.3f} (in [3.6, 4.4])", end, dt,
                      dt / 2, dt / 4, ratio)};
}

// Potential temperature at every quadrature point of every layer.
Eigen::VectorXd theta_points(const Thermo& th, const State& s) {
  std::vector<double> r, T;
  std::vector<double> out;
  for (int k = 0; k < th.nlev(); ++k) {
    th.density_at_quad(s.rho, k, r);
    th.density_at_quad(s.Theta, k, T);
    for (size_t q = 0; q < r.size(); ++q) out.push_back(T[q] / r[q]);
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

struct WaveRun {
  bool ok = true;
  std::string error;
  double theta0 = 0.0, theta_max = 0.0;
  double period = 0.0;
  int crossings = 0;
  int picard_max = 0;
  double seconds = 0.0;
};

WaveRun gravity_wave_run(double dt) {
  WaveRun out;
  const auto t0 = clk::now();
  const Model M(RunConfig::from_json(gravity_wave_config(6, 16, dt, 3600.0, "rk3")));
  State s = M.initial_state();
  nlohmann::json bg = {{"delta_theta_K", 0.0}};
  const Eigen::VectorXd theta_bg = theta_points(M.thermo(), initial_state("gravity_wave", bg, M.thermo()));
  out.theta0 = max_abs(theta_points(M.thermo(), s) - theta_bg);
  std::vector<double> t, vp;
  const long steps = M.config().steps();
  const long every = std::max(1L, std::lround(60.0 / dt));
  try {
    for (long n = 0; n < steps; ++n) {
      LedgerRow r;
      const StepReport rep = M.step(s, &r);
      out.picard_max = std::max(out.picard_max, rep.picard.max_iterations);
      t.push_back(r.t);
      vp.push_back(r.x.vpow_KP);
      if ((n + 1) % every == 0) out.theta_max = std::max(out.theta_max, max_abs(theta_points(M.thermo(), s) - theta_bg));
    }
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.what();
  }
  // zero crossings by linear interpolation
  std::vector<double> zc;
  for (size_t i = 1; i < vp.size(); ++i)
    if ((vp[i - 1] < 0.0) != (vp[i] < 0.0)) zc.push_back(t[i - 1] + (t[i] - t[i - 1]) * vp[i - 1] / (vp[i - 1] - vp[i]));
  out.crossings = static_cast<int>(zc.size());
  if (zc.size() >= 3) out.period = 2.0 * (zc.back() - zc.front()) / static_cast<double>(zc.size() - 1);
  out.seconds = seconds_since(t0);
  return out;
}

Outcome gravity_wave() {
  const WaveRun a = gravity_wave_run(1.0);
  const WaveRun b = gravity_wave_run(2.0);
  const bool amplitude = a.theta_max <= 2.0 * a.theta0;
  const bool oscillatory = a.crossings >= 4 && b.crossings >= 4;
  const double rel = a.period > 0.0 ? std::abs(b.period - a.period) / a.period : 1.0;
  const bool ok = a.ok && b.ok && amplitude && oscillatory && rel <= 0.1 && a.seconds <= 1800.0;
  std::string detail = fmt::format(
      "dt = 1 s: {:.0f} s wall, Picard max {} iterations, max |theta'| {:.3f} K vs initial {:.3f} K; vertical "
      "power: {} zero crossings, period {:.1f} s (dt = 2 s: {} crossings, period {:.1f} s, difference {:.1f}%)",
      a.seconds, a.picard_max, a.theta_max, a.theta0, a.crossings, a.period, b.crossings, b.period, 100.0 * rel);
  if (!a.ok) detail += "; dt = 1 s failed: " + a.error;
  if (!b.ok) detail += "; dt = 2 s failed: " + b.error;
  return {ok, detail};
}

struct Item {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Item> items = {
      {1, "discrete exactness", exactness},
      {2, "x-z slice incidence matrices", golden_matrices},
      {3, "commuting projections", commuting},
      {4, "kinetic-potential exchange", kinetic_potential},
      {5, "kinetic-internal exchange", kinetic_internal},
      {6, "mass conservation", mass},
      {7, "hydrostatic rest", hydrostatic_rest},
      {8, "Picard convergence", picard},
      {9, "Strang splitting order", strang_order},
      {10, "gravity wave", gravity_wave},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& it : items) {
    if (!selected.empty() && !selected.count(it.id)) continue;
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    fmt::print("{} [{}] {}: {}\n", o.pass ? "PASS" : "FAIL", it.id, it.name, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
