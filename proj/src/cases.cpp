#include "mimetic/cases.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mimetic/errors.hpp"
#include "mimetic/params.hpp"
#include "mimetic/vdyn.hpp"

namespace mimetic {

namespace {

constexpr double pi = std::numbers::pi;

// Gauss-Lobatto points and weights on [0, 1] for layer averages.
const Quadrature& layer_rule() {
  static const Quadrature q = [] {
    Quadrature r = gll_quadrature(5);
    for (auto& x : r.x) x = 0.5 * (x + 1.0);
    for (auto& w : r.w) w *= 0.5;
    return r;
  }();
  return q;
}

}  // namespace

double longitude(const Eigen::Vector3d& X) { return std::atan2(X.y(), X.x()); }
double latitude(const Eigen::Vector3d& X) { return std::asin(std::clamp(X.z() / X.norm(), -1.0, 1.0)); }

Eigen::VectorXd project_Q(const Assembly& A, const ScalarField& f) {
  const Mesh& m = A.mesh();
  const int L = m.nlev(), N2 = A.n_cells(), nc = A.ncl(), nqp = m.nqp();
  const Quadrature& lr = layer_rule();
  Eigen::VectorXd out(static_cast<Eigen::Index>(N2) * L);
  std::vector<double> v(nqp);
  Eigen::VectorXd wk(nc);
  for (int k = 0; k < L; ++k)
    for (int e = 0; e < m.nelem(); ++e) {
      for (int q = 0; q < nqp; ++q) {
        double s = 0.0;
        for (size_t r = 0; r < lr.x.size(); ++r) s += lr.w[r] * f(m.X(e, q), m.z(k) + lr.x[r] * m.h(k));
        v[q] = s;
      }
      A.cell_weak(v.data(), wk.data());
      out.segment(static_cast<Eigen::Index>(N2) * k + static_cast<Eigen::Index>(e) * nc, nc) = m.h(k) * (A.MC_inv(e) * wk);
    }
  return out;
}

Eigen::VectorXd project_Upar(const Assembly& A, const VectorField& f) {
  const Mesh& m = A.mesh();
  const int L = m.nlev(), N1 = A.n_edges(), nqp = m.nqp();
  const Quadrature& lr = layer_rule();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N1, L);
  std::vector<double> fx(nqp), fy(nqp);
  Eigen::Vector3d east, north;
  for (int k = 0; k < L; ++k)
    for (int e = 0; e < m.nelem(); ++e) {
      for (int q = 0; q < nqp; ++q) {
        const Eigen::Vector3d& X = m.X(e, q);
        Eigen::Vector3d V = Eigen::Vector3d::Zero();
        for (size_t r = 0; r < lr.x.size(); ++r) V += lr.w[r] * f(X, m.z(k) + lr.x[r] * m.h(k));
        m.east_north(e, X, east, north);
        const Eigen::Vector2d g = m.Jh(e, q).transpose() * Eigen::Vector2d(east.dot(V), north.dot(V));
        fx[q] = g[0];
        fy[q] = g[1];
      }
      A.flux_weak(e, fx.data(), fy.data(), B.col(k).data());
    }
  A.solve_MU2(B);
  for (int k = 0; k < L; ++k) B.col(k) *= m.h(k);
  return Eigen::Map<Eigen::VectorXd>(B.data(), B.size());
}

Eigen::VectorXd project_Uperp(const Assembly& A, const ScalarField& f) {
  const Mesh& m = A.mesh();
  const int L = m.nlev(), N2 = A.n_cells(), nc = A.ncl(), nqp = m.nqp();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N2) * (L + 1));
  std::vector<double> v(nqp);
  Eigen::VectorXd wk(nc);
  for (int i = 1; i < L; ++i)
    for (int e = 0; e < m.nelem(); ++e) {
      for (int q = 0; q < nqp; ++q) v[q] = f(m.X(e, q), m.z(i));
      A.cell_weak(v.data(), wk.data());
      out.segment(static_cast<Eigen::Index>(N2) * i + static_cast<Eigen::Index>(e) * nc, nc) = A.MC_inv(e) * wk;
    }
  return out;
}

void perturb_theta(const Assembly& A, State& s, const ScalarField& rho_b, const ScalarField& theta_b,
                   const ScalarField& theta_prime) {
  s.rho -= project_Q(A, [&](const Eigen::Vector3d& X, double z) {
    const double tp = theta_prime(X, z);
    return rho_b(X, z) * tp / (theta_b(X, z) + tp);
  });
}

// ---------------------------------------------------------------------------
// Baroclinic wave

namespace {

struct BWProfile {
  double t1, t2, i1, i2;
};

BWProfile bw_profile(const BaroclinicWave& b, double z) {
  const double T0 = 0.5 * (b.T_equator + b.T_pole);
  const double K = b.jet_width;
  const double B = (T0 - b.T_pole) / (T0 * b.T_pole);
  const double C = 0.5 * (K + 2.0) * (b.T_equator - b.T_pole) / (b.T_equator * b.T_pole);
  const double H = b.c.R * T0 / b.c.g;
  const double s = z / (b.vertical_width * H), ex = std::exp(-s * s);
  const double el = std::exp(b.lapse_rate * z / T0);
  BWProfile r;
  r.t1 = el / T0 + B * (1.0 - 2.0 * s * s) * ex;
  r.t2 = C * (1.0 - 2.0 * s * s) * ex;
  r.i1 = (el - 1.0) / b.lapse_rate + B * z * ex;
  r.i2 = C * z * ex;
  return r;
}

double bw_shape(const BaroclinicWave& b, double lat) {
  const double cl = std::cos(lat), K = b.jet_width;
  return std::pow(cl, K) - K / (K + 2.0) * std::pow(cl, K + 2.0);
}

}  // namespace

double BaroclinicWave::temperature(double lat, double z) const {
  const BWProfile r = bw_profile(*this, z);
  return 1.0 / (r.t1 - r.t2 * bw_shape(*this, lat));
}

double BaroclinicWave::pressure(double lat, double z) const {
  const BWProfile r = bw_profile(*this, z);
  return p_surface * std::exp(-c.g / c.R * (r.i1 - r.i2 * bw_shape(*this, lat)));
}

double BaroclinicWave::theta(double lat, double z) const {
  return temperature(lat, z) * std::pow(c.p0 / pressure(lat, z), c.R / c.cp);
}

double BaroclinicWave::zonal_wind(double lat, double z) const {
  const BWProfile r = bw_profile(*this, z);
  const double cl = std::cos(lat), K = jet_width;
  const double U = c.g / radius * K * r.i2 * (std::pow(cl, K - 1.0) - std::pow(cl, K + 1.0)) * temperature(lat, z);
  const double oa = c.Omega * radius * cl;
  return -oa + std::sqrt(oa * oa + radius * cl * U);
}

Eigen::Vector2d BaroclinicWave::perturbation(double lon, double lat, double z) const {
  if (z >= perturbation_top) return Eigen::Vector2d::Zero();
  const double zr = z / perturbation_top;
  const double taper = 1.0 - 3.0 * zr * zr + 2.0 * zr * zr * zr;
  const double cg = std::sin(perturbation_lat) * std::sin(lat) +
                    std::cos(perturbation_lat) * std::cos(lat) * std::cos(lon - perturbation_lon);
  const double ang = std::acos(std::clamp(cg, -1.0, 1.0));
  const double d = radius * ang;
  if (d >= perturbation_radius || ang < 1e-12) return Eigen::Vector2d::Zero();
  const double x = pi * d / (2.0 * perturbation_radius);
  const double amp = 16.0 * perturbation_speed / (3.0 * std::sqrt(3.0)) * taper * std::pow(std::cos(x), 3) *
                     std::sin(x) / std::sin(ang);
  const double ue = -amp * (-std::sin(perturbation_lat) * std::cos(lat) +
                            std::cos(perturbation_lat) * std::sin(lat) * std::cos(lon - perturbation_lon));
  const double vn = amp * std::cos(perturbation_lat) * std::sin(lon - perturbation_lon);
  return {ue, vn};
}

// ---------------------------------------------------------------------------
// Initial states

namespace {

Eigen::Vector3d east_vector(const Eigen::Vector3d& X) {
  // unit east times cos(lat); smooth through the poles
  return Eigen::Vector3d(-X.y(), X.x(), 0.0) / X.norm();
}

Eigen::Vector3d from_east_north(const Eigen::Vector3d& X, double ue, double vn) {
  const Eigen::Vector3d r = X.normalized();
  Eigen::Vector3d east = Eigen::Vector3d::UnitZ().cross(r);
  if (east.norm() < 1e-14) return Eigen::Vector3d::Zero();
  east.normalize();
  return ue * east + vn * r.cross(east);
}

// Localized or layer-wide perturbation shape in [0, 1].
struct Shape {
  const Mesh* m = nullptr;
  double radius = 0.0, height = 0.0;
  Eigen::Vector3d center{0.0, 0.0, 0.0};  // plane: x, y, z; sphere: lon, lat, z

  double operator()(const Eigen::Vector3d& X, double z) const {
    if (radius <= 0.0) return std::sin(pi * z / m->z_top());
    double dh;
    if (m->backend() == Backend::Plane) {
      const auto& s = m->spec();
      double dx = std::remainder(X.x() - center[0], s.Lx), dy = std::remainder(X.y() - center[1], s.Ly);
      dh = std::hypot(dx, dy);
    } else {
      const double lon = longitude(X), lat = latitude(X);
      const double cg = std::sin(center[1]) * std::sin(lat) + std::cos(center[1]) * std::cos(lat) * std::cos(lon - center[0]);
      dh = m->radius() * std::acos(std::clamp(cg, -1.0, 1.0));
    }
    const double r = std::hypot(dh / radius, (z - center[2]) / height);
    if (r >= 1.0) return 0.0;
    const double c = std::cos(0.5 * pi * r);
    return c * c;
  }
};

// Reads the perturbation keys shared by the hydrostatic cases and applies them.
void apply_perturbation(Params& P, const Thermo& th, State& s, const Atmosphere& atm, double def_amp,
                        bool def_localized) {
  const Assembly& A = th.assembly();
  const Mesh& m = A.mesh();
  const double amp = P.number("theta_amplitude_K", def_amp);
  const double wamp = P.number("w_amplitude_m_per_s", 0.0);
  Shape sh;
  sh.m = &m;
  const double def_r = def_localized ? 0.2 * (m.backend() == Backend::Plane ? m.spec().Lx : m.radius()) : 0.0;
  sh.radius = P.number("bubble_radius_m", def_r);
  sh.height = P.number("bubble_height_m", def_localized ? 0.25 * m.z_top() : sh.radius);
  if (sh.radius < 0.0 || (sh.radius > 0.0 && !(sh.height > 0.0)))
    fail(ErrorKind::Config, "bubble radius and height must be positive");
  std::vector<double> def_c = m.backend() == Backend::Plane
                                  ? std::vector<double>{0.5 * m.spec().Lx, 0.5 * m.spec().Ly, 0.3 * m.z_top()}
                                  : std::vector<double>{0.0, 0.0, 0.3 * m.z_top()};
  const auto c = P.numbers("bubble_center", def_c);
  if (c.size() != 3) fail(ErrorKind::Config, "bubble_center needs three entries");
  sh.center = Eigen::Vector3d(c[0], c[1], c[2]);
  if (amp != 0.0)
    perturb_theta(
        A, s, [&](const Eigen::Vector3d&, double z) { return atm.density(z); },
        [&](const Eigen::Vector3d&, double z) { return atm.theta(z); },
        [&](const Eigen::Vector3d& X, double z) { return amp * sh(X, z); });
  if (wamp != 0.0) s.w = project_Uperp(A, [&](const Eigen::Vector3d& X, double z) { return wamp * sh(X, z); });
}

State isothermal_rest(Params& P, const Thermo& th) {
  const double T0 = P.number("temperature_K", 300.0);
  const double ps = P.number("surface_pressure_Pa", th.constants().p0);
  if (!(T0 > 0.0)) fail(ErrorKind::Config, "temperature_K must be > 0");
  const Atmosphere atm([T0](double) { return T0; }, ps, th.constants());
  State s = hydrostatic_state(th, atm);
  apply_perturbation(P, th, s, atm, 0.0, false);
  return s;
}

State standard_atmosphere(Params& P, const Thermo& th) {
  const double Ts = P.number("surface_temperature_K", 288.15);
  const double lapse = P.number("lapse_rate_K_per_m", 0.0065);
  const double ztp = P.number("tropopause_m", 11000.0);
  const double ps = P.number("surface_pressure_Pa", 101325.0);
  if (!(Ts - lapse * ztp > 0.0)) fail(ErrorKind::Config, "standard atmosphere has non-positive temperature");
  const Atmosphere atm([=](double z) { return Ts - lapse * std::min(z, ztp); }, ps, th.constants());
  State s = hydrostatic_state(th, atm);
  apply_perturbation(P, th, s, atm, 0.0, false);
  return s;
}

State neutral_bubble(Params& P, const Thermo& th) {
  const Constants& c = th.constants();
  const double th0 = P.number("theta_K", 300.0);
  const double ps = P.number("surface_pressure_Pa", c.p0);
  const double ps_exner = std::pow(ps / c.p0, c.R / c.cp);
  const Atmosphere atm([=](double z) { return th0 * (ps_exner - c.g * z / (c.cp * th0)); }, ps, c);
  State s = hydrostatic_state(th, atm);
  apply_perturbation(P, th, s, atm, 2.0, true);
  return s;
}

State gravity_wave(Params& P, const Thermo& th) {
  const Assembly& A = th.assembly();
  const Mesh& m = A.mesh();
  const Constants& c = th.constants();
  if (m.backend() != Backend::Sphere) fail(ErrorKind::Config, "gravity_wave needs the sphere backend");
  const double u0 = P.number("u0_m_per_s", 20.0);
  const double N = P.number("N_per_s", 0.01);
  const double Teq = P.number("Teq_K", 300.0);
  const double peq = P.number("peq_Pa", 1.0e5);
  const double d = P.number("d_m", 5000.0);
  const double lc = P.number("lambda_c_rad", 2.0 * pi / 3.0);
  const double pc = P.number("phi_c_rad", 0.0);
  const double dth = P.number("delta_theta_K", 1.0);
  const double Lz = P.number("Lz_m", 20000.0);
  if (!(N > 0.0) || !(d > 0.0) || !(Lz > 0.0)) fail(ErrorKind::Config, "gravity_wave: N, d and Lz must be > 0");
  const double a = m.radius(), g = c.g, kap = c.R / c.cp;
  const double G = g * g / (N * N * c.cp);
  auto Ts = [=](double lat) {
    return G + (Teq - G) * std::exp(-u0 * N * N / (4.0 * g * g) * (u0 + 2.0 * c.Omega * a) * (std::cos(2.0 * lat) - 1.0));
  };
  auto ps = [=](double lat) {
    return peq * std::exp(u0 / (4.0 * G * c.R) * (u0 + 2.0 * c.Omega * a) * (std::cos(2.0 * lat) - 1.0)) *
           std::pow(Ts(lat) / Teq, 1.0 / kap);
  };
  auto p = [=](double lat, double z) {
    const double t = Ts(lat);
    return ps(lat) * std::pow(G / t * std::exp(-N * N * z / g) + 1.0 - G / t, 1.0 / kap);
  };
  auto Tb = [=](double lat, double z) {
    const double ez = std::exp(N * N * z / g);
    return G * (1.0 - ez) + Ts(lat) * ez;
  };
  auto theta_b = [=](const Eigen::Vector3d& X, double z) {
    const double lat = latitude(X);
    return Ts(lat) * std::pow(c.p0 / ps(lat), kap) * std::exp(N * N * z / g);
  };
  auto rho_b = [=](const Eigen::Vector3d& X, double z) {
    const double lat = latitude(X);
    return p(lat, z) / (c.R * Tb(lat, z));
  };
  auto theta_p = [=](const Eigen::Vector3d& X, double z) {
    const double lon = longitude(X), lat = latitude(X);
    const double cg = std::sin(pc) * std::sin(lat) + std::cos(pc) * std::cos(lat) * std::cos(lon - lc);
    const double r = a * std::acos(std::clamp(cg, -1.0, 1.0));
    return dth * d * d / (d * d + r * r) * std::sin(2.0 * pi * z / Lz);
  };
  State s = State::zeros(A);
  s.rho = project_Q(A, rho_b);
  s.Theta = project_Q(A, [&](const Eigen::Vector3d& X, double z) { return rho_b(X, z) * theta_b(X, z); });
  rebalance_columns(th, s);
  perturb_theta(A, s, rho_b, theta_b, theta_p);
  if (u0 != 0.0) s.u = project_Upar(A, [=](const Eigen::Vector3d& X, double) { return Eigen::Vector3d(u0 * east_vector(X)); });
  return s;
}

State baroclinic_wave(Params& P, const Thermo& th) {
  const Assembly& A = th.assembly();
  const Mesh& m = A.mesh();
  if (m.backend() != Backend::Sphere) fail(ErrorKind::Config, "baroclinic_wave needs the sphere backend");
  BaroclinicWave b;
  b.c = th.constants();
  b.radius = m.radius();
  b.T_equator = P.number("T_equator_K", b.T_equator);
  b.T_pole = P.number("T_pole_K", b.T_pole);
  b.lapse_rate = P.number("lapse_rate_K_per_m", b.lapse_rate);
  b.jet_width = P.integer("jet_width", b.jet_width);
  b.vertical_width = P.number("vertical_width", b.vertical_width);
  b.p_surface = P.number("surface_pressure_Pa", b.p_surface);
  b.perturbation_speed = P.number("perturbation_m_per_s", b.perturbation_speed);
  b.perturbation_radius = P.number("perturbation_radius_m", b.perturbation_radius);
  b.perturbation_top = P.number("perturbation_top_m", b.perturbation_top);
  b.perturbation_lon = P.number("perturbation_lon_rad", b.perturbation_lon);
  b.perturbation_lat = P.number("perturbation_lat_rad", b.perturbation_lat);
  if (!(b.lapse_rate > 0.0) || b.jet_width < 1 || !(b.perturbation_radius > 0.0) || !(b.perturbation_top > 0.0))
    fail(ErrorKind::Config, "baroclinic_wave: invalid parameters");
  State s = State::zeros(A);
  s.rho = project_Q(A, [&](const Eigen::Vector3d& X, double z) { return b.density(latitude(X), z); });
  s.Theta = project_Q(A, [&](const Eigen::Vector3d& X, double z) {
    const double lat = latitude(X);
    return b.density(lat, z) * b.theta(lat, z);
  });
  rebalance_columns(th, s);
  s.u = project_Upar(A, [&](const Eigen::Vector3d& X, double z) {
    const double lon = longitude(X), lat = latitude(X);
    const Eigen::Vector2d pp = b.perturbation(lon, lat, z);
    return Eigen::Vector3d(b.zonal_wind(lat, z) * east_vector(X) + from_east_north(X, pp[0], pp[1]));
  });
  return s;
}

// Sum of a few random smooth modes, scaled to roughly unit amplitude.
struct RandomModes {
  std::vector<Eigen::Vector3d> k;
  std::vector<double> phase, amp;

  RandomModes(std::mt19937_64& rng, const Mesh& m, int n) {
    std::uniform_real_distribution<double> U(0.0, 2.0 * pi), A(0.5, 1.0);
    std::uniform_int_distribution<int> I(-2, 2);
    for (int i = 0; i < n; ++i) {
      Eigen::Vector3d kk;
      if (m.backend() == Backend::Plane) {
        int kx = I(rng), ky = I(rng);
        if (kx == 0 && ky == 0) kx = 1;
        kk = Eigen::Vector3d(2.0 * pi * kx / m.spec().Lx, 2.0 * pi * ky / m.spec().Ly, 0.0);
      } else {
        kk = Eigen::Vector3d(I(rng), I(rng), I(rng)) / m.radius();
        if (kk.norm() == 0.0) kk = Eigen::Vector3d(1.0, 0.0, 0.0) / m.radius();
      }
      k.push_back(kk);
      phase.push_back(U(rng));
      amp.push_back(A(rng) / n);
    }
  }
  double operator()(const Eigen::Vector3d& X) const {
    double s = 0.0;
    for (size_t i = 0; i < k.size(); ++i) s += amp[i] * std::sin(k[i].dot(X) + phase[i]);
    return s;
  }
};

State random_smooth(Params& P, const Thermo& th) {
  const Assembly& A = th.assembly();
  const Mesh& m = A.mesh();
  const double T0 = P.number("temperature_K", 300.0);
  const int seed = P.integer("seed", 1);
  const int modes = P.integer("modes", 3);
  const double ua = P.number("u_amplitude_m_per_s", 10.0);
  const double wa = P.number("w_amplitude_m_per_s", 0.1);
  const double ta = P.number("theta_amplitude_K", 1.0);
  const double pa = P.number("Theta_relative_amplitude", 1e-3);
  if (modes < 1) fail(ErrorKind::Config, "random_smooth: modes must be >= 1");
  const Atmosphere atm([T0](double) { return T0; }, th.constants().p0, th.constants());
  State s = hydrostatic_state(th, atm);
  std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
  const RandomModes fu(rng, m, modes), fv(rng, m, modes), fw(rng, m, modes), ft(rng, m, modes), fp(rng, m, modes);
  const double zt = m.z_top();
  s.u = project_Upar(A, [&](const Eigen::Vector3d& X, double z) {
    const double vert = 1.0 + 0.3 * std::cos(pi * z / zt);
    Eigen::Vector3d V(fu(X), fv(X), ft(X));
    if (m.backend() == Backend::Plane) V.z() = 0.0;
    return Eigen::Vector3d(ua * vert * V);
  });
  s.w = project_Uperp(A, [&](const Eigen::Vector3d& X, double z) {
    return wa * (0.5 + fw(X)) * std::sin(pi * z / zt);
  });
  perturb_theta(
      A, s, [&](const Eigen::Vector3d&, double z) { return atm.density(z); },
      [&](const Eigen::Vector3d&, double z) { return atm.theta(z); },
      [&](const Eigen::Vector3d& X, double z) { return ta * ft(X) * std::sin(pi * z / zt); });
  // pressure perturbation through Theta itself
  s.Theta += project_Q(A, [&](const Eigen::Vector3d& X, double z) {
    return pa * atm.density(z) * atm.theta(z) * fp(X) * std::cos(0.5 * pi * z / zt);
  });
  return s;
}

}  // namespace

State initial_state(const std::string& name, const nlohmann::json& params, const Thermo& th) {
  Params P(params, "case");
  State s;
  if (name == "isothermal_rest")
    s = isothermal_rest(P, th);
  else if (name == "standard_atmosphere")
    s = standard_atmosphere(P, th);
  else if (name == "neutral_bubble")
    s = neutral_bubble(P, th);
  else if (name == "gravity_wave")
    s = gravity_wave(P, th);
  else if (name == "baroclinic_wave")
    s = baroclinic_wave(P, th);
  else if (name == "random_smooth")
    s = random_smooth(P, th);
  else
    fail(ErrorKind::Config, "unknown test case '" + name + "'");
  P.finish();
  check_finite(s, "initial state");
  return s;
}

}  // namespace mimetic
