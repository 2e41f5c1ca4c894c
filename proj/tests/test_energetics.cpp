#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mimetic/errors.hpp"
#include "support.hpp"

using namespace mimetic;
using namespace testing_support;

TEST_CASE("energies of uniform states have closed forms") {
  const double Lx = 4000.0, Ly = 3000.0, zt = 2000.0;
  const int L = 4;
  Setup S(plane_spec(2, 2, 3, L, zt, Lx, Ly));
  const Constants c;
  const double rho = 1.2, theta = 300.0, U = 7.0, W = 0.3;
  State s = constant_state(*S.A, rho, theta);
  s.u = project_Upar(*S.A, [=](const Eigen::Vector3d&, double) { return Eigen::Vector3d(U, -U, 0.0); });
  s.w = project_Uperp(*S.A, [=](const Eigen::Vector3d&, double) { return W; });
  const Energies E = energies(*S.th, s);
  const double area = Lx * Ly, h = zt / L;
  // P = g rho A zt^2 / 2 exactly, since sum_k h zmid_k = zt^2 / 2
  CHECK(E.P == doctest::Approx(c.g * rho * area * zt * zt / 2.0).epsilon(1e-13));
  // I = c_v p V / R
  const double p = c.p0 * std::pow(c.R * rho * theta / c.p0, c.cp / c.cv());
  CHECK(E.I == doctest::Approx(c.cv() * p * area * zt / c.R).epsilon(1e-12));
  // horizontal part over the whole volume, vertical part over the interior interface weights
  const double K = 0.5 * rho * 2.0 * U * U * area * zt + 0.5 * rho * W * W * area * (zt - h);
  CHECK(E.K == doctest::Approx(K).epsilon(1e-12));
  CHECK(E.total() == doctest::Approx(E.K + E.P + E.I));
}

TEST_CASE("exchange terms cancel pairwise on random smooth states") {
  for (auto spec : {sphere_spec(2, 3, 5, 10000.0), plane_spec(3, 2, 3, 4, 4000.0)}) {
    Setup S(spec);
    for (int seed : {1, 2, 3}) {
      const State s = initial_state("random_smooth", {{"seed", seed}}, *S.th);
      HorizontalOptions ho;
      ho.f0 = 1e-4;
      const Horizontal H(*S.th, ho);
      const Vertical V(*S.th, VerticalOptions{});
      HorizontalDiag hd;
      VerticalDiag vd;
      HTendency ht;
      VTendency vt;
      H.tendency(s, ht, &hd);
      V.tendency(s, vt, &vd);
      const Exchanges xh = exchanges(*S.th, &hd, nullptr), xv = exchanges(*S.th, nullptr, &vd);
      const Exchanges x = exchanges(*S.th, &hd, &vd);
      // flat layers: no horizontal exchange with the potential energy
      CHECK(xh.K2P == 0.0);
      CHECK(std::abs(xh.P2K) <= 1e-12 * std::abs(x.K2P));
      CHECK(relative_balance(x.K2P, x.P2K) <= 1e-12);
      CHECK(relative_balance(xv.K2P, xv.P2K) <= 1e-12);
      CHECK(relative_balance(xh.K2I, xh.I2K) <= 1e-10);
      CHECK(relative_balance(xv.K2I, xv.I2K) <= 1e-10);
      CHECK(relative_balance(x.K2I, x.I2K) <= 1e-10);
      CHECK(xv.vpow_KP == xv.K2P);
      CHECK(xv.vpow_PI == xv.K2I);
      CHECK(xh.vpow_KP == 0.0);
      CHECK(std::abs(xv.K2P) > 0.0);
      CHECK(bracket_audit(*S.th, H, V, s) <= 1e-10);
    }
  }
}

TEST_CASE("relative balance handles zeros") {
  CHECK(relative_balance(0.0, 0.0) == 0.0);
  CHECK(relative_balance(2.0, -2.0) == 0.0);
  CHECK(relative_balance(2.0, -1.0) == doctest::Approx(0.5));
}

TEST_CASE("ledger file has the fixed header and full precision rows") {
  const auto path = std::filesystem::temp_directory_path() / "mimetic_ledger_test.csv";
  {
    LedgerWriter w(path.string());
    LedgerRow r;
    r.t = 1.5;
    r.e.K = 1.0 / 3.0;
    r.x.vpow_KP = -2.0;
    w.write(r);
    r.e.P = std::nan("");
    CHECK_THROWS_AS(w.write(r), Error);
  }
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "t,K,P,I,K2P,P2K,K2I,I2K,vpow_PI,vpow_KP");
  CHECK(row == "1.5,0.33333333333333331,0,0,0,0,0,0,0,-2");
  std::filesystem::remove(path);
  CHECK_THROWS_AS(LedgerWriter("/nonexistent-dir/x.csv"), Error);
}
