#pragma once

#include <fstream>
#include <string>

#include "mimetic/hdyn.hpp"
#include "mimetic/vdyn.hpp"

namespace mimetic {

struct Energies {
  double K = 0.0, P = 0.0, I = 0.0;
  double total() const { return K + P + I; }
};

// Exchange integrals, W.  The horizontal and vertical parts are summed.
struct Exchanges {
  double K2P = 0.0, P2K = 0.0, K2I = 0.0, I2K = 0.0;
  double vpow_PI = 0.0;  // vertical kinetic-to-internal power
  double vpow_KP = 0.0;  // vertical kinetic-to-potential power
};

struct LedgerRow {
  double t = 0.0;
  Energies e;
  Exchanges x;
};

// K = 1/2 U^T M u (written as 1/2 u^T N u), P = g z^T M^Q rho, I = (cv/cp) Pi^T M^Q Theta.
Energies energies(const Thermo& th, const State& s);

// Exchanges from the operator applications of a tendency evaluation.  Either
// part may be null.
Exchanges exchanges(const Thermo& th, const HorizontalDiag* h, const VerticalDiag* v);

// Defect of the skew-symmetric structure: |K2P + P2K| + |K2I + I2K| plus the
// rotational work |sum u^T R u|, relative to the largest exchange magnitude.
double bracket_audit(const Thermo& th, const Horizontal& H, const Vertical& V, const State& s);

double relative_balance(double a, double b);  // |a + b| / |a|, 0 when both vanish

class LedgerWriter {
 public:
  explicit LedgerWriter(const std::string& path);
  void write(const LedgerRow& r);
  static const char* header() { return "t,K,P,I,K2P,P2K,K2I,I2K,vpow_PI,vpow_KP"; }

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace mimetic
