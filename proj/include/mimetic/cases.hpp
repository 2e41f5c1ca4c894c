#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>

#include "json.hpp"
#include "mimetic/state_thermo.hpp"

namespace mimetic {

// Physical fields sampled at a surface point X (3D; the plane lives in z = 0)
// and height z.
using ScalarField = std::function<double(const Eigen::Vector3d& X, double z)>;
// 3D vector; only the part tangent to the surface is used.
using VectorField = std::function<Eigen::Vector3d(const Eigen::Vector3d& X, double z)>;

// L2 projections onto the discrete spaces.  Q and U-parallel fields are
// averaged over each layer with a 5-point Gauss-Lobatto rule in z.
Eigen::VectorXd project_Q(const Assembly& A, const ScalarField& f);
Eigen::VectorXd project_Upar(const Assembly& A, const VectorField& f);
// Vertical velocity sampled on the interfaces; the two ends are left at zero.
Eigen::VectorXd project_Uperp(const Assembly& A, const ScalarField& f);

// Replace rho by rho - proj(rho_b theta' / (theta_b + theta')) keeping Theta,
// i.e. a potential temperature perturbation at fixed pressure.
void perturb_theta(const Assembly& A, State& s, const ScalarField& rho_b, const ScalarField& theta_b,
                   const ScalarField& theta_prime);

// Longitude and latitude of a sphere point.
double longitude(const Eigen::Vector3d& X);
double latitude(const Eigen::Vector3d& X);

// Closed-form baroclinic-wave background (shallow atmosphere).  Used by the
// initializer and by its balance tests.
struct BaroclinicWave {
  double T_equator = 310.0, T_pole = 240.0;  // K
  double lapse_rate = 0.005;                 // K m^-1
  int jet_width = 3;                         // K in the reference
  double vertical_width = 2.0;               // b
  double p_surface = 1.0e5;                  // Pa
  double radius = 6371220.0;                 // m
  double perturbation_speed = 1.0;           // m s^-1
  double perturbation_radius = 6.0e5;        // m
  double perturbation_top = 1.5e4;           // m
  double perturbation_lon = 0.3490658503988659;  // rad (pi/9)
  double perturbation_lat = 0.6981317007977318;  // rad (2 pi/9)
  Constants c;

  double temperature(double lat, double z) const;
  double pressure(double lat, double z) const;
  double density(double lat, double z) const { return pressure(lat, z) / (c.R * temperature(lat, z)); }
  double theta(double lat, double z) const;
  double zonal_wind(double lat, double z) const;
  // Perturbation wind (east, north), m s^-1.
  Eigen::Vector2d perturbation(double lon, double lat, double z) const;
};

// Named initial states.  Parameters come from the JSON object (unknown keys are
// a configuration error); see the README for each case's keys and defaults.
State initial_state(const std::string& name, const nlohmann::json& params, const Thermo& th);

}  // namespace mimetic
