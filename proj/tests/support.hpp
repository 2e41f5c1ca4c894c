#pragma once

#include <Eigen/Core>
#include <memory>
#include <random>

#include "mimetic/cases.hpp"
#include "mimetic/energetics.hpp"
#include "mimetic/vdyn.hpp"

namespace testing_support {

using namespace mimetic;

inline MeshSpec plane_spec(int nx, int ny, int p, int nlev, double ztop, double Lx = 4000.0, double Ly = 3000.0) {
  MeshSpec s;
  s.backend = Backend::Plane;
  s.n = nx;
  s.ny = ny;
  s.p = p;
  s.Lx = Lx;
  s.Ly = Ly;
  s.z = uniform_levels(nlev, ztop);
  return s;
}

inline MeshSpec sphere_spec(int n, int p, int nlev, double ztop, double radius = 6371220.0) {
  MeshSpec s;
  s.backend = Backend::Sphere;
  s.n = n;
  s.p = p;
  s.radius = radius;
  s.z = uniform_levels(nlev, ztop);
  return s;
}

// Mesh, operators and thermodynamics bundled for tests.
struct Setup {
  std::unique_ptr<Mesh> mesh;
  std::unique_ptr<Assembly> A;
  std::unique_ptr<Thermo> th;

  explicit Setup(const MeshSpec& spec, MassSolver solver = MassSolver::Direct, double cg_tol = 1e-12,
                 Constants c = Constants{}) {
    mesh = std::make_unique<Mesh>(spec);
    A = std::make_unique<Assembly>(*mesh, solver, cg_tol);
    th = std::make_unique<Thermo>(*A, c);
  }
};

inline State constant_state(const Assembly& A, double rho, double theta) {
  State s = State::zeros(A);
  s.rho = project_Q(A, [=](const Eigen::Vector3d&, double) { return rho; });
  s.Theta = project_Q(A, [=](const Eigen::Vector3d&, double) { return rho * theta; });
  return s;
}

inline double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing_support
