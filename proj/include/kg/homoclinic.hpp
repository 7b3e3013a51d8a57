#pragma once

#include <array>
#include <vector>

#include "kg/spectral.hpp"

namespace kg {

// Closed-form homoclinic orbit of the planar system
//   da0 = b0,  db0 = m^2 a0 - a0^{2p+1},
// alpha(t) = m^{1/p} (p+1)^{1/(2p)} / cosh(p m t)^{1/p},  beta = d/dt alpha.
// Evaluated through exponential forms, stable for |t| up to hundreds of 1/m.
double alpha(double t, const ModelParams& params);
double beta(double t, const ModelParams& params);

// d/dt beta = m^2 alpha - alpha^{2p+1} (closed form, used for the sigma
// normalization of the linearized basis).
double beta_dot(double t, const ModelParams& params);

// h(t) = (alpha, beta) embedded with zero elliptic part.
State homoclinic_state(double t, const Model& model);

// Stationary solutions: {0, +m^{1/p}, -m^{1/p}}.
std::array<double, 3> equilibria(const ModelParams& params);

// Planar energy 1/2 (b^2 - m^2 a^2) + a^{2p+2}/(2p+2); zero on the homoclinic.
double planar_energy(double a0, double b0, const ModelParams& params);

struct PlanarOrbit {
    std::vector<double> t, a0, b0, energy;
};

// K_eta trajectory from (eta, 0), integrated with the reversible splitting
// scheme restricted to mode 0. Throws if the planar energy drifts by more
// than energy_tol.
PlanarOrbit planar_orbit(double eta, const Model& model, double T, double dt,
                         double energy_tol = 1e-8);

}  // namespace kg
