#pragma once

#include <array>
#include <functional>
#include <vector>

#include "kg/spectral.hpp"

namespace kg {

using Vec2 = std::array<double, 2>;

// Fundamental pair of the hyperbolic linearization around the homoclinic,
//   dZ = [[0,1],[m^2 - (2p+1) alpha^{2p}(t), 0]] Z,
// with sigma(0) = (0,1) decaying and rho(0) = (1,0) growing, plus the dual
// pair sigma*, rho* from the constant Wronskian.
struct HyperbolicBasis {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<Vec2> sigma, rho, sigma_star, rho_star;
    double mu = 0.0;              // sigma = mu * (beta, beta_dot)
    double wronskian = 0.0;       // det[sigma rho], constant in t
    double wronskian_drift = 0.0; // max deviation over the sampled window

    std::size_t index_of(double time) const;
};

// Builds the pair on the grid {0, dt, ..., T_max}. sigma from the closed
// form, rho by RK4 integration. Throws if the Wronskian drifts by more
// than wronskian_tol.
HyperbolicBasis hyperbolic_basis(const ModelParams& params, double T_max, double dt,
                                 double wronskian_tol = 1e-9);

// Flow of the decoupled elliptic mode equation
//   dz = [[0,1],[-(lambda^2 - m^2) - (2p+1) alpha^{2p}(t), 0]] z
// from t0 to t1 (RK4, step dt). The potential can be disabled to recover
// the free rotation.
Vec2 mode_propagate(double lambda, Vec2 z0, double t0, double t1,
                    const ModelParams& params, double dt = 1e-3,
                    bool with_potential = true);

struct ModePath {
    double dt = 0.0;
    std::vector<double> t;
    std::vector<Vec2> z;
};

ModePath mode_path(double lambda, Vec2 z0, double t0, double t1,
                   const ModelParams& params, double dt = 1e-3);

// |z|_n = sqrt((lambda^2-m^2) x^2 + y^2), preserved by the free flow.
double mode_norm(double lambda, const Vec2& z, const ModelParams& params);

struct TorusInvariants {
    std::vector<double> a_plus, b_plus, c, omega;   // per elliptic mode
    std::vector<double> checkpoint_t;
    std::vector<double> checkpoint_residual;        // max over modes of |z(t) - S(t) z+|_n
};

// Scattering of the linearized center dynamics: per elliptic mode computes
// z+ = z(0) - (2p+1) int_0^inf S(-s) (0, alpha^{2p}(s) a_n(s)) ds by
// Simpson quadrature along the propagated path (truncated at T_trunc with
// an exponential tail bound), and the torus radii c_n.
TorusInvariants scatter_asymptotics(const State& Zc0, const Model& model, double T_trunc,
                                    double dt, double tail_tol = 1e-10);

// (2p+1) int_0^T alpha^{2p}; closed form for p = 1, Simpson otherwise.
// T < 0 is treated as +infinity.
double alpha_pow_integral(double T, const ModelParams& params);

struct Certificate {
    int k = 0;
    double bound = 2.0;  // 2^{k+1}
    std::vector<double> cut_times;
};

// Partition certificate: cut times T_1 < ... < T_k with exactly 1/2 of
// int |q| per interior segment and a tail <= 1/2; every solution of
// x'' = (-omega^2 + q(t)) x is bounded by 2^{k+1} in the (omega x, y) norm.
Certificate boundedness_certificate(const std::function<double(double)>& q_cumulative,
                                    double q_total);

}  // namespace kg
