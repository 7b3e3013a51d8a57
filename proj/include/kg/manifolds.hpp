#pragma once

#include <vector>

#include "kg/linearized.hpp"
#include "kg/spectral.hpp"

namespace kg {

// Bookkeeping parameters of the truncated constructions: amplitude scale
// epsilon, cutoff radius delta = epsilon^{3/2}, decay rate 0 < r < m,
// window time t_eps = (4/m) ln(1/epsilon), finite horizon and solver
// tolerances.
struct TruncationConfig {
    double epsilon = 1e-2;
    double r = 0.25;
    double T_horizon = 40.0;
    double fp_tol = 1e-9;
    double shoot_tol = 1e-16;
    double dt = 1e-3;     // shooting / direct-integration step
    double fp_dt = 2e-3;  // fixed-point grid step
    double dc_radius = 1.0;

    double delta() const;
    double t_eps(double m) const;
    void validate(double m) const;  // throws unless 0 < r < m etc.
};

// Smooth monotone cutoff: exactly 1 below delta, exactly 0 above 2*delta,
// C^2 smoothstep in between (0.5 at s = 1.5*delta).
double cutoff_theta(double s, double delta);

// Truncated quadratic remainder of the linearization around h:
//   N(Z) = F(Z') - F(h(t)) - dF[h(t)] Z'   with Z' = Z * theta(||Z_c||).
// delta <= 0 disables the cutoff. Output sits in the b-slot.
State truncated_nonlinearity(const State& Z, double t, const Model& model, double delta);

// RK4 integration of the deviation equation dZ = L^t Z + N(Z) from t0 to
// t1 (either direction); returns the states on the step grid.
std::vector<State> integrate_deviation(const State& Z0, double t0, double t1,
                                       const Model& model, double delta, double dt);

enum class CsMethod { shooting, fixed_point };

struct CenterStableSolution {
    State V_c;
    double V_s = 0.0;
    double V_u = 0.0;  // solved-for unstable coefficient <Z_h(0), rho*(0)>
    std::vector<double> times;
    std::vector<State> Z;
    double sup_Zh = 0.0;       // over [0, T_horizon]
    double sup_Zc = 0.0;       // over [0, min(1/epsilon, T_horizon)]
    double ci_residual_s = 0.0;
    double ci_residual_c = 0.0;
    int iterations = 0;  // Picard iterations (fixed point) or bisections (shooting)

    std::size_t index_of(double t) const;
};

// Exit-side classifier used by the shooting bisection: sign of
// <Z_h, rho*> at the first time |Z_h| > delta (or at T_horizon if the
// orbit never leaves the tube).
int shooting_classifier(const State& V_c, double V_s, double V_u, const Model& model,
                        const TruncationConfig& cfg, const HyperbolicBasis& basis);

// Center-stable solution with boundary data <Z_h(0), sigma*(0)> = V_s,
// Z_c(0) = V_c: bisection on V_u (shooting) or Picard iteration of the
// Duhamel map (fixed_point).
CenterStableSolution solve_center_stable(const State& V_c, double V_s, const Model& model,
                                         const TruncationConfig& cfg, CsMethod method);

struct CenterOrbit {
    std::vector<double> times;  // symmetric window [-T, T]
    std::vector<State> X;
    HyperbolicPoint psi;  // X_h(0)
    double sup_Xh = 0.0;
    double sup_Xc = 0.0;
    int iterations = 0;
};

// Orbit on the center manifold through center data V_c, by Picard
// iteration of the constant-coefficient Duhamel map on [-T, T].
CenterOrbit center_manifold_orbit(const State& V_c, const Model& model,
                                  const TruncationConfig& cfg);

// Parametrization Psi(V_c) = X_h(0) of the center manifold.
HyperbolicPoint center_manifold_psi(const State& V_c, const Model& model,
                                    const TruncationConfig& cfg);

struct LyapunovReport {
    double sup_Xc = 0.0;
    double sup_Xh = 0.0;
    double j_drift_rel = 0.0;
    double vc_norm = 0.0;
};

LyapunovReport lyapunov_within_wc(const State& V_c, const Model& model,
                                  const TruncationConfig& cfg);

struct ConvergenceReport {
    std::vector<double> t, d;  // distance to (Psi(X_c(t)), X_c(t))
    double fitted_rate = 0.0;
    double d_at_teps = 0.0;

    bool ok(double r) const { return fitted_rate >= r; }
};

// Diagnostic for the approach to the center manifold: samples late times
// t >= t_eps and fits the decay rate of d(t) = |X_h(t) - Psi(X_c(t))|.
ConvergenceReport convergence_to_wc(const CenterStableSolution& sol, const Model& model,
                                    const TruncationConfig& cfg);

struct HeteroclinicOrbit {
    std::vector<double> times;  // [-T, T]
    std::vector<State> X;
    double b_residual_at_zero = 0.0;
    double symmetry_mismatch = 0.0;  // reflection vs direct backward integration
    double tracking_sup = 0.0;       // sup_t ||u - alpha||_{H1} + ||du - beta||_{L2}
    HyperbolicPoint target_psi;      // asymptotic manifold point, hyperbolic part
    State target_c;                  // and its center data
};

// Reversible heteroclinic through symmetric center data (V_s = 0): solves
// the center-stable problem, checks X(0) = S X(0), extends to t < 0 and
// cross-validates the reflection against direct backward integration.
HeteroclinicOrbit reversible_heteroclinic(const State& V_c_symmetric, const Model& model,
                                          const TruncationConfig& cfg);

}  // namespace kg
