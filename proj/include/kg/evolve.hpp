#pragma once

#include <string>
#include <vector>

#include "kg/spectral.hpp"

namespace kg {

struct SchemeConfig {
    int order = 2;  // 2 or 4
    double dt = 1e-3;
    double drift_tolerance = 1e-6;  // relative energy drift bound
};

struct ObservableRow {
    double t = 0.0;
    double H = 0.0;
    double J = 0.0;
    double xh_abs = 0.0;
    double xc_norm = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<ObservableRow> observables;

    std::size_t size() const { return times.size(); }
};

// Exact flow of dX = Lambda X: elliptic modes rotate with frequency
// omega_n, mode 0 follows the hyperbolic cosh/sinh matrix with exponent m.
State linear_flow(const State& X, double t, const Model& model);

// Strang composition linear(dt/2) o kick(dt) o linear(dt/2); time-symmetric.
State strang_step(const State& X, const Model& model, double dt);

// One step of the configured scheme; order 4 is the triple-jump composition
// of the order-2 step.
State step(const State& X, const Model& model, const SchemeConfig& scheme);

// Integrate from 0 to T (T < 0 integrates backward). Samples are stored
// every store_every steps. Throws if the relative energy drift exceeds
// scheme.drift_tolerance, naming the first offending time.
Trajectory integrate(const State& X0, double T, const Model& model,
                     const SchemeConfig& scheme, int store_every = 1);

struct AprioriReport {
    double bound = 0.0;      // 2 H^0 + p/(p+1) m^{2+2/p}
    double worst_lhs = 0.0;  // max over samples of b0^2 + sum (b_k^2 + lambda_k^2 a_k^2)
    double worst_time = 0.0;
    double max_ratio = 0.0;  // worst_lhs / bound when bound > 0

    bool satisfied(double slack) const { return worst_lhs <= bound + slack; }
};

AprioriReport apriori_bound_report(const Trajectory& traj, const Model& model);

// CSV: header `t,a0,b0,H,J,norm_c`, 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

// Little-endian float64 dump: header {N, count} as uint64, then per sample
// t followed by the a-vector then the b-vector.
void write_trajectory_binary(const Trajectory& traj, const Model& model,
                             const std::string& path);

}  // namespace kg
