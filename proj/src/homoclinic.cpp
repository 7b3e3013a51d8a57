#include "kg/homoclinic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kg/evolve.hpp"

namespace kg {

namespace {
// sech(pmt)^{1/p} via exponentials; cosh overflows long before the
// integration windows of interest end.
double sech_pow(double t, const ModelParams& params) {
    const double s = params.p * params.m * std::fabs(t);
    const double E = std::exp(-2.0 * s);
    const double ip = 1.0 / double(params.p);
    return std::pow(2.0, ip) * std::exp(-s * ip) * std::pow(1.0 + E, -ip);
}

double amp(const ModelParams& params) {
    return std::pow(params.m, 1.0 / params.p) *
           std::pow(params.p + 1.0, 1.0 / (2.0 * params.p));
}
}  // namespace

double alpha(double t, const ModelParams& params) { return amp(params) * sech_pow(t, params); }

double beta(double t, const ModelParams& params) {
    const double s = params.p * params.m * t;
    const double E = std::exp(-2.0 * std::fabs(s));
    const double tanh_s = std::copysign((1.0 - E) / (1.0 + E), s);
    return -params.m * alpha(t, params) * tanh_s;
}

double beta_dot(double t, const ModelParams& params) {
    const double a = alpha(t, params);
    double apow = a;
    for (int j = 1; j < 2 * params.p + 1; ++j) apow *= a;
    return params.m * params.m * a - apow;
}

State homoclinic_state(double t, const Model& model) {
    State X(model.dim());
    X.a[0] = alpha(t, model.params());
    X.b[0] = beta(t, model.params());
    return X;
}

std::array<double, 3> equilibria(const ModelParams& params) {
    const double e = std::pow(params.m, 1.0 / params.p);
    return {0.0, e, -e};
}

double planar_energy(double a0, double b0, const ModelParams& params) {
    const int q = 2 * params.p + 2;
    double apow = 1.0;
    for (int j = 0; j < q; ++j) apow *= a0;
    return 0.5 * (b0 * b0 - params.m * params.m * a0 * a0) + apow / double(q);
}

PlanarOrbit planar_orbit(double eta, const Model& model, double T, double dt,
                         double energy_tol) {
    if (dt <= 0.0 || T <= 0.0) throw std::invalid_argument("planar_orbit: need dt, T > 0");
    SchemeConfig scheme;
    scheme.dt = dt;
    State X(model.dim());
    X.a[0] = eta;

    const double e0 = planar_energy(eta, 0.0, model.params());
    const std::size_t nsteps = std::size_t(std::ceil(T / dt));
    PlanarOrbit orbit;
    orbit.t.reserve(nsteps + 1);
    double t = 0.0;
    for (std::size_t i = 0;; ++i) {
        const double e = planar_energy(X.a[0], X.b[0], model.params());
        orbit.t.push_back(t);
        orbit.a0.push_back(X.a[0]);
        orbit.b0.push_back(X.b[0]);
        orbit.energy.push_back(e);
        if (std::fabs(e - e0) > energy_tol * std::max(1.0, std::fabs(e0)))
            throw std::runtime_error("planar_orbit: energy drift exceeds tolerance at t=" +
                                     std::to_string(t));
        if (i == nsteps) break;
        X = strang_step(X, model, dt);
        t += dt;
    }
    return orbit;
}

}  // namespace kg
