#include "kg/evolve.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace kg {

State linear_flow(const State& X, double t, const Model& model) {
    const double m = model.params().m;
    State Y(model.dim());
    // hyperbolic mode: cosh/sinh via exponentials
    {
        const double ep = std::exp(m * t), en = 1.0 / ep;
        const double ch = 0.5 * (ep + en), sh = 0.5 * (ep - en);
        Y.a[0] = ch * X.a[0] + sh / m * X.b[0];
        Y.b[0] = m * sh * X.a[0] + ch * X.b[0];
    }
    for (std::size_t n = 1; n < model.dim(); ++n) {
        const double w = model.omega(n);
        const double c = std::cos(w * t), s = std::sin(w * t);
        Y.a[n] = c * X.a[n] + s / w * X.b[n];
        Y.b[n] = -w * s * X.a[n] + c * X.b[n];
    }
    return Y;
}

State strang_step(const State& X, const Model& model, double dt) {
    State Y = linear_flow(X, 0.5 * dt, model);
    State F = model.nonlinear_term(Y);
    for (std::size_t n = 0; n < model.dim(); ++n) Y.b[n] += dt * F.b[n];
    return linear_flow(Y, 0.5 * dt, model);
}

State step(const State& X, const Model& model, const SchemeConfig& scheme) {
    if (scheme.order == 2) return strang_step(X, model, scheme.dt);
    if (scheme.order != 4) throw std::invalid_argument("step: order must be 2 or 4");
    // triple-jump composition
    const double c = std::cbrt(2.0);
    const double w1 = 1.0 / (2.0 - c);
    const double w0 = -c / (2.0 - c);
    State Y = strang_step(X, model, w1 * scheme.dt);
    Y = strang_step(Y, model, w0 * scheme.dt);
    return strang_step(Y, model, w1 * scheme.dt);
}

Trajectory integrate(const State& X0, double T, const Model& model,
                     const SchemeConfig& scheme, int store_every) {
    if (T == 0.0) throw std::invalid_argument("integrate: T must be nonzero");
    if (store_every < 1) store_every = 1;
    SchemeConfig sc = scheme;
    const double sign = T > 0 ? 1.0 : -1.0;
    sc.dt = sign * std::fabs(scheme.dt);
    const std::size_t nsteps = std::size_t(std::llround(std::fabs(T) / std::fabs(sc.dt)));

    Trajectory traj;
    State X = X0;
    const double H0 = model.energy(X0);
    const double scale = std::max(1.0, std::fabs(H0));
    double t = 0.0;
    auto record = [&](double time, const State& s) {
        const double H = model.energy(s);
        if (std::fabs(H - H0) > scheme.drift_tolerance * scale)
            throw std::runtime_error("integrate: relative energy drift exceeded at t=" +
                                     std::to_string(time));
        traj.times.push_back(time);
        traj.states.push_back(s);
        traj.observables.push_back(
            {time, H, model.j_functional(s), hyperbolic_abs(s), model.norm_c(s)});
    };
    record(0.0, X);
    for (std::size_t i = 1; i <= nsteps; ++i) {
        X = step(X, model, sc);
        t = double(i) * sc.dt;
        if (i % std::size_t(store_every) == 0 || i == nsteps) record(t, X);
    }
    return traj;
}

AprioriReport apriori_bound_report(const Trajectory& traj, const Model& model) {
    if (traj.size() == 0) throw std::invalid_argument("apriori_bound_report: empty trajectory");
    const auto& par = model.params();
    const double H0 = traj.observables.front().H;
    AprioriReport rep;
    rep.bound = 2.0 * H0 + par.p / (par.p + 1.0) * std::pow(par.m, 2.0 + 2.0 / par.p);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const State& X = traj.states[i];
        double lhs = X.b[0] * X.b[0];
        for (std::size_t n = 1; n < model.dim(); ++n) {
            const double lam = model.spectrum().modes[n].lambda;
            lhs += X.b[n] * X.b[n] + lam * lam * X.a[n] * X.a[n];
        }
        if (lhs > rep.worst_lhs) {
            rep.worst_lhs = lhs;
            rep.worst_time = traj.times[i];
        }
    }
    rep.max_ratio = rep.bound > 0.0 ? rep.worst_lhs / rep.bound : 0.0;
    return rep;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "t,a0,b0,H,J,norm_c\n");
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto& o = traj.observables[i];
        const auto& s = traj.states[i];
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", traj.times[i], s.a[0], s.b[0],
                     o.H, o.J, o.xc_norm);
    }
    std::fclose(f);
}

void write_trajectory_binary(const Trajectory& traj, const Model& model,
                             const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    const std::uint64_t header[2] = {std::uint64_t(model.dim()), std::uint64_t(traj.size())};
    std::fwrite(header, sizeof(std::uint64_t), 2, f);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::fwrite(&traj.times[i], sizeof(double), 1, f);
        std::fwrite(traj.states[i].a.data(), sizeof(double), model.dim(), f);
        std::fwrite(traj.states[i].b.data(), sizeof(double), model.dim(), f);
    }
    std::fclose(f);
}

}  // namespace kg
