#include "kg/linearized.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kg/homoclinic.hpp"

namespace kg {

namespace {

double alpha_pow(double t, const ModelParams& params) {
    const double a = alpha(t, params);
    double acc = 1.0;
    for (int j = 0; j < 2 * params.p; ++j) acc *= a;
    return acc;
}

// One RK4 step of z' = (z2, c(t) z1).
template <typename Coeff>
Vec2 rk4_step(const Vec2& z, double t, double dt, Coeff&& c) {
    auto f = [&](double tt, const Vec2& v) -> Vec2 { return {v[1], c(tt) * v[0]}; };
    const Vec2 k1 = f(t, z);
    const Vec2 k2 = f(t + 0.5 * dt, {z[0] + 0.5 * dt * k1[0], z[1] + 0.5 * dt * k1[1]});
    const Vec2 k3 = f(t + 0.5 * dt, {z[0] + 0.5 * dt * k2[0], z[1] + 0.5 * dt * k2[1]});
    const Vec2 k4 = f(t + dt, {z[0] + dt * k3[0], z[1] + dt * k3[1]});
    return {z[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            z[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
}

}  // namespace

std::size_t HyperbolicBasis::index_of(double time) const {
    const auto i = std::size_t(std::llround(time / dt));
    if (i >= t.size()) throw std::out_of_range("HyperbolicBasis: time beyond sampled window");
    return i;
}

HyperbolicBasis hyperbolic_basis(const ModelParams& params, double T_max, double dt,
                                 double wronskian_tol) {
    if (T_max <= 0.0 || dt <= 0.0)
        throw std::invalid_argument("hyperbolic_basis: need T_max, dt > 0");
    HyperbolicBasis hb;
    hb.dt = dt;
    hb.mu = 1.0 / beta_dot(0.0, params);  // = -1/(p m^2 alpha(0))
    const std::size_t n = std::size_t(std::ceil(T_max / dt)) + 1;

    auto coeff = [&](double t) { return params.m * params.m - (2 * params.p + 1) * alpha_pow(t, params); };

    hb.t.resize(n);
    hb.sigma.resize(n);
    hb.rho.resize(n);
    hb.sigma_star.resize(n);
    hb.rho_star.resize(n);

    Vec2 r = {1.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = double(i) * dt;
        hb.t[i] = t;
        hb.sigma[i] = {hb.mu * beta(t, params), hb.mu * beta_dot(t, params)};
        hb.rho[i] = r;
        if (i + 1 < n) r = rk4_step(r, t, dt, coeff);
    }

    hb.wronskian = hb.sigma[0][0] * hb.rho[0][1] - hb.sigma[0][1] * hb.rho[0][0];  // = -1
    for (std::size_t i = 0; i < n; ++i) {
        const double w = hb.sigma[i][0] * hb.rho[i][1] - hb.sigma[i][1] * hb.rho[i][0];
        hb.wronskian_drift = std::max(hb.wronskian_drift, std::fabs(w - hb.wronskian));
        // rows of [sigma rho]^{-1}
        hb.sigma_star[i] = {hb.rho[i][1] / hb.wronskian, -hb.rho[i][0] / hb.wronskian};
        hb.rho_star[i] = {-hb.sigma[i][1] / hb.wronskian, hb.sigma[i][0] / hb.wronskian};
    }
    if (hb.wronskian_drift > wronskian_tol)
        throw std::runtime_error("hyperbolic_basis: Wronskian drift " +
                                 std::to_string(hb.wronskian_drift) +
                                 " exceeds tolerance (dt too large)");
    return hb;
}

Vec2 mode_propagate(double lambda, Vec2 z0, double t0, double t1, const ModelParams& params,
                    double dt, bool with_potential) {
    const double m2 = params.m * params.m;
    const double om2 = lambda * lambda - m2;
    auto coeff = [&](double t) {
        return -om2 - (with_potential ? (2 * params.p + 1) * alpha_pow(t, params) : 0.0);
    };
    const double span = t1 - t0;
    if (span == 0.0) return z0;
    const std::size_t n = std::size_t(std::ceil(std::fabs(span) / dt));
    const double h = span / double(n);
    Vec2 z = z0;
    for (std::size_t i = 0; i < n; ++i) z = rk4_step(z, t0 + double(i) * h, h, coeff);
    return z;
}

ModePath mode_path(double lambda, Vec2 z0, double t0, double t1, const ModelParams& params,
                   double dt) {
    const double m2 = params.m * params.m;
    const double om2 = lambda * lambda - m2;
    auto coeff = [&](double t) { return -om2 - (2 * params.p + 1) * alpha_pow(t, params); };
    const std::size_t n = std::size_t(std::ceil((t1 - t0) / dt));
    const double h = (t1 - t0) / double(n);
    ModePath path;
    path.dt = h;
    path.t.resize(n + 1);
    path.z.resize(n + 1);
    Vec2 z = z0;
    for (std::size_t i = 0; i <= n; ++i) {
        path.t[i] = t0 + double(i) * h;
        path.z[i] = z;
        if (i < n) z = rk4_step(z, path.t[i], h, coeff);
    }
    return path;
}

double mode_norm(double lambda, const Vec2& z, const ModelParams& params) {
    const double om2 = lambda * lambda - params.m * params.m;
    return std::sqrt(om2 * z[0] * z[0] + z[1] * z[1]);
}

double alpha_pow_integral(double T, const ModelParams& params) {
    const double q = 2.0 * params.p + 1.0;
    if (params.p == 1) {
        // int_0^T alpha^2 = 2 m tanh(m T)
        const double tail = T < 0.0 ? 1.0 : std::tanh(params.m * T);
        return q * 2.0 * params.m * tail;
    }
    const double upper = T < 0.0 ? 100.0 / params.m : T;
    const std::size_t n = 2 * std::size_t(std::ceil(upper / 2e-3));
    const double h = upper / double(n);
    double s = alpha_pow(0.0, params) + alpha_pow(upper, params);
    for (std::size_t i = 1; i < n; ++i)
        s += (i % 2 ? 4.0 : 2.0) * alpha_pow(double(i) * h, params);
    return q * s * h / 3.0;
}

TorusInvariants scatter_asymptotics(const State& Zc0, const Model& model, double T_trunc,
                                    double dt, double tail_tol) {
    if (std::fabs(Zc0.a[0]) + std::fabs(Zc0.b[0]) != 0.0)
        throw std::invalid_argument("scatter_asymptotics: datum must have zero mode 0");
    const auto& params = model.params();
    const double tail = alpha_pow_integral(-1.0, params) - alpha_pow_integral(T_trunc, params);
    if (tail > tail_tol)
        throw std::runtime_error("scatter_asymptotics: tail " + std::to_string(tail) +
                                 " above tolerance; increase T_trunc");

    TorusInvariants out;
    const std::size_t dim = model.dim();
    out.a_plus.assign(dim, 0.0);
    out.b_plus.assign(dim, 0.0);
    out.c.assign(dim, 0.0);
    out.omega.assign(dim, 0.0);
    for (int j = 1; j <= 4; ++j) out.checkpoint_t.push_back(T_trunc * j / 4.0);
    out.checkpoint_residual.assign(out.checkpoint_t.size(), 0.0);

    const double q = 2.0 * params.p + 1.0;
    for (std::size_t n = 1; n < dim; ++n) {
        const double w = model.omega(n);
        out.omega[n] = w;
        if (Zc0.a[n] == 0.0 && Zc0.b[n] == 0.0) continue;
        const double lambda = model.spectrum().modes[n].lambda;
        ModePath path = mode_path(lambda, {Zc0.a[n], Zc0.b[n]}, 0.0, T_trunc, params, dt);
        // Simpson sum of S(-s) (0, alpha^{2p}(s) a_n(s)) componentwise
        std::size_t np = path.t.size();
        if (np % 2 == 0) np -= 1;  // even interval count
        double ix = 0.0, iy = 0.0;
        for (std::size_t i = 0; i < np; ++i) {
            const double s = path.t[i];
            const double g = alpha_pow(s, params) * path.z[i][0];
            const double wgt = (i == 0 || i == np - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            ix += wgt * (-g * std::sin(w * s) / w);
            iy += wgt * (g * std::cos(w * s));
        }
        ix *= path.dt / 3.0;
        iy *= path.dt / 3.0;
        const double ap = Zc0.a[n] - q * ix;
        const double bp = Zc0.b[n] - q * iy;
        out.a_plus[n] = ap;
        out.b_plus[n] = bp;
        out.c[n] = std::sqrt(w * w * ap * ap + bp * bp);
        for (std::size_t j = 0; j < out.checkpoint_t.size(); ++j) {
            const double tc = out.checkpoint_t[j];
            const std::size_t i = std::size_t(std::llround(tc / path.dt));
            const Vec2& z = path.z[std::min(i, path.z.size() - 1)];
            const Vec2 free = {ap * std::cos(w * tc) + bp / w * std::sin(w * tc),
                               -ap * w * std::sin(w * tc) + bp * std::cos(w * tc)};
            const double res = mode_norm(lambda, {z[0] - free[0], z[1] - free[1]}, params);
            out.checkpoint_residual[j] = std::max(out.checkpoint_residual[j], res);
        }
    }
    return out;
}

Certificate boundedness_certificate(const std::function<double(double)>& q_cumulative,
                                    double q_total) {
    if (!std::isfinite(q_total) || q_total < 0.0)
        throw std::invalid_argument("boundedness_certificate: q_total must be finite");
    Certificate cert;
    cert.k = std::max(0, int(std::ceil(2.0 * q_total - 1.0 - 1e-9)));
    cert.bound = std::ldexp(1.0, cert.k + 1);  // 2^{k+1}
    for (int j = 1; j <= cert.k; ++j) {
        const double target = 0.5 * j;
        double lo = cert.cut_times.empty() ? 0.0 : cert.cut_times.back();
        double hi = lo + 1.0;
        while (q_cumulative(hi) < target) {
            hi = lo + 2.0 * (hi - lo);
            if (hi > 1e12) throw std::runtime_error("boundedness_certificate: cut time diverges");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (q_cumulative(mid) < target ? lo : hi) = mid;
        }
        cert.cut_times.push_back(0.5 * (lo + hi));
    }
    return cert;
}

}  // namespace kg
