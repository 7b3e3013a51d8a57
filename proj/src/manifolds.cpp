#include "kg/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "kg/homoclinic.hpp"

namespace kg {

namespace {

double alpha_pow2p(double t, const ModelParams& params) {
    const double a = alpha(t, params);
    double acc = 1.0;
    for (int j = 0; j < 2 * params.p; ++j) acc *= a;
    return acc;
}

void axpy(State& y, double s, const State& x) {
    for (std::size_t n = 0; n < y.size(); ++n) {
        y.a[n] += s * x.a[n];
        y.b[n] += s * x.b[n];
    }
}

// Linearization around h plus the truncated remainder.
State deviation_rhs(double t, const State& Z, const Model& model, double delta) {
    const auto& par = model.params();
    const double m2 = par.m * par.m;
    const double pot = (2 * par.p + 1) * alpha_pow2p(t, par);
    State out = truncated_nonlinearity(Z, t, model, delta);
    out.b[0] += (m2 - pot) * Z.a[0];
    out.a[0] = Z.b[0];
    for (std::size_t n = 1; n < Z.size(); ++n) {
        const double w = model.omega(n);
        out.b[n] += (-w * w - pot) * Z.a[n];
        out.a[n] = Z.b[n];
    }
    return out;
}

State rk4_deviation_step(const State& Z, double t, double h, const Model& model, double delta) {
    State k1 = deviation_rhs(t, Z, model, delta);
    State y = Z;
    axpy(y, 0.5 * h, k1);
    State k2 = deviation_rhs(t + 0.5 * h, y, model, delta);
    y = Z;
    axpy(y, 0.5 * h, k2);
    State k3 = deviation_rhs(t + 0.5 * h, y, model, delta);
    y = Z;
    axpy(y, h, k3);
    State k4 = deviation_rhs(t + h, y, model, delta);
    y = Z;
    axpy(y, h / 6.0, k1);
    axpy(y, h / 3.0, k2);
    axpy(y, h / 3.0, k3);
    axpy(y, h / 6.0, k4);
    return y;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * double(n - k + j) / double(j);
    return r;
}

double lstsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double TruncationConfig::delta() const { return std::pow(epsilon, 1.5); }

double TruncationConfig::t_eps(double m) const { return 4.0 / m * std::log(1.0 / epsilon); }

void TruncationConfig::validate(double m) const {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("TruncationConfig: need 0 < epsilon < 1");
    if (!(r > 0.0 && r < m))
        throw std::invalid_argument("TruncationConfig: need 0 < r < m");
    if (!(T_horizon > 0.0 && dt > 0.0 && fp_dt > 0.0))
        throw std::invalid_argument("TruncationConfig: need positive horizon and steps");
}

double cutoff_theta(double s, double delta) {
    if (delta <= 0.0) return 1.0;
    const double x = (s - delta) / delta;
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    return 1.0 - x * x * (3.0 - 2.0 * x);
}

State truncated_nonlinearity(const State& Z, double t, const Model& model, double delta) {
    const auto& par = model.params();
    State out(Z.size());
    const double theta = cutoff_theta(model.norm_c(Z), delta);
    if (theta == 0.0) return out;

    std::vector<double> coeffs(Z.size());
    for (std::size_t n = 0; n < Z.size(); ++n) coeffs[n] = theta * Z.a[n];
    std::vector<double> u = model.synthesize(coeffs);

    // F(Z'+h) - F(h) - dF[h] Z' = -[(alpha+u)^q - alpha^q - q alpha^{q-1} u]
    // pointwise; summed via the binomial tail (j >= 2) to avoid cancellation.
    const int q = 2 * par.p + 1;
    const double al = alpha(t, par);
    std::vector<double> alpow(q + 1, 1.0);
    for (int j = 1; j <= q; ++j) alpow[j] = alpow[j - 1] * al;
    for (double& v : u) {
        double s = 0.0, upow = v * v;
        for (int j = 2; j <= q; ++j) {
            s += binomial(q, j) * alpow[q - j] * upow;
            upow *= v;
        }
        v = -s;
    }
    out.b = model.analyze(u);
    return out;
}

std::vector<State> integrate_deviation(const State& Z0, double t0, double t1,
                                       const Model& model, double delta, double dt) {
    const double span = t1 - t0;
    const std::size_t n = span == 0.0 ? 0 : std::size_t(std::llround(std::fabs(span) / dt));
    if (span != 0.0 && n == 0)
        throw std::invalid_argument("integrate_deviation: dt larger than the window");
    const double h = n ? span / double(n) : 0.0;
    std::vector<State> out;
    out.reserve(n + 1);
    out.push_back(Z0);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(rk4_deviation_step(out.back(), t0 + double(i) * h, h, model, delta));
    return out;
}

std::size_t CenterStableSolution::index_of(double t) const {
    if (times.size() < 2) throw std::out_of_range("CenterStableSolution: empty grid");
    const double dt = times[1] - times[0];
    const auto i = std::size_t(std::llround((t - times.front()) / dt));
    if (i >= times.size()) throw std::out_of_range("CenterStableSolution: time beyond grid");
    return i;
}

int shooting_classifier(const State& V_c, double V_s, double V_u, const Model& model,
                        const TruncationConfig& cfg, const HyperbolicBasis& basis) {
    const double delta = cfg.delta();
    State Z = project_c(V_c);
    Z.a[0] = V_u;  // rho(0) = (1,0)
    Z.b[0] = V_s;  // sigma(0) = (0,1)
    const std::size_t nsteps = std::size_t(std::llround(cfg.T_horizon / cfg.dt));
    std::size_t i = 0;
    while (i < nsteps && hyperbolic_abs(Z) <= delta) {
        Z = rk4_deviation_step(Z, double(i) * cfg.dt, cfg.dt, model, delta);
        ++i;
    }
    const Vec2& rs = basis.rho_star[basis.index_of(double(i) * cfg.dt)];
    const double proj = Z.a[0] * rs[0] + Z.b[0] * rs[1];
    return proj >= 0.0 ? 1 : -1;
}

namespace {

CenterStableSolution solve_shooting(const State& V_c, double V_s, const Model& model,
                                    const TruncationConfig& cfg) {
    const auto& par = model.params();
    const HyperbolicBasis basis = hyperbolic_basis(par, cfg.T_horizon + cfg.dt, cfg.dt);
    double lo = -cfg.epsilon, hi = cfg.epsilon;
    const int slo = shooting_classifier(V_c, V_s, lo, model, cfg, basis);
    const int shi = shooting_classifier(V_c, V_s, hi, model, cfg, basis);
    if (slo == shi)
        throw std::runtime_error(
            "solve_center_stable: endpoints classify identically; no bracket in "
            "[-epsilon, epsilon]");
    int iters = 0;
    while (hi - lo > cfg.shoot_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (shooting_classifier(V_c, V_s, mid, model, cfg, basis) == slo ? lo : hi) = mid;
        ++iters;
    }

    CenterStableSolution sol;
    sol.V_c = project_c(V_c);
    sol.V_s = V_s;
    sol.V_u = 0.5 * (lo + hi);
    sol.iterations = iters;

    State Z0 = sol.V_c;
    Z0.a[0] = sol.V_u;
    Z0.b[0] = V_s;
    sol.Z = integrate_deviation(Z0, 0.0, cfg.T_horizon, model, cfg.delta(), cfg.dt);
    sol.times.resize(sol.Z.size());
    const double dt = cfg.T_horizon / double(sol.Z.size() - 1);
    const double t_center = std::min(1.0 / cfg.epsilon, cfg.T_horizon);
    for (std::size_t i = 0; i < sol.Z.size(); ++i) {
        sol.times[i] = double(i) * dt;
        sol.sup_Zh = std::max(sol.sup_Zh, hyperbolic_abs(sol.Z[i]));
        if (sol.times[i] <= t_center) sol.sup_Zc = std::max(sol.sup_Zc, model.norm_c(sol.Z[i]));
    }
    sol.ci_residual_s = std::fabs(sol.Z[0].b[0] - V_s);
    State dc = project_c(sol.Z[0]);
    dc -= sol.V_c;
    sol.ci_residual_c = model.norm_c(dc);
    return sol;
}

using Mat2 = std::array<double, 4>;  // row-major

CenterStableSolution solve_fixed_point(const State& V_c, double V_s, const Model& model,
                                       const TruncationConfig& cfg) {
    const auto& par = model.params();
    const double T = cfg.T_horizon;
    const double h = cfg.fp_dt;
    const std::size_t n = std::size_t(std::llround(T / h)) + 1;
    const double delta = cfg.delta();
    const std::size_t dim = model.dim();

    const HyperbolicBasis basis = hyperbolic_basis(par, T + h, h, 1e-8);

    // Per-mode fundamental matrices K_md(t_i, 0) of the elliptic equations
    // with the alpha^{2p} potential; RK4 on substeps no larger than cfg.dt.
    const int nsub = std::max(1, int(std::ceil(h / cfg.dt - 1e-12)));
    std::vector<std::vector<Mat2>> K(dim);
    for (std::size_t md = 1; md < dim; ++md) {
        const double lambda = model.spectrum().modes[md].lambda;
        K[md].resize(n);
        Vec2 c1 = {1.0, 0.0}, c2 = {0.0, 1.0};
        K[md][0] = {1.0, 0.0, 0.0, 1.0};
        for (std::size_t i = 1; i < n; ++i) {
            const double t0 = double(i - 1) * h;
            c1 = mode_propagate(lambda, c1, t0, t0 + h, par, h / double(nsub));
            c2 = mode_propagate(lambda, c2, t0, t0 + h, par, h / double(nsub));
            K[md][i] = {c1[0], c2[0], c1[1], c2[1]};
        }
    }

    const State Vc = project_c(V_c);
    std::vector<State> Z(n), Znext(n);
    for (std::size_t i = 0; i < n; ++i) {
        Z[i] = State(dim);
        Z[i].a[0] = V_s * basis.sigma[i][0];
        Z[i].b[0] = V_s * basis.sigma[i][1];
        for (std::size_t md = 1; md < dim; ++md) {
            const Mat2& Ki = K[md][i];
            Z[i].a[md] = Ki[0] * Vc.a[md] + Ki[1] * Vc.b[md];
            Z[i].b[md] = Ki[2] * Vc.a[md] + Ki[3] * Vc.b[md];
        }
        Znext[i] = State(dim);
    }

    std::vector<double> g1(n), g2(n), A(n), B(n);
    std::vector<State> Nb(n);
    int iters = 0;
    for (;; ++iters) {
        if (iters > 500)
            throw std::runtime_error("solve_center_stable: Picard iteration did not converge");
        for (std::size_t i = 0; i < n; ++i) {
            Nb[i] = truncated_nonlinearity(Z[i], double(i) * h, model, delta);
            g1[i] = Nb[i].b[0] * basis.sigma_star[i][1];
            g2[i] = Nb[i].b[0] * basis.rho_star[i][1];
        }
        A[0] = 0.0;
        for (std::size_t i = 1; i < n; ++i) A[i] = A[i - 1] + 0.5 * h * (g1[i - 1] + g1[i]);
        B[n - 1] = 0.0;
        for (std::size_t i = n - 1; i-- > 0;) B[i] = B[i + 1] + 0.5 * h * (g2[i] + g2[i + 1]);

        for (std::size_t i = 0; i < n; ++i) {
            const double cs = V_s + A[i];
            Znext[i].a[0] = cs * basis.sigma[i][0] - B[i] * basis.rho[i][0];
            Znext[i].b[0] = cs * basis.sigma[i][1] - B[i] * basis.rho[i][1];
        }
        for (std::size_t md = 1; md < dim; ++md) {
            Vec2 cum = {0.0, 0.0}, vprev = {0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                const Mat2& Ki = K[md][i];
                const double det = Ki[0] * Ki[3] - Ki[1] * Ki[2];
                const double g = Nb[i].b[md];
                const Vec2 v = {-Ki[1] * g / det, Ki[0] * g / det};  // K^{-1} (0, g)
                if (i > 0) {
                    cum[0] += 0.5 * h * (vprev[0] + v[0]);
                    cum[1] += 0.5 * h * (vprev[1] + v[1]);
                }
                vprev = v;
                const double ca = Vc.a[md] + cum[0];
                const double cb = Vc.b[md] + cum[1];
                Znext[i].a[md] = Ki[0] * ca + Ki[1] * cb;
                Znext[i].b[md] = Ki[2] * ca + Ki[3] * cb;
            }
        }

        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            State D = Znext[i];
            D -= Z[i];
            diff = std::max(diff, model.state_norm(D));
        }
        Z.swap(Znext);
        if (diff < cfg.fp_tol) break;
    }

    CenterStableSolution sol;
    sol.V_c = Vc;
    sol.V_s = V_s;
    sol.V_u = Z[0].a[0];  // <Z_h(0), rho*(0)> with rho*(0) = (1, 0)
    sol.iterations = iters + 1;
    sol.Z = std::move(Z);
    sol.times.resize(n);
    const double t_center = std::min(1.0 / cfg.epsilon, T);
    for (std::size_t i = 0; i < n; ++i) {
        sol.times[i] = double(i) * h;
        sol.sup_Zh = std::max(sol.sup_Zh, hyperbolic_abs(sol.Z[i]));
        if (sol.times[i] <= t_center) sol.sup_Zc = std::max(sol.sup_Zc, model.norm_c(sol.Z[i]));
    }
    sol.ci_residual_s = std::fabs(sol.Z[0].b[0] - V_s);
    State dc = project_c(sol.Z[0]);
    dc -= Vc;
    sol.ci_residual_c = model.norm_c(dc);
    return sol;
}

}  // namespace

CenterStableSolution solve_center_stable(const State& V_c, double V_s, const Model& model,
                                         const TruncationConfig& cfg, CsMethod method) {
    cfg.validate(model.params().m);
    if (method == CsMethod::shooting) return solve_shooting(V_c, V_s, model, cfg);
    return solve_fixed_point(V_c, V_s, model, cfg);
}

CenterOrbit center_manifold_orbit(const State& V_c, const Model& model,
                                  const TruncationConfig& cfg) {
    cfg.validate(model.params().m);
    const double m = model.params().m;
    const double T = cfg.T_horizon;
    const double h = cfg.fp_dt;
    const std::size_t half = std::size_t(std::llround(T / h));
    const std::size_t n = 2 * half + 1;
    const std::size_t i0 = half;
    // the graph construction cuts off at the (much larger) chart radius,
    // not at the shadowing-tube width
    const double radius = cfg.dc_radius;
    const std::size_t dim = model.dim();

    // Equilibrium-frame hyperbolic solutions sigma0 e^{-mt}, rho0 e^{mt}
    // and their duals.
    const Vec2 sigma0 = {1.0, -m}, rho0 = {1.0, m};
    const double s0s_y = -1.0 / (2.0 * m);  // sigma0* = (1/2, -1/(2m))
    const double r0s_y = 1.0 / (2.0 * m);   // rho0*   = (1/2,  1/(2m))

    const State Vc = project_c(V_c);
    std::vector<double> t(n), emt(n), ept(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = (double(i) - double(i0)) * h;
        emt[i] = std::exp(-m * t[i]);
        ept[i] = std::exp(m * t[i]);
    }

    std::vector<State> X(n), Xnext(n);
    for (std::size_t i = 0; i < n; ++i) {
        X[i] = State(dim);
        Xnext[i] = State(dim);
        for (std::size_t md = 1; md < dim; ++md) {
            const double w = model.omega(md);
            const double c = std::cos(w * t[i]), s = std::sin(w * t[i]);
            X[i].a[md] = c * Vc.a[md] + s / w * Vc.b[md];
            X[i].b[md] = -w * s * Vc.a[md] + c * Vc.b[md];
        }
    }

    std::vector<State> F(n);
    std::vector<double> g1(n), g2(n), A(n), B(n);
    std::vector<Vec2> P(n);  // per-mode prefix integral, reused buffer
    int iters = 0;
    for (;; ++iters) {
        if (iters > 500)
            throw std::runtime_error("center_manifold_orbit: Picard iteration did not converge");
        for (std::size_t i = 0; i < n; ++i) {
            State scaled = X[i];
            scaled *= cutoff_theta(model.norm_c(X[i]), radius);
            F[i] = model.nonlinear_term(scaled);
            g1[i] = F[i].b[0] * s0s_y * ept[i];
            g2[i] = F[i].b[0] * r0s_y * emt[i];
        }
        A[0] = 0.0;
        for (std::size_t i = 1; i < n; ++i) A[i] = A[i - 1] + 0.5 * h * (g1[i - 1] + g1[i]);
        B[n - 1] = 0.0;
        for (std::size_t i = n - 1; i-- > 0;) B[i] = B[i + 1] + 0.5 * h * (g2[i] + g2[i + 1]);

        for (std::size_t i = 0; i < n; ++i) {
            Xnext[i].a[0] = emt[i] * A[i] * sigma0[0] - ept[i] * B[i] * rho0[0];
            Xnext[i].b[0] = emt[i] * A[i] * sigma0[1] - ept[i] * B[i] * rho0[1];
        }
        for (std::size_t md = 1; md < dim; ++md) {
            const double w = model.omega(md);
            Vec2 cum = {0.0, 0.0}, vprev = {0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                const double g = F[i].b[md];
                // R(-t_i) (0, g)
                const Vec2 v = {-std::sin(w * t[i]) * g / w, std::cos(w * t[i]) * g};
                if (i > 0) {
                    cum[0] += 0.5 * h * (vprev[0] + v[0]);
                    cum[1] += 0.5 * h * (vprev[1] + v[1]);
                }
                vprev = v;
                P[i] = cum;
            }
            const Vec2 base = P[i0];
            for (std::size_t i = 0; i < n; ++i) {
                const double ca = Vc.a[md] + (P[i][0] - base[0]);
                const double cb = Vc.b[md] + (P[i][1] - base[1]);
                const double c = std::cos(w * t[i]), s = std::sin(w * t[i]);
                Xnext[i].a[md] = c * ca + s / w * cb;
                Xnext[i].b[md] = -w * s * ca + c * cb;
            }
        }

        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            State D = Xnext[i];
            D -= X[i];
            diff = std::max(diff, model.state_norm(D));
        }
        X.swap(Xnext);
        if (diff < cfg.fp_tol) break;
    }

    CenterOrbit orbit;
    orbit.times = std::move(t);
    orbit.iterations = iters + 1;
    orbit.psi = {X[i0].a[0], X[i0].b[0]};
    for (std::size_t i = 0; i < n; ++i) {
        orbit.sup_Xh = std::max(orbit.sup_Xh, hyperbolic_abs(X[i]));
        orbit.sup_Xc = std::max(orbit.sup_Xc, model.norm_c(X[i]));
    }
    orbit.X = std::move(X);
    return orbit;
}

HyperbolicPoint center_manifold_psi(const State& V_c, const Model& model,
                                    const TruncationConfig& cfg) {
    return center_manifold_orbit(V_c, model, cfg).psi;
}

LyapunovReport lyapunov_within_wc(const State& V_c, const Model& model,
                                  const TruncationConfig& cfg) {
    const CenterOrbit orbit = center_manifold_orbit(V_c, model, cfg);
    LyapunovReport rep;
    rep.sup_Xc = orbit.sup_Xc;
    rep.sup_Xh = orbit.sup_Xh;
    rep.vc_norm = model.norm_c(V_c);
    const double J0 = model.j_functional(orbit.X[orbit.X.size() / 2]);
    double drift = 0.0;
    for (const State& X : orbit.X) drift = std::max(drift, std::fabs(model.j_functional(X) - J0));
    rep.j_drift_rel = drift / std::max(std::fabs(J0), 1e-300);
    return rep;
}

ConvergenceReport convergence_to_wc(const CenterStableSolution& sol, const Model& model,
                                    const TruncationConfig& cfg) {
    const auto& par = model.params();
    const double te = cfg.t_eps(par.m);
    const double tmax = sol.times.back();
    if (te >= tmax)
        throw std::invalid_argument("convergence_to_wc: solution horizon shorter than t_eps");
    const double t_hi = std::min(2.0 * te, tmax);

    TruncationConfig psi_cfg = cfg;
    psi_cfg.T_horizon = std::min(cfg.T_horizon, 40.0);

    ConvergenceReport rep;
    const int ns = 9;
    for (int j = 0; j < ns; ++j) {
        const double tq = te + (t_hi - te) * double(j) / double(ns - 1);
        const std::size_t i = sol.index_of(tq);
        const double tg = sol.times[i];
        const State& Z = sol.Z[i];
        const HyperbolicPoint psi = center_manifold_psi(project_c(Z), model, psi_cfg);
        const double da = Z.a[0] + alpha(tg, par) - psi.a0;
        const double db = Z.b[0] + beta(tg, par) - psi.b0;
        rep.t.push_back(tg);
        rep.d.push_back(std::hypot(da, db));
    }
    rep.d_at_teps = rep.d.front();

    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < rep.d.size(); ++j)
        if (rep.d[j] > 1e-15) {
            xs.push_back(rep.t[j]);
            ys.push_back(std::log(rep.d[j]));
        }
    rep.fitted_rate = xs.size() >= 2 ? -lstsq_slope(xs, ys) : 0.0;
    return rep;
}

HeteroclinicOrbit reversible_heteroclinic(const State& V_c_symmetric, const Model& model,
                                          const TruncationConfig& cfg) {
    for (double bv : V_c_symmetric.b)
        if (bv != 0.0)
            throw std::invalid_argument(
                "reversible_heteroclinic: center datum must be symmetry-fixed (b = 0)");

    const CenterStableSolution sol =
        solve_center_stable(V_c_symmetric, 0.0, model, cfg, CsMethod::fixed_point);
    const State& Z0 = sol.Z[0];

    HeteroclinicOrbit het;
    for (double bv : Z0.b) het.b_residual_at_zero = std::max(het.b_residual_at_zero, std::fabs(bv));

    const double T = cfg.T_horizon;
    const double delta = cfg.delta();
    std::vector<State> fwd = integrate_deviation(Z0, 0.0, T, model, delta, cfg.dt);
    std::vector<State> bwd = integrate_deviation(Z0, 0.0, -T, model, delta, cfg.dt);

    for (std::size_t i = 0; i < fwd.size(); ++i) {
        State D = bwd[i];
        D -= apply_symmetry(fwd[i]);
        het.symmetry_mismatch = std::max(het.symmetry_mismatch, model.state_norm(D));
        het.tracking_sup = std::max(het.tracking_sup, model.state_norm(fwd[i]));
    }

    const std::size_t nf = fwd.size();
    const double dt = T / double(nf - 1);
    het.times.resize(2 * nf - 1);
    het.X.resize(2 * nf - 1);
    for (std::size_t j = 0; j < nf; ++j) {
        const double tj = -T + double(j) * dt;
        het.times[j] = tj;
        het.X[j] = bwd[nf - 1 - j] + homoclinic_state(tj, model);
    }
    for (std::size_t j = 1; j < nf; ++j) {
        const double tj = double(j) * dt;
        het.times[nf - 1 + j] = tj;
        het.X[nf - 1 + j] = fwd[j] + homoclinic_state(tj, model);
    }

    het.target_c = project_c(fwd.back());
    TruncationConfig psi_cfg = cfg;
    psi_cfg.T_horizon = std::min(cfg.T_horizon, 40.0);
    het.target_psi = center_manifold_psi(het.target_c, model, psi_cfg);
    return het;
}

}  // namespace kg
