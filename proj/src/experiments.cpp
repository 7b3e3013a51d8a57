#include "kg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "kg/evolve.hpp"
#include "kg/homoclinic.hpp"
#include "kg/linearized.hpp"
#include "kg/manifolds.hpp"
#include "kg/spectral.hpp"

namespace fs = std::filesystem;

namespace kg {

namespace {

// ---------------------------------------------------------------- utilities

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check(bool ok, const std::string& name) {
    if (!ok) throw CheckFailure(name);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp);
        f << content;
    }
    fs::rename(tmp, path);
}

void write_csv(const std::string& dir, const std::string& stem,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\r\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\r\n";
    }
    write_text_atomic(dir + "/" + stem + ".csv", os.str());
}

struct Series {
    std::string name;
    std::vector<double> x, y;
};

double tx(double v, bool logscale) { return logscale ? std::log10(v) : v; }

// Minimal static SVG line-plot emitter; axes, ticks, legend, polylines.
std::string render_svg(const std::string& title, const std::vector<Series>& series, bool xlog,
                       bool ylog) {
    const double W = 720, H = 480, L = 70, R = 20, T = 34, B = 48;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((xlog && s.x[i] <= 0.0) || (ylog && s.y[i] <= 0.0)) continue;
            xmin = std::min(xmin, tx(s.x[i], xlog));
            xmax = std::max(xmax, tx(s.x[i], xlog));
            ymin = std::min(ymin, tx(s.y[i], ylog));
            ymax = std::max(ymax, tx(s.y[i], ylog));
        }
    if (xmin > xmax) {
        xmin = ymin = 0.0;
        xmax = ymax = 1.0;
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double padx = 0.04 * (xmax - xmin), pady = 0.05 * (ymax - ymin);
    xmin -= padx;
    xmax += padx;
    ymin -= pady;
    ymax += pady;
    auto sx = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
    auto sy = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    std::ostringstream os;
    char buf[256];
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
          "viewBox=\"0 0 720 480\" font-family=\"monospace\" font-size=\"12\">\n";
    os << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
                  "stroke=\"black\"/>\n",
                  L, T, W - L - R, H - T - B);
    os << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"20\" text-anchor=\"middle\">%s</text>\n",
                  0.5 * (L + W - R), title.c_str());
    os << buf;
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double vx = xlog ? std::pow(10.0, fx) : fx;
        const double vy = ylog ? std::pow(10.0, fy) : fy;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                      sx(fx), H - B, sx(fx), H - B + 5.0);
        os << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.3g</text>\n", sx(fx),
                      H - B + 20.0, vx);
        os << buf;
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                      L - 5.0, sy(fy), L, sy(fy));
        os << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%.3g</text>\n", L - 8.0,
                      sy(fy) + 4.0, vy);
        os << buf;
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const Series& s = series[k];
        const char* color = palette[k % 8];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if ((xlog && s.x[i] <= 0.0) || (ylog && s.y[i] <= 0.0)) continue;
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(tx(s.x[i], xlog)),
                          sy(tx(s.y[i], ylog)));
            os << buf;
        }
        os << "\"/>\n";
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" fill=\"%s\">%s</text>\n", W - R - 150.0,
                      T + 16.0 + 14.0 * double(k), color, s.name.c_str());
        os << buf;
    }
    os << "</svg>\n";
    return os.str();
}

// Writes stem.svg plus the sibling stem.csv holding exactly the plotted
// series (wide layout when all series share the x grid, long otherwise).
void plot_series(const std::string& dir, const std::string& stem, const std::string& title,
                 const std::string& xname, const std::vector<Series>& series, bool xlog,
                 bool ylog) {
    bool shared_x = true;
    for (const auto& s : series)
        if (s.x != series.front().x) shared_x = false;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    if (shared_x && !series.empty()) {
        header.push_back(xname);
        for (const auto& s : series) header.push_back(s.name);
        for (std::size_t i = 0; i < series.front().x.size(); ++i) {
            std::vector<std::string> r;
            r.push_back(fmt17(series.front().x[i]));
            for (const auto& s : series) r.push_back(fmt17(s.y[i]));
            rows.push_back(std::move(r));
        }
    } else {
        header = {"series", xname, "y"};
        for (const auto& s : series)
            for (std::size_t i = 0; i < s.x.size(); ++i)
                rows.push_back({s.name, fmt17(s.x[i]), fmt17(s.y[i])});
    }
    write_csv(dir, stem, header, rows);
    write_text_atomic(dir + "/" + stem + ".svg", render_svg(title, series, xlog, ylog));
}

double lstsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

template <typename Fn>
void parallel_for(int jobs, std::size_t n, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t nt = std::min<std::size_t>(std::size_t(jobs), n);
    for (std::size_t t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

// ------------------------------------------------------------ config access

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "model.m",          "model.p",         "model.N",          "model.manifold",
        "trunc.epsilon",    "trunc.r",         "trunc.T_horizon",  "trunc.fp_tol",
        "trunc.shoot_tol",  "trunc.dt",        "trunc.fp_dt",      "trunc.dc_radius",
        "scheme.order",     "scheme.dt",       "scheme.drift_tolerance",
        "run.seed",         "out.dir",
        "phase.T",          "phase.T_eta",     "phase.dt",         "phase.eta",
        "track.T",          "track.tol",
        "scatter.T",        "scatter.dt",
        "basis.T",          "basis.dt",
        "ode.T",            "ode.modes",
        "shadow.vc_norm",   "shadow.vs",       "shadow.agree_tol",
        "psi.smin",         "psi.smax",        "psi.count",        "psi.slope_min",
        "het.norms",
        "cw.vc_norm",       "cw.vs",           "cw.dteps_factor",
    };
    return keys;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

ModelParams params_from(const ExperimentConfig& cfg) {
    ModelParams par;
    par.m = cfg.getd("model.m", 0.5);
    par.p = cfg.geti("model.p", 1);
    par.N = cfg.geti("model.N", 8);
    return par;
}

Manifold manifold_from(const ExperimentConfig& cfg) {
    const std::string s = cfg.gets("model.manifold", "circle");
    if (s == "circle") return Manifold::circle;
    if (s == "torus2") return Manifold::torus2;
    throw ConfigError("model.manifold must be circle or torus2");
}

TruncationConfig trunc_from(const ExperimentConfig& cfg, TruncationConfig tc) {
    tc.epsilon = cfg.getd("trunc.epsilon", tc.epsilon);
    tc.r = cfg.getd("trunc.r", tc.r);
    tc.T_horizon = cfg.getd("trunc.T_horizon", tc.T_horizon);
    tc.fp_tol = cfg.getd("trunc.fp_tol", tc.fp_tol);
    tc.shoot_tol = cfg.getd("trunc.shoot_tol", tc.shoot_tol);
    tc.dt = cfg.getd("trunc.dt", tc.dt);
    tc.fp_dt = cfg.getd("trunc.fp_dt", tc.fp_dt);
    tc.dc_radius = cfg.getd("trunc.dc_radius", tc.dc_radius);
    return tc;
}

SchemeConfig scheme_from(const ExperimentConfig& cfg) {
    SchemeConfig sc;
    sc.order = cfg.geti("scheme.order", 4);
    sc.dt = cfg.getd("scheme.dt", 1e-3);
    sc.drift_tolerance = cfg.getd("scheme.drift_tolerance", 1e-6);
    if (sc.order != 2 && sc.order != 4) throw ConfigError("scheme.order must be 2 or 4");
    return sc;
}

State unit_center(const Model& model, const std::vector<std::size_t>& amodes,
                  const std::vector<std::size_t>& bmodes, double norm) {
    State V(model.dim());
    for (std::size_t n : amodes) V.a.at(n) = 1.0;
    for (std::size_t n : bmodes) V.b.at(n) = 1.0;
    const double nc = model.norm_c(V);
    V *= norm / nc;
    return V;
}

// ------------------------------------------------------------- experiments

void ex_phase_portrait(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    const auto& par = model.params();
    const double T = cfg.getd("phase.T", 20.0 / par.m);

    Series k0{"K0", {}, {}};
    double emax = 0.0;
    std::vector<std::vector<std::string>> k0rows;
    for (int i = 0; i <= 1000; ++i) {
        const double t = -T + 2.0 * T * double(i) / 1000.0;
        const double a = alpha(t, par), b = beta(t, par);
        k0.x.push_back(a);
        k0.y.push_back(b);
        emax = std::max(emax, std::fabs(planar_energy(a, b, par)));
        k0rows.push_back({fmt17(t), fmt17(a), fmt17(b), fmt17(planar_energy(a, b, par))});
    }
    write_csv(cfg.out_dir, "phase_portrait_k0", {"t", "a0", "b0", "energy"}, k0rows);
    check(emax < 1e-10, "phase-portrait: K0 samples on the zero planar energy level");

    std::vector<Series> series{k0};
    for (double eta : cfg.getlist("phase.eta", {0.2, 0.4, 0.6})) {
        PlanarOrbit orb = planar_orbit(eta, model, cfg.getd("phase.T_eta", 40.0),
                                       cfg.getd("phase.dt", 2e-4));
        Series s{"K_eta=" + fmt17(eta).substr(0, 6), {}, {}};
        for (std::size_t i = 0; i < orb.t.size(); i += 50) {
            s.x.push_back(orb.a0[i]);
            s.y.push_back(orb.b0[i]);
        }
        series.push_back(std::move(s));
    }
    plot_series(cfg.out_dir, "phase_portrait", "planar phase portrait", "a0", series, false,
                false);
}

void ex_homoclinic_track(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    const auto& par = model.params();
    const SchemeConfig scheme = scheme_from(cfg);
    const double T = cfg.getd("track.T", 12.0);

    Trajectory traj = integrate(homoclinic_state(-T, model), 2.0 * T, model, scheme, 20);
    Series err{"track_error", {}, {}};
    double emax = 0.0, hdrift = 0.0;
    const double H0 = traj.observables.front().H;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = -T + traj.times[i];
        const double e = std::hypot(traj.states[i].a[0] - alpha(t, par),
                                    traj.states[i].b[0] - beta(t, par));
        err.x.push_back(t);
        err.y.push_back(std::max(e, 1e-18));
        emax = std::max(emax, e);
        hdrift = std::max(hdrift, std::fabs(traj.observables[i].H - H0));
    }
    plot_series(cfg.out_dir, "homoclinic_track", "integrator vs closed form", "t", {err}, false,
                true);
    write_csv(cfg.out_dir, "homoclinic_track_summary", {"max_error", "energy_drift"},
              {{fmt17(emax), fmt17(hdrift)}});
    check(emax < cfg.getd("track.tol", 1e-6), "homoclinic-track: closed-form tracking error");
}

void ex_linearized_scatter(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    const auto& par = model.params();
    const double T = cfg.getd("scatter.T", 40.0 / par.m);
    const double dt = cfg.getd("scatter.dt", 1e-3);

    State z0(model.dim());
    z0.a[1] = 1.0;
    TorusInvariants inv1 = scatter_asymptotics(z0, model, T, dt);
    TorusInvariants inv2 = scatter_asymptotics(z0, model, 2.0 * T, dt);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t n = 1; n < model.dim(); ++n)
        rows.push_back({fmt17(double(n)), fmt17(inv1.omega[n]), fmt17(inv1.a_plus[n]),
                        fmt17(inv1.b_plus[n]), fmt17(inv1.c[n])});
    write_csv(cfg.out_dir, "scatter_invariants", {"mode", "omega", "a_plus", "b_plus", "c"}, rows);

    Series res{"checkpoint_residual", inv1.checkpoint_t, {}};
    for (double v : inv1.checkpoint_residual) res.y.push_back(std::max(v, 1e-18));
    plot_series(cfg.out_dir, "scatter_residuals", "free-flow residual at checkpoints", "t", {res},
                false, true);

    check(std::fabs(inv1.c[1] - inv2.c[1]) < 1e-8,
          "linearized-scatter: c_1 stability under doubled truncation time");
    check(inv1.checkpoint_residual.back() < 1e-6,
          "linearized-scatter: residual against the free flow at t = 40/m");
}

void ex_hyperbolic_basis(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    const auto& par = model.params();
    const double T = cfg.getd("basis.T", 30.0 / par.m);
    const HyperbolicBasis hb = hyperbolic_basis(par, T, cfg.getd("basis.dt", 1e-3), 1e-10);

    auto nrm = [](const Vec2& v) { return std::hypot(v[0], v[1]); };
    std::vector<Series> series{{"|sigma|", {}, {}},
                               {"|rho|", {}, {}},
                               {"|sigma*|", {}, {}},
                               {"|rho*|", {}, {}}};
    double pairing_err = 0.0;
    for (std::size_t i = 0; i < hb.t.size(); i += 100) {
        series[0].x.push_back(hb.t[i]);
        series[0].y.push_back(nrm(hb.sigma[i]));
        series[1].x.push_back(hb.t[i]);
        series[1].y.push_back(nrm(hb.rho[i]));
        series[2].x.push_back(hb.t[i]);
        series[2].y.push_back(nrm(hb.sigma_star[i]));
        series[3].x.push_back(hb.t[i]);
        series[3].y.push_back(nrm(hb.rho_star[i]));
        auto dot = [](const Vec2& u, const Vec2& v) { return u[0] * v[0] + u[1] * v[1]; };
        pairing_err = std::max(
            {pairing_err, std::fabs(dot(hb.sigma_star[i], hb.sigma[i]) - 1.0),
             std::fabs(dot(hb.sigma_star[i], hb.rho[i])),
             std::fabs(dot(hb.rho_star[i], hb.rho[i]) - 1.0),
             std::fabs(dot(hb.rho_star[i], hb.sigma[i]))});
    }
    plot_series(cfg.out_dir, "hyperbolic_basis", "fundamental pair and duals", "t", series, false,
                true);

    double rates[4];
    for (int k = 0; k < 4; ++k) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < series[k].x.size(); ++i)
            if (series[k].x[i] >= 5.0) {
                xs.push_back(series[k].x[i]);
                ys.push_back(std::log(series[k].y[i]));
            }
        rates[k] = lstsq_slope(xs, ys);
    }
    write_csv(cfg.out_dir, "hyperbolic_basis_summary",
              {"mu", "wronskian", "wronskian_drift", "pairing_err", "rate_sigma", "rate_rho",
               "rate_sigma_star", "rate_rho_star"},
              {{fmt17(hb.mu), fmt17(hb.wronskian), fmt17(hb.wronskian_drift), fmt17(pairing_err),
                fmt17(rates[0]), fmt17(rates[1]), fmt17(rates[2]), fmt17(rates[3])}});

    check(hb.wronskian_drift < 1e-10, "hyperbolic-basis: Wronskian constancy");
    check(pairing_err < 1e-9, "hyperbolic-basis: duality pairings");
    const double tol = 0.02 * par.m;
    check(std::fabs(rates[0] + par.m) < tol && std::fabs(rates[1] - par.m) < tol &&
              std::fabs(rates[2] - par.m) < tol && std::fabs(rates[3] + par.m) < tol,
          "hyperbolic-basis: asymptotic rates -m/+m/+m/-m within 2%");
}

void ex_ode_bound(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    const auto& par = model.params();
    const double T = cfg.getd("ode.T", 200.0);
    const double q_total = alpha_pow_integral(-1.0, par);
    const Certificate cert =
        boundedness_certificate([&](double t) { return alpha_pow_integral(t, par); }, q_total);

    std::vector<double> ks = cfg.getlist("ode.modes", {1, 2, 4, 8});
    std::vector<Series> series;
    std::vector<std::vector<std::string>> rows;
    double worst = 0.0;
    for (double kd : ks) {
        const double lambda = kd;
        double sup = 0.0;
        Series s{"mode_" + std::to_string(int(kd)), {}, {}};
        for (const Vec2 z0 : {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}}) {
            ModePath path = mode_path(lambda, z0, 0.0, T, par, 1e-3);
            const double n0 = mode_norm(lambda, z0, par);
            for (std::size_t i = 0; i < path.t.size(); ++i) {
                const double r = mode_norm(lambda, path.z[i], par) / n0;
                sup = std::max(sup, r);
                if (z0[0] == 1.0 && i % 200 == 0) {
                    s.x.push_back(path.t[i]);
                    s.y.push_back(r);
                }
            }
        }
        series.push_back(std::move(s));
        rows.push_back({fmt17(kd), fmt17(sup), fmt17(cert.bound)});
        worst = std::max(worst, sup);
    }
    plot_series(cfg.out_dir, "ode_bound_growth", "elliptic mode norm growth", "t", series, false,
                false);
    write_csv(cfg.out_dir, "ode_bound", {"mode", "sup_ratio", "bound"}, rows);
    {
        std::vector<std::vector<std::string>> cuts;
        for (std::size_t j = 0; j < cert.cut_times.size(); ++j)
            cuts.push_back({fmt17(double(j + 1)), fmt17(cert.cut_times[j])});
        write_csv(cfg.out_dir, "ode_bound_cuts", {"index", "cut_time"}, cuts);
    }

    if (par.m == 0.5 && par.p == 1)
        check(cert.k == 5 && cert.bound == 64.0, "ode-bound: certificate (k=5, bound=64)");
    check(worst <= cert.bound, "ode-bound: measured growth within the certificate bound");
    check(worst <= 3.0, "ode-bound: measured growth within the empirical bound 3");
}

void ex_shadow(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    TruncationConfig tc;
    tc.shoot_tol = 1e-18;
    tc = trunc_from(cfg, tc);
    const double eps2 = tc.epsilon * tc.epsilon;

    std::mt19937_64 rng(std::uint64_t(cfg.geti("run.seed", 1)));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    State V(model.dim());
    for (std::size_t n = 1; n < std::min<std::size_t>(5, model.dim()); ++n) {
        V.a[n] = uni(rng);
        V.b[n] = uni(rng);
    }
    V *= cfg.getd("shadow.vc_norm", eps2) / model.norm_c(V);
    const double V_s = cfg.getd("shadow.vs", 0.5 * eps2);

    const CenterStableSolution sh = solve_center_stable(V, V_s, model, tc, CsMethod::shooting);
    const CenterStableSolution fp = solve_center_stable(V, V_s, model, tc, CsMethod::fixed_point);

    double agree = 0.0;
    std::vector<Series> series{{"|Z_h|", {}, {}}, {"|Z_c|", {}, {}}};
    for (std::size_t i = 0; i < fp.times.size(); ++i) {
        State D = fp.Z[i];
        D -= sh.Z[sh.index_of(fp.times[i])];
        agree = std::max(agree, model.state_norm(D));
        if (i % 10 == 0) {
            series[0].x.push_back(fp.times[i]);
            series[0].y.push_back(std::max(hyperbolic_abs(fp.Z[i]), 1e-18));
            series[1].x.push_back(fp.times[i]);
            series[1].y.push_back(std::max(model.norm_c(fp.Z[i]), 1e-18));
        }
    }
    plot_series(cfg.out_dir, "shadow", "center-stable solution tube", "t", series, false, true);
    write_csv(cfg.out_dir, "shadow_summary",
              {"V_u_shooting", "V_u_fixed_point", "sup_disagreement", "sup_Zh", "sup_Zc",
               "shoot_iters", "picard_iters"},
              {{fmt17(sh.V_u), fmt17(fp.V_u), fmt17(agree), fmt17(fp.sup_Zh), fmt17(fp.sup_Zc),
                fmt17(double(sh.iterations)), fmt17(double(fp.iterations))}});

    check(agree < cfg.getd("shadow.agree_tol", 1e-8),
          "shadow: shooting/fixed-point sup-norm agreement");
    check(sh.ci_residual_s < tc.fp_tol && sh.ci_residual_c < tc.fp_tol &&
              fp.ci_residual_s < tc.fp_tol && fp.ci_residual_c < tc.fp_tol,
          "shadow: boundary data reproduced to fp_tol");
    check(fp.sup_Zh <= 10.0 * eps2 && sh.sup_Zh <= 10.0 * eps2,
          "shadow: |Z_h| within 10 eps^2");
    check(fp.sup_Zc <= 10.0 * eps2, "shadow: |Z_c| within 10 eps^2");
}

void ex_psi_scan(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    TruncationConfig tc = trunc_from(cfg, TruncationConfig{});

    const HyperbolicPoint psi0 = center_manifold_psi(State(model.dim()), model, tc);
    check(psi0.a0 == 0.0 && psi0.b0 == 0.0, "psi-scan: Psi(0) = 0 exactly");

    // two distinct frequencies (cos x, cos 2x): the odd nonlinearity feeds
    // the hyperbolic pair only through mixed resonant triples
    const State dir = unit_center(model, {1, 3}, {}, 1.0);
    const double smin = cfg.getd("psi.smin", 1e-3), smax = cfg.getd("psi.smax", 1e-2);
    const int count = cfg.geti("psi.count", 7);
    std::vector<double> svals(count), norms(count);
    for (int i = 0; i < count; ++i)
        svals[i] = smin * std::pow(smax / smin, double(i) / double(count - 1));
    parallel_for(cfg.jobs, std::size_t(count), [&](std::size_t i) {
        State V = dir;
        V *= svals[i];
        const HyperbolicPoint psi = center_manifold_psi(V, model, tc);
        norms[i] = std::hypot(psi.a0, psi.b0);
    });

    std::vector<double> lx, ly;
    for (int i = 0; i < count; ++i)
        if (norms[i] > 0.0) {
            lx.push_back(std::log(svals[i]));
            ly.push_back(std::log(norms[i]));
        }
    const double slope = lx.size() >= 2 ? lstsq_slope(lx, ly) : 0.0;

    plot_series(cfg.out_dir, "psi_scan", "manifold parametrization scaling", "s",
                {{"|Psi(s V_c)|", svals, norms}}, true, true);
    write_csv(cfg.out_dir, "psi_scan_summary", {"slope"}, {{fmt17(slope)}});
    check(slope >= cfg.getd("psi.slope_min", 1.9),
          "psi-scan: at-least-quadratic tangency of Psi at 0");
}

void ex_heteroclinic(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    TruncationConfig tc;
    tc.T_horizon = 30.0;
    tc = trunc_from(cfg, tc);

    const std::vector<double> norms = cfg.getlist("het.norms", {1e-4, 3e-4, 1e-3});
    std::vector<HeteroclinicOrbit> orbits(norms.size());
    parallel_for(cfg.jobs, norms.size(), [&](std::size_t i) {
        orbits[i] = reversible_heteroclinic(unit_center(model, {1}, {}, norms[i]), model, tc);
    });

    std::vector<std::vector<std::string>> rows;
    double cmin = 1e300, cmax = 0.0, worst_mismatch = 0.0, worst_bres = 0.0;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const double C = orbits[i].tracking_sup / norms[i];
        cmin = std::min(cmin, C);
        cmax = std::max(cmax, C);
        worst_mismatch = std::max(worst_mismatch, orbits[i].symmetry_mismatch);
        worst_bres = std::max(worst_bres, orbits[i].b_residual_at_zero);
        rows.push_back({fmt17(norms[i]), fmt17(orbits[i].symmetry_mismatch),
                        fmt17(orbits[i].b_residual_at_zero), fmt17(C),
                        fmt17(orbits[i].target_psi.a0), fmt17(orbits[i].target_psi.b0)});
    }
    write_csv(cfg.out_dir, "heteroclinic_summary",
              {"vc_norm", "symmetry_mismatch", "b_residual_at_zero", "tracking_C",
               "target_psi_a0", "target_psi_b0"},
              rows);

    const HeteroclinicOrbit& big = orbits.back();
    std::vector<Series> series{{"a0", {}, {}}, {"b0", {}, {}}};
    for (std::size_t i = 0; i < big.times.size(); i += 50) {
        series[0].x.push_back(big.times[i]);
        series[0].y.push_back(big.X[i].a[0]);
        series[1].x.push_back(big.times[i]);
        series[1].y.push_back(big.X[i].b[0]);
    }
    plot_series(cfg.out_dir, "heteroclinic", "reversible connecting orbit", "t", series, false,
                false);

    check(worst_mismatch < 1e-8, "heteroclinic: reflection vs direct backward integration");
    check(worst_bres < tc.fp_tol, "heteroclinic: b-components of X(0) vanish");
    check(cmax <= 2.0 * cmin, "heteroclinic: tracking constant stable within a factor 2");
}

void ex_converge_wc(const ExperimentConfig& cfg) {
    const Model model(params_from(cfg), manifold_from(cfg));
    TruncationConfig tc;
    tc.epsilon = 0.2;
    tc.T_horizon = 30.0;
    tc = trunc_from(cfg, tc);
    const double eps2 = tc.epsilon * tc.epsilon;

    State V(model.dim());
    V.a[1] = 1.0;
    V.a[2] = 0.3;
    V.b[2] = 0.5;
    V *= cfg.getd("cw.vc_norm", eps2) / model.norm_c(V);
    const double V_s = cfg.getd("cw.vs", 0.02);

    const CenterStableSolution sol =
        solve_center_stable(V, V_s, model, tc, CsMethod::fixed_point);
    const ConvergenceReport rep = convergence_to_wc(sol, model, tc);

    plot_series(cfg.out_dir, "converge_wc", "distance to the center manifold", "t",
                {{"d", rep.t, rep.d}}, false, true);
    write_csv(cfg.out_dir, "converge_wc_summary", {"fitted_rate", "d_at_teps", "r"},
              {{fmt17(rep.fitted_rate), fmt17(rep.d_at_teps), fmt17(tc.r)}});

    check(rep.fitted_rate >= tc.r, "converge-wc: fitted decay rate at least r");
    check(rep.d_at_teps <= cfg.getd("cw.dteps_factor", 10.0) * eps2,
          "converge-wc: d(t_eps) within C eps^2");

    // cutoff-removal consistency on the certified orbit
    std::vector<State> with_cut =
        integrate_deviation(sol.Z[0], 0.0, tc.T_horizon, model, tc.delta(), tc.dt);
    std::vector<State> no_cut =
        integrate_deviation(sol.Z[0], 0.0, tc.T_horizon, model, 0.0, tc.dt);
    double diff = 0.0;
    for (std::size_t i = 0; i < with_cut.size(); ++i) {
        State D = with_cut[i];
        D -= no_cut[i];
        diff = std::max(diff, model.state_norm(D));
    }
    check(diff < 1e-8, "converge-wc: removing the cutoff leaves the orbit unchanged");
}

}  // namespace

// --------------------------------------------------------------- public API

ExperimentConfig ExperimentConfig::from_file(const std::string& experiment,
                                             const std::string& path) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (path.empty()) return cfg;
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!known_keys().count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                              "'");
        cfg.kv[key] = val;
    }
    return cfg;
}

double ExperimentConfig::getd(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw ConfigError("config key " + key + ": not a number: " + it->second);
    return v;
}

int ExperimentConfig::geti(const std::string& key, int fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const double v = getd(key, 0.0);
    if (v != std::floor(v)) throw ConfigError("config key " + key + ": not an integer");
    return int(v);
}

std::string ExperimentConfig::gets(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

std::vector<double> ExperimentConfig::getlist(const std::string& key,
                                              const std::vector<double>& fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
            throw ConfigError("config key " + key + ": bad list entry: " + tok);
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "phase-portrait", "homoclinic-track", "linearized-scatter",
        "hyperbolic-basis", "ode-bound",      "shadow",
        "psi-scan",        "heteroclinic",    "converge-wc"};
    return names;
}

void run_experiment(const ExperimentConfig& config) {
    if (config.out_dir.empty()) throw ConfigError("no output directory");
    fs::create_directories(config.out_dir);
    const std::string& e = config.experiment;
    if (e == "phase-portrait") return ex_phase_portrait(config);
    if (e == "homoclinic-track") return ex_homoclinic_track(config);
    if (e == "linearized-scatter") return ex_linearized_scatter(config);
    if (e == "hyperbolic-basis") return ex_hyperbolic_basis(config);
    if (e == "ode-bound") return ex_ode_bound(config);
    if (e == "shadow") return ex_shadow(config);
    if (e == "psi-scan") return ex_psi_scan(config);
    if (e == "heteroclinic") return ex_heteroclinic(config);
    if (e == "converge-wc") return ex_converge_wc(config);
    throw ConfigError("unknown experiment: " + e);
}

int run_cli(const std::string& experiment, const std::string& config_path,
            const std::string& out_dir, int jobs) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end()) {
        std::fprintf(stderr, "unknown experiment '%s'; available:", experiment.c_str());
        for (const auto& n : names) std::fprintf(stderr, " %s", n.c_str());
        std::fprintf(stderr, "\n");
        return 1;
    }
    try {
        ExperimentConfig cfg = ExperimentConfig::from_file(experiment, config_path);
        cfg.jobs = std::max(1, jobs);
        cfg.out_dir = out_dir;
        if (cfg.out_dir.empty()) cfg.out_dir = cfg.gets("out.dir", "");
        if (cfg.out_dir.empty()) {
            const char* env = std::getenv("KGMAN_OUT");
            cfg.out_dir = env && *env ? env : "out";
        }
        run_experiment(cfg);
        std::printf("%s: ok (outputs in %s)\n", experiment.c_str(), cfg.out_dir.c_str());
        return 0;
    } catch (const CheckFailure& e) {
        std::fprintf(stderr, "%s: check failed: %s\n", experiment.c_str(), e.what());
        return 3;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "%s: config error: %s\n", experiment.c_str(), e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "%s: config error: %s\n", experiment.c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s: failure: %s\n", experiment.c_str(), e.what());
        return 3;
    }
}

}  // namespace kg
