#include "kg/spectral.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace kg {

namespace {
constexpr double kPi = 3.14159265358979323846;

std::size_t pow2_at_least(std::size_t n) {
    std::size_t g = 1;
    while (g < n) g <<= 1;
    return g;
}
}  // namespace

Spectrum build_spectrum(Manifold kind, int N) {
    if (N < 1) throw std::invalid_argument("build_spectrum: cutoff N must be >= 1");
    Spectrum s;
    s.kind = kind;
    s.cutoff = N;
    s.modes.push_back(Mode{0.0, 0, 0, false});
    if (kind == Manifold::circle) {
        for (int k = 1; k <= N; ++k) {
            s.modes.push_back(Mode{double(k), k, 0, false});
            s.modes.push_back(Mode{double(k), k, 0, true});
        }
    } else {
        // Wavevector representatives with |k|^2 <= N^2: k1 > 0, or k1 == 0
        // and k2 > 0; lexicographic order.
        std::vector<std::pair<int, int>> reps;
        for (int k1 = 0; k1 <= N; ++k1)
            for (int k2 = -N; k2 <= N; ++k2) {
                if (k1 == 0 && k2 <= 0) continue;
                if (k1 * k1 + k2 * k2 > N * N) continue;
                reps.emplace_back(k1, k2);
            }
        std::sort(reps.begin(), reps.end());
        for (auto [k1, k2] : reps) {
            double lam = std::sqrt(double(k1 * k1 + k2 * k2));
            s.modes.push_back(Mode{lam, k1, k2, false});
            s.modes.push_back(Mode{lam, k1, k2, true});
        }
        std::stable_sort(s.modes.begin(), s.modes.end(),
                         [](const Mode& x, const Mode& y) { return x.lambda < y.lambda; });
    }
    return s;
}

State& State::operator+=(const State& o) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] += o.a[i];
        b[i] += o.b[i];
    }
    return *this;
}

State& State::operator-=(const State& o) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] -= o.a[i];
        b[i] -= o.b[i];
    }
    return *this;
}

State& State::operator*=(double s) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] *= s;
        b[i] *= s;
    }
    return *this;
}

State operator+(State x, const State& y) { return x += y; }
State operator-(State x, const State& y) { return x -= y; }
State operator*(double s, State x) { return x *= s; }

HyperbolicPoint project_h(const State& X) { return {X.a[0], X.b[0]}; }

State project_c(State X) {
    X.a[0] = 0.0;
    X.b[0] = 0.0;
    return X;
}

State apply_symmetry(State X) {
    for (double& v : X.b) v = -v;
    return X;
}

double hyperbolic_abs(const State& X) { return std::hypot(X.a[0], X.b[0]); }

Model::Model(ModelParams params, Manifold kind) : params_(params) {
    if (params_.p < 1) throw std::invalid_argument("Model: exponent p must be >= 1");
    if (params_.m <= 0.0) throw std::invalid_argument("Model: mass m must be positive");
    spec_ = build_spectrum(kind, params_.N);
    // lambda_1 = 1 on both supported manifolds
    if (params_.m >= 1.0) throw std::invalid_argument("Model: need 0 < m < lambda_1 = 1");

    // Dealiasing: grid size per axis = smallest power of two >= (p+1)(2N+1),
    // so that coefficients of u^{2p+1} on modes <= N are quadrature-exact.
    const std::size_t per_axis = pow2_at_least(std::size_t((params_.p + 1) * (2 * params_.N + 1)));
    const double sqrt2 = std::sqrt(2.0);

    if (kind == Manifold::circle) {
        npts_ = per_axis;
        basis_.assign(spec_.size() * npts_, 0.0);
        for (std::size_t n = 0; n < spec_.size(); ++n) {
            const Mode& md = spec_.modes[n];
            for (std::size_t g = 0; g < npts_; ++g) {
                double x = 2.0 * kPi * double(g) / double(npts_);
                double v;
                if (md.k1 == 0)
                    v = 1.0;
                else
                    v = sqrt2 * (md.sine ? std::sin(md.k1 * x) : std::cos(md.k1 * x));
                basis_[n * npts_ + g] = v;
            }
        }
    } else {
        npts_ = per_axis * per_axis;
        basis_.assign(spec_.size() * npts_, 0.0);
        for (std::size_t n = 0; n < spec_.size(); ++n) {
            const Mode& md = spec_.modes[n];
            for (std::size_t gx = 0; gx < per_axis; ++gx)
                for (std::size_t gy = 0; gy < per_axis; ++gy) {
                    double x = 2.0 * kPi * double(gx) / double(per_axis);
                    double y = 2.0 * kPi * double(gy) / double(per_axis);
                    double ph = md.k1 * x + md.k2 * y;
                    double v;
                    if (md.k1 == 0 && md.k2 == 0)
                        v = 1.0;
                    else
                        v = sqrt2 * (md.sine ? std::sin(ph) : std::cos(ph));
                    basis_[n * npts_ + gx * per_axis + gy] = v;
                }
        }
    }
}

double Model::omega(std::size_t n) const {
    assert(n >= 1 && n < spec_.size());
    double lam = spec_.modes[n].lambda;
    return std::sqrt(lam * lam - params_.m * params_.m);
}

std::vector<double> Model::synthesize(const std::vector<double>& coeffs) const {
    std::vector<double> u(npts_, 0.0);
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
        const double c = coeffs[n];
        if (c == 0.0) continue;
        const double* e = &basis_[n * npts_];
        for (std::size_t g = 0; g < npts_; ++g) u[g] += c * e[g];
    }
    return u;
}

std::vector<double> Model::analyze(const std::vector<double>& grid_values) const {
    std::vector<double> c(spec_.size(), 0.0);
    const double w = 1.0 / double(npts_);
    for (std::size_t n = 0; n < spec_.size(); ++n) {
        const double* e = &basis_[n * npts_];
        double s = 0.0;
        for (std::size_t g = 0; g < npts_; ++g) s += grid_values[g] * e[g];
        c[n] = s * w;
    }
    return c;
}

State Model::nonlinear_term(const State& X) const {
    std::vector<double> u = synthesize(X.a);
    const int q = 2 * params_.p + 1;
    for (double& v : u) {
        double base = v, acc = v;
        for (int j = 1; j < q; ++j) acc *= base;
        v = acc;
    }
    std::vector<double> c = analyze(u);
    State out(dim());
    for (std::size_t n = 0; n < dim(); ++n) out.b[n] = -c[n];
    return out;
}

double Model::energy(const State& X) const {
    const double m2 = params_.m * params_.m;
    double quad = 0.0;
    for (std::size_t n = 0; n < dim(); ++n) {
        double lam = spec_.modes[n].lambda;
        quad += (lam * lam - m2) * X.a[n] * X.a[n] + X.b[n] * X.b[n];
    }
    std::vector<double> u = synthesize(X.a);
    const int q = 2 * params_.p + 2;
    double pot = 0.0;
    for (double v : u) {
        double acc = 1.0;
        for (int j = 0; j < q; ++j) acc *= v;
        pot += acc;
    }
    pot /= double(npts_);
    return 0.5 * quad + pot / double(q);
}

double Model::j_functional(const State& X) const {
    const double m2 = params_.m * params_.m;
    double s = 0.0;
    for (std::size_t n = 1; n < dim(); ++n) {
        double lam = spec_.modes[n].lambda;
        s += (lam * lam - m2) * X.a[n] * X.a[n] + X.b[n] * X.b[n];
    }
    return 0.5 * s;
}

double Model::state_norm(const State& X) const {
    double h1 = 0.0, l2 = 0.0;
    for (std::size_t n = 0; n < dim(); ++n) {
        double lam = spec_.modes[n].lambda;
        h1 += (1.0 + lam * lam) * X.a[n] * X.a[n];
        l2 += X.b[n] * X.b[n];
    }
    return std::sqrt(h1) + std::sqrt(l2);
}

double Model::norm_c(const State& X) const {
    double h1 = 0.0, l2 = 0.0;
    for (std::size_t n = 1; n < dim(); ++n) {
        double lam = spec_.modes[n].lambda;
        h1 += (1.0 + lam * lam) * X.a[n] * X.a[n];
        l2 += X.b[n] * X.b[n];
    }
    return std::sqrt(h1) + std::sqrt(l2);
}

}  // namespace kg
