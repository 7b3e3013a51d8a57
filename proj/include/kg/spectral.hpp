#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace kg {

enum class Manifold { circle, torus2 };

// Physical parameters of the wave equation: mass m, nonlinearity exponent p
// (the nonlinear term is u^{2p+1}) and the mode cutoff N.
struct ModelParams {
    double m = 0.5;
    int p = 1;
    int N = 8;
};

// One basis entry of the truncated Laplace-Beltrami eigenbasis.
// Circle: k1 is the frequency, k2 unused. Torus: (k1,k2) is the wavevector
// representative. The constant mode has k1 = k2 = 0 and lambda = 0.
struct Mode {
    double lambda = 0.0;
    int k1 = 0;
    int k2 = 0;
    bool sine = false;
};

struct Spectrum {
    Manifold kind = Manifold::circle;
    int cutoff = 0;
    std::vector<Mode> modes;

    std::size_t size() const { return modes.size(); }
};

// Ordered eigenbasis up to |k| <= N. Circle: 2N+1 entries, cosine before
// sine for each frequency. Torus: wavevector representatives in
// lexicographic order, again cosine before sine. Throws on N < 1.
Spectrum build_spectrum(Manifold kind, int N);

// Phase-space point (a_n, b_n): the discrete (u, d_t u).
struct State {
    std::vector<double> a, b;

    State() = default;
    explicit State(std::size_t n) : a(n, 0.0), b(n, 0.0) {}

    std::size_t size() const { return a.size(); }

    State& operator+=(const State& o);
    State& operator-=(const State& o);
    State& operator*=(double s);
};

State operator+(State x, const State& y);
State operator-(State x, const State& y);
State operator*(double s, State x);

// Point of the hyperbolic (a_0, b_0) plane.
struct HyperbolicPoint {
    double a0 = 0.0;
    double b0 = 0.0;
};

// P: projection onto the hyperbolic plane.
HyperbolicPoint project_h(const State& X);

// Q = I - P: zeroes the mode-0 pair, keeps the elliptic modes.
State project_c(State X);

// Reversibility symmetry: a -> a, b -> -b. An involution.
State apply_symmetry(State X);

double hyperbolic_abs(const State& X);  // |(a0, b0)|

// Spectrum + params + cached quadrature tables. All methods are pure and
// the object is immutable after construction, so it can be shared freely
// between concurrent workers.
class Model {
  public:
    Model(ModelParams params, Manifold kind = Manifold::circle);

    const ModelParams& params() const { return params_; }
    const Spectrum& spectrum() const { return spec_; }
    std::size_t dim() const { return spec_.size(); }

    // Elliptic frequency omega_n = sqrt(lambda_n^2 - m^2), n >= 1.
    double omega(std::size_t n) const;

    // F(X) = (0, -u^{2p+1}) projected on the basis, evaluated
    // pseudo-spectrally on a dealiased grid.
    State nonlinear_term(const State& X) const;

    // H = 1/2 sum (lambda^2 - m^2) a^2 + b^2 + 1/(2p+2) int u^{2p+2}.
    double energy(const State& X) const;

    // J = 1/2 sum_{k>=1} (lambda_k^2 - m^2) a_k^2 + b_k^2.
    double j_functional(const State& X) const;

    // ||u||_{H^1} + ||v||_{L^2} in mode coordinates.
    double state_norm(const State& X) const;
    double norm_c(const State& X) const;  // same norm of the center part

    // Grid synthesis/analysis against the L2-normalized basis (exposed for
    // oracle tests; analysis uses the uniform exact trigonometric rule).
    std::vector<double> synthesize(const std::vector<double>& coeffs) const;
    std::vector<double> analyze(const std::vector<double>& grid_values) const;
    std::size_t grid_points() const { return npts_; }

  private:
    ModelParams params_;
    Spectrum spec_;
    std::size_t npts_ = 0;
    // basis_[n * npts_ + g] = e_n(x_g)
    std::vector<double> basis_;
};

}  // namespace kg
