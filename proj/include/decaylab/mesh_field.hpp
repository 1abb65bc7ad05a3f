#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace decaylab {

/// Uniform grid on (0, L) with n interior nodes and homogeneous Dirichlet ends.
/// Node i (0-based) sits at x = (i + 1) * h.
struct Mesh1D {
    double length = 1.0;
    std::size_t n = 0;
    double h = 0.0;

    double node(std::size_t i) const { return static_cast<double>(i + 1) * h; }
    std::vector<double> nodes() const;
};

Mesh1D build_mesh(double length, std::size_t n);

/// Nonnegative coefficient (a or b) sampled at the interior nodes.
struct CoefficientProfile {
    std::vector<double> values;
    double x_lo = 0.0;
    double x_hi = 0.0;
    double amplitude = 0.0;
    double smoothing = 0.0;

    double max() const;
    /// Rectangle-rule integral h * sum(values).
    double mass(const Mesh1D& mesh) const;
    bool is_zero() const { return max() == 0.0; }
};

/// Plateau of height `amplitude` on [x_lo + s, x_hi - s] with cubic smoothstep
/// ramps of width s = smoothing, zero outside [x_lo, x_hi]. s = 0 gives the
/// sharp indicator of [x_lo, x_hi].
CoefficientProfile bump_profile(const Mesh1D& mesh, double x_lo, double x_hi,
                                double amplitude, double smoothing);

CoefficientProfile zero_profile(const Mesh1D& mesh);

enum class PoincareMode { continuum, discrete };

/// Constant lambda with ||w|| <= lambda ||w'|| for Dirichlet w.
/// continuum: L / pi. discrete: 1 / sqrt(mu_1) for the three-point Laplacian,
/// mu_1 = (4 / h^2) sin^2(pi h / 2L).
double poincare_constant(const Mesh1D& mesh, PoincareMode mode);

struct AdmissibilityReport {
    double lambda = 0.0;
    double delta = 0.0;
    double b_max = 0.0;
    double threshold = 0.0;  // (1 - delta) / lambda^2
    bool admissible = false;
    /// Stricter smallness b_max <= 1 / (5 lambda^2) used for unique continuation.
    bool strict_admissible = false;
};

AdmissibilityReport check_b_admissible(const CoefficientProfile& b, double lambda,
                                       double delta);

// Discrete operators shared by the solver and the energy functionals.
// All fields are interior-node arrays; the boundary values are implicit zeros.

/// (Delta_h w)_i = (w_{i+1} - 2 w_i + w_{i-1}) / h^2.
void apply_laplacian(const Mesh1D& mesh, std::span<const double> w, std::span<double> out);

/// h * sum_{i=0}^{n} ((w_{i+1} - w_i) / h)^2 with ghost zeros.
double gradient_norm_sq(const Mesh1D& mesh, std::span<const double> w);

/// h * sum f_i g_i.
double inner(const Mesh1D& mesh, std::span<const double> f, std::span<const double> g);

/// h * sum c_i f_i g_i.
double weighted_inner(const Mesh1D& mesh, std::span<const double> c,
                      std::span<const double> f, std::span<const double> g);

}  // namespace decaylab
