#include "decaylab/mesh_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "decaylab/errors.hpp"

namespace decaylab {

std::vector<double> Mesh1D::nodes() const {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = node(i);
    return x;
}

Mesh1D build_mesh(double length, std::size_t n) {
    if (!(length > 0.0) || !std::isfinite(length))
        throw ConfigError("mesh length must be positive and finite");
    if (n < 2) throw ConfigError("mesh needs at least 2 interior nodes");
    return Mesh1D{length, n, length / static_cast<double>(n + 1)};
}

double CoefficientProfile::max() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

double CoefficientProfile::mass(const Mesh1D& mesh) const {
    double s = 0.0;
    for (double v : values) s += v;
    return mesh.h * s;
}

namespace {

double smoothstep(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

}  // namespace

CoefficientProfile bump_profile(const Mesh1D& mesh, double x_lo, double x_hi,
                                double amplitude, double smoothing) {
    if (!(x_lo >= 0.0) || !(x_hi <= mesh.length) || x_lo > x_hi)
        throw ConfigError("profile interval must satisfy 0 <= x_lo <= x_hi <= L");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw ConfigError("profile amplitude must be nonnegative");
    if (!(smoothing >= 0.0)) throw ConfigError("profile smoothing must be nonnegative");

    CoefficientProfile p;
    p.x_lo = x_lo;
    p.x_hi = x_hi;
    p.amplitude = amplitude;
    p.smoothing = smoothing;
    p.values.assign(mesh.n, 0.0);
    for (std::size_t i = 0; i < mesh.n; ++i) {
        const double x = mesh.node(i);
        if (x < x_lo || x > x_hi) continue;
        if (smoothing == 0.0) {
            p.values[i] = amplitude;
            continue;
        }
        const double t = std::min(x - x_lo, x_hi - x) / smoothing;
        p.values[i] = amplitude * smoothstep(t);
    }
    return p;
}

CoefficientProfile zero_profile(const Mesh1D& mesh) {
    CoefficientProfile p;
    p.values.assign(mesh.n, 0.0);
    p.x_hi = 0.0;
    return p;
}

double poincare_constant(const Mesh1D& mesh, PoincareMode mode) {
    using std::numbers::pi;
    if (mode == PoincareMode::continuum) return mesh.length / pi;
    const double s = std::sin(pi * mesh.h / (2.0 * mesh.length));
    const double mu1 = 4.0 / (mesh.h * mesh.h) * s * s;
    return 1.0 / std::sqrt(mu1);
}

AdmissibilityReport check_b_admissible(const CoefficientProfile& b, double lambda,
                                       double delta) {
    if (!(lambda > 0.0)) throw ConfigError("Poincare constant must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    AdmissibilityReport r;
    r.lambda = lambda;
    r.delta = delta;
    r.b_max = b.max();
    r.threshold = (1.0 - delta) / (lambda * lambda);
    // Relative slack of a few ulps so that the equality case is accepted.
    constexpr double rel = 1e-12;
    r.admissible = r.b_max <= r.threshold * (1.0 + rel);
    r.strict_admissible = r.b_max <= 1.0 / (5.0 * lambda * lambda) * (1.0 + rel);
    return r;
}

void apply_laplacian(const Mesh1D& mesh, std::span<const double> w, std::span<double> out) {
    const std::size_t n = mesh.n;
    const double inv_h2 = 1.0 / (mesh.h * mesh.h);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i > 0 ? w[i - 1] : 0.0;
        const double right = i + 1 < n ? w[i + 1] : 0.0;
        out[i] = (right - 2.0 * w[i] + left) * inv_h2;
    }
}

double gradient_norm_sq(const Mesh1D& mesh, std::span<const double> w) {
    const std::size_t n = mesh.n;
    double s = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double cur = i < n ? w[i] : 0.0;
        const double d = cur - prev;
        s += d * d;
        prev = cur;
    }
    return s / mesh.h;
}

double inner(const Mesh1D& mesh, std::span<const double> f, std::span<const double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.n; ++i) s += f[i] * g[i];
    return mesh.h * s;
}

double weighted_inner(const Mesh1D& mesh, std::span<const double> c,
                      std::span<const double> f, std::span<const double> g) {
    double s = 0.0;
    for (std::size_t i = 0; i < mesh.n; ++i) s += c[i] * f[i] * g[i];
    return mesh.h * s;
}

}  // namespace decaylab
