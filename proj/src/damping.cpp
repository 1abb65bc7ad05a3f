#include "decaylab/damping.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "decaylab/errors.hpp"

namespace decaylab {

namespace {

using std::numbers::e;

// exp(-x) is zero in double precision beyond this.
constexpr double kExpUnderflow = 745.0;

// min over s in (0, 1] of (e s + 1) ln(e + 1/s) is 3.1462...; rounded down.
constexpr double kLogMonotoneBound = 3.14;

constexpr std::array<std::pair<LawKind, std::string_view>, 6> kNames{{
    {LawKind::linear, "linear"},
    {LawKind::polynomial, "polynomial"},
    {LawKind::log_weakened, "log_weakened"},
    {LawKind::exp_origin, "exp_origin"},
    {LawKind::double_exp_origin, "double_exp_origin"},
    {LawKind::quadratic_test, "quadratic_test"},
}};

// Catalog formula on 0 <= s <= s_star.
double g_core(const DampingLaw& law, double s) {
    if (s == 0.0) return 0.0;
    switch (law.kind) {
    case LawKind::linear:
        return s;
    case LawKind::polynomial:
    case LawKind::quadratic_test:
        return std::pow(s, law.p);
    case LawKind::log_weakened:
        return s * std::pow(std::log(e + 1.0 / s), -law.p);
    case LawKind::exp_origin:
        return s * s * s * std::exp(-1.0 / (s * s));
    case LawKind::double_exp_origin: {
        const double big = std::exp(1.0 / (s * s));
        if (big > kExpUnderflow) return 0.0;
        return s * s * s * std::exp(-big);
    }
    }
    return 0.0;
}

double g_core_prime(const DampingLaw& law, double s) {
    switch (law.kind) {
    case LawKind::linear:
        return 1.0;
    case LawKind::polynomial:
    case LawKind::quadratic_test:
        if (s == 0.0) return law.p == 1.0 ? 1.0 : 0.0;
        return law.p * std::pow(s, law.p - 1.0);
    case LawKind::log_weakened: {
        if (s == 0.0) return 0.0;
        const double L = std::log(e + 1.0 / s);
        return std::pow(L, -law.p) + law.p * std::pow(L, -law.p - 1.0) / (e * s + 1.0);
    }
    case LawKind::exp_origin:
        if (s == 0.0) return 0.0;
        return (3.0 * s * s + 2.0) * std::exp(-1.0 / (s * s));
    case LawKind::double_exp_origin: {
        if (s == 0.0) return 0.0;
        const double big = std::exp(1.0 / (s * s));
        if (big > kExpUnderflow) return 0.0;
        return (3.0 * s * s + 2.0 * big) * std::exp(-big);
    }
    }
    return 0.0;
}

// Explicit h0^{-1} of the exp laws on its convex branch, with derivatives.
Jet3 exp_h0_inv_core(const DampingLaw& law, double z) {
    Jet3 j;
    if (z <= 0.0) return j;
    const double c = law.c;
    const double cz = c / z;
    const double inv_c2 = 1.0 / (c * c);
    if (law.kind == LawKind::exp_origin) {
        if (cz > kExpUnderflow) return j;
        const double w = std::exp(-cz);
        j.value = inv_c2 * z * z * w;
        j.d1 = inv_c2 * w * (2.0 * z + c);
        j.d2 = inv_c2 * w * (2.0 + 2.0 * cz + cz * cz);
        j.d3 = c * w / (z * z * z * z);
        return j;
    }
    const double big = std::exp(cz);
    if (!(big <= kExpUnderflow)) return j;
    const double w = std::exp(-big);
    const double z2 = z * z;
    const double A = 2.0 * c * big / z + c * c * big * big / z2 + 2.0 - c * c * big / z2;
    const double dA = -2.0 * c * big / z2 - 2.0 * c * c * c * big * big / (z2 * z2)
                      - 2.0 * c * c * big * big / (z2 * z) + c * c * c * big / (z2 * z2);
    j.value = inv_c2 * z2 * w;
    j.d1 = inv_c2 * w * (2.0 * z + c * big);
    j.d2 = inv_c2 * w * A;
    j.d3 = inv_c2 * w * (c * big / z2 * A + dA);
    return j;
}

// Power majorant: h0^{-1}(z) = z^q / c with q = 1 / gamma.
Jet3 power_h0_inv_core(const DampingLaw& law, double z) {
    Jet3 j;
    if (z <= 0.0) return j;
    const double q = 1.0 / law.gamma;
    // Separate powers so tiny z does not underflow z^q before dividing.
    j.value = std::pow(z, q) / law.c;
    j.d1 = q * std::pow(z, q - 1.0) / law.c;
    j.d2 = q * (q - 1.0) * std::pow(z, q - 2.0) / law.c;
    j.d3 = q * (q - 1.0) * (q - 2.0) * std::pow(z, q - 3.0) / law.c;
    return j;
}

Jet3 h0_inv_core(const DampingLaw& law, double z) {
    return law.power_majorant() ? power_h0_inv_core(law, z) : exp_h0_inv_core(law, z);
}

// Monotone bisection for f(x) = target on [lo, hi]; runs to full precision.
template <class F>
double bisect_increasing(F&& f, double target, double lo, double hi) {
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void fill_growth_bounds(DampingLaw& law) {
    const double gs = g_core(law, law.s_star) / law.s_star;
    const double gp = g_core_prime(law, law.s_star);
    law.m = std::min(gs, gp);
    law.M = std::max(gs, gp);
    law.M0 = gs;
    // g' is nondecreasing on [0, s_star] for every catalog law except the log
    // one, where L^{-p} <= 1 and p L^{-p-1} / (e s + 1) <= p give 1 + p.
    law.M1 = law.kind == LawKind::log_weakened ? 1.0 + law.p : gp;
}

void fill_exp_z_star(DampingLaw& law) {
    // h0(1): solve h0^{-1}(z) = 1 on the convex branch.
    double hi = 1.0;
    while (exp_h0_inv_core(law, hi).value < 1.0) hi *= 2.0;
    law.z_star = bisect_increasing([&](double z) { return exp_h0_inv_core(law, z).value; },
                                   1.0, 0.0, hi);
}

}  // namespace

std::string_view to_string(LawKind kind) {
    for (const auto& [k, name] : kNames)
        if (k == kind) return name;
    return "unknown";
}

std::optional<LawKind> parse_law_kind(std::string_view name) {
    for (const auto& [k, n] : kNames)
        if (n == name) return k;
    return std::nullopt;
}

bool DampingLaw::power_majorant() const {
    return kind != LawKind::exp_origin && kind != LawKind::double_exp_origin;
}

DampingLaw make_linear(double gamma, double c) {
    if (!(gamma > 0.5 && gamma < 1.0)) throw ConfigError("linear law needs 1/2 < gamma < 1");
    if (!(c > 0.0)) throw ConfigError("majorant scale c must be positive");
    DampingLaw law;
    law.kind = LawKind::linear;
    law.gamma = gamma;
    law.c = c;
    law.z_star = std::pow(c, gamma);
    law.eps0 = 0.5 * std::pow(c, gamma);
    fill_growth_bounds(law);
    return law;
}

DampingLaw make_polynomial(double p, double c) {
    if (!(p >= 1.0)) throw ConfigError("polynomial law needs p >= 1");
    if (!(c > 0.0)) throw ConfigError("majorant scale c must be positive");
    DampingLaw law;
    law.kind = LawKind::polynomial;
    law.p = p;
    law.c = c;
    law.gamma = 2.0 / (p + 1.0);
    law.z_star = std::pow(c, law.gamma);
    // h0(|s|^{p+1}) = c^gamma s^2 and s^2 + s^{2p} <= 2 s^2 on |s| <= 1.
    law.eps0 = 0.5 * std::pow(c, law.gamma);
    fill_growth_bounds(law);
    return law;
}

DampingLaw make_log_weakened(double p, double gamma, double c) {
    if (!(p > 0.0)) throw ConfigError("log_weakened law needs p > 0");
    if (!(gamma > 0.5 && gamma < 1.0)) throw ConfigError("log_weakened law needs 1/2 < gamma < 1");
    if (!(c > 0.0)) throw ConfigError("majorant scale c must be positive");
    if (p * gamma > kLogMonotoneBound * (2.0 - 2.0 * gamma))
        throw ConfigError("log_weakened law: p * gamma too large for the certified eps0");
    DampingLaw law;
    law.kind = LawKind::log_weakened;
    law.p = p;
    law.gamma = gamma;
    law.c = c;
    law.z_star = std::pow(c, gamma);
    // s^{2 gamma - 2} L(s)^{-p gamma} is decreasing on (0, 1], so its minimum is at s = 1.
    law.eps0 = 0.5 * std::pow(c, gamma) * std::pow(std::log(e + 1.0), -p * gamma);
    fill_growth_bounds(law);
    return law;
}

DampingLaw make_exp_origin(double c) {
    if (!(c > 0.0)) throw ConfigError("majorant scale c must be positive");
    DampingLaw law;
    law.kind = LawKind::exp_origin;
    law.c = c;
    law.gamma = 0.0;
    // h0(g(s) s) = c s^2 and g(s)^2 <= s^2 on |s| <= 1.
    law.eps0 = 0.5 * c;
    fill_exp_z_star(law);
    fill_growth_bounds(law);
    return law;
}

DampingLaw make_double_exp_origin(double c) {
    DampingLaw law = make_exp_origin(c);
    law.kind = LawKind::double_exp_origin;
    fill_exp_z_star(law);
    fill_growth_bounds(law);
    return law;
}

DampingLaw make_quadratic_test() {
    DampingLaw law = make_polynomial(3.0, 2.0);
    law.kind = LawKind::quadratic_test;
    return law;
}

double g_eval(const DampingLaw& law, double s) {
    const double a = std::abs(s);
    double v;
    if (a <= law.s_star)
        v = g_core(law, a);
    else
        v = g_core(law, law.s_star) + g_core_prime(law, law.s_star) * (a - law.s_star);
    return s < 0.0 ? -v : v;
}

double g_prime(const DampingLaw& law, double s) {
    const double a = std::abs(s);
    return g_core_prime(law, std::min(a, law.s_star));
}

double h0_eval(const DampingLaw& law, double y) {
    if (!(y >= 0.0)) throw DomainError("h0 is defined for y >= 0");
    if (y == 0.0) return 0.0;
    if (y > 1.0) {
        // Tangent line at y = 1; slope 1 / (h0^{-1})'(h0(1)).
        const double slope = 1.0 / h0_inv_core(law, law.z_star).d1;
        return law.z_star + slope * (y - 1.0);
    }
    if (law.power_majorant()) return std::pow(law.c * y, law.gamma);
    return bisect_increasing([&](double z) { return exp_h0_inv_core(law, z).value; }, y, 0.0,
                             law.z_star);
}

Jet3 h0_inv_jet(const DampingLaw& law, double z) {
    if (!(z >= 0.0)) throw DomainError("h0^{-1} is defined for z >= 0");
    if (z <= law.z_star) return h0_inv_core(law, z);
    const Jet3 edge = h0_inv_core(law, law.z_star);
    return Jet3{1.0 + edge.d1 * (z - law.z_star), edge.d1, 0.0, 0.0};
}

double h_inv(const DampingLaw& law, double m_a, double y) {
    if (!(m_a > 0.0)) throw DomainError("m_a must be positive");
    if (!(y >= 0.0)) throw DomainError("h^{-1} is defined for y >= 0");
    return m_a * h0_inv_jet(law, y / m_a).value;
}

Jet3 h_inv_jet(const DampingLaw& law, double m_a, double y) {
    if (!(m_a > 0.0)) throw DomainError("m_a must be positive");
    if (!(y > 0.0)) throw DomainError("derivatives of h^{-1} need y > 0");
    const Jet3 j = h0_inv_jet(law, y / m_a);
    return Jet3{m_a * j.value, j.d1, j.d2 / m_a, j.d3 / (m_a * m_a)};
}

double h_inv_prime(const DampingLaw& law, double m_a, double y) {
    return h_inv_jet(law, m_a, y).d1;
}

double h_inv_second(const DampingLaw& law, double m_a, double y) {
    return h_inv_jet(law, m_a, y).d2;
}

double h_inv_third(const DampingLaw& law, double m_a, double y) {
    return h_inv_jet(law, m_a, y).d3;
}

bool h_inv_underflows(const DampingLaw& law, double m_a, double y) {
    if (law.power_majorant()) return false;
    if (y <= 0.0) return true;
    const double cz = law.c * m_a / y;
    if (law.kind == LawKind::exp_origin) return cz > kExpUnderflow;
    return cz > std::log(kExpUnderflow);
}

double h_inv_convex_limit(const DampingLaw& law, double m_a) { return m_a * law.z_star; }

double lower_h_inv(const DampingLaw& law, double s) {
    if (!(s >= 0.0)) throw DomainError("lower-bound h^{-1} is defined for s >= 0");
    const double r = std::sqrt(s);
    return g_eval(law, r) * r;
}

double lower_h_inv_prime(const DampingLaw& law, double s) {
    if (!(s >= 0.0)) throw DomainError("lower-bound h^{-1} is defined for s >= 0");
    if (s == 0.0) return g_prime(law, 0.0);
    const double r = std::sqrt(s);
    return 0.5 * (g_prime(law, r) + g_eval(law, r) / r);
}

double verify_h0_domination(const DampingLaw& law, int n_samples) {
    if (n_samples < 10) throw ConfigError("verify_h0_domination needs at least 10 samples");
    // Smallest s for which g(s) s is a normal double (exp laws underflow early).
    constexpr double kFloor = 1e-290;
    double s_min = 1e-6;
    if (g_eval(law, s_min) * s_min < kFloor)
        s_min = bisect_increasing([&](double s) { return g_eval(law, s) * s; }, kFloor, s_min,
                                  1.0);
    const double log_lo = std::log(s_min);
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_samples; ++k) {
        const double s = std::exp(log_lo * (1.0 - static_cast<double>(k) / (n_samples - 1)));
        const double g = g_eval(law, s);
        const double slack = h0_eval(law, g * s) - law.eps0 * (s * s + g * g);
        worst = std::min(worst, slack);
    }
    return worst;
}

double lemma_alpha(const DampingLaw& law) {
    // Power branch: h^{-1} ~ y^q, ratio (h^{-1})' / (y (h^{-1})'') = 1 / (q - 1).
    if (law.power_majorant()) return law.gamma / (1.0 - law.gamma);
    // Exp branches: the ratio stays below 1 for every z > 0.
    return 1.0;
}

}  // namespace decaylab
