#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace decaylab {

enum class LawKind { linear, polynomial, log_weakened, exp_origin, double_exp_origin, quadratic_test };

std::string_view to_string(LawKind kind);
std::optional<LawKind> parse_law_kind(std::string_view name);

/// A damping nonlinearity g together with its certified growth bounds and the
/// concave majorant h0 used to build the decay ODE.
///
/// The catalog formula for g holds on |s| <= s_star and is continued past
/// s_star by its tangent line. h0 is either the power majorant (c y)^gamma
/// (linear, polynomial, log_weakened, quadratic_test) or the inverse of an
/// explicit h0^{-1} (exp_origin, double_exp_origin); in both cases it is
/// continued past y = 1 by its tangent line.
///
/// Build laws through the make_* factories: they fill in the bounds.
struct DampingLaw {
    LawKind kind = LawKind::linear;
    double p = 1.0;      // polynomial / log exponent
    double c = 1.0;      // majorant scale
    double gamma = 1.0;  // power majorant exponent, unused for the exp laws
    double m = 1.0;
    double M = 1.0;
    double M0 = 1.0;
    double M1 = 1.0;
    double eps0 = 0.5;
    double r0 = 1.0;
    double s_star = 1.0;
    double z_star = 1.0;  // h0(1): end of the concave branch of h0

    bool power_majorant() const;
};

DampingLaw make_linear(double gamma = 0.75, double c = 1.0);
DampingLaw make_polynomial(double p, double c = 1.0);
/// g(s) = s (ln(e + 1/|s|))^{-p}. Requires p * gamma <= 3.14 (2 - 2 gamma),
/// which makes the certified eps0 = c^gamma ln(e + 1)^{-p gamma} / 2 exact.
DampingLaw make_log_weakened(double p = 1.0, double gamma = 0.75, double c = 1.0);
DampingLaw make_exp_origin(double c = 1.0);
DampingLaw make_double_exp_origin(double c = 1.0);
/// Cubic g with h0(y) = sqrt(2 y), so that h^{-1}(y) = y^2 / 2 for m_a = 1.
DampingLaw make_quadratic_test();

double g_eval(const DampingLaw& law, double s);
double g_prime(const DampingLaw& law, double s);

/// Concave majorant h0; throws DomainError for y < 0.
double h0_eval(const DampingLaw& law, double y);

/// Value and the first three derivatives of a scalar function at a point.
struct Jet3 {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

/// h0^{-1} and its derivatives at z >= 0.
Jet3 h0_inv_jet(const DampingLaw& law, double z);

// h^{-1}(y) = m_a h0^{-1}(y / m_a), with m_a the integral of the damping
// coefficient. Derivatives follow by the chain rule:
// (h^{-1})^{(k)}(y) = m_a^{1-k} (h0^{-1})^{(k)}(y / m_a).

double h_inv(const DampingLaw& law, double m_a, double y);
/// Throws DomainError for y <= 0.
double h_inv_prime(const DampingLaw& law, double m_a, double y);
double h_inv_second(const DampingLaw& law, double m_a, double y);
double h_inv_third(const DampingLaw& law, double m_a, double y);
Jet3 h_inv_jet(const DampingLaw& law, double m_a, double y);

/// True when the exponential factor of an exp-type h^{-1} underflows at y,
/// in which case h_inv and its derivatives are clamped to 0.
bool h_inv_underflows(const DampingLaw& law, double m_a, double y);

/// Largest y for which h^{-1} still follows the strictly convex branch
/// (beyond it h0 is linear, so h^{-1} is affine).
double h_inv_convex_limit(const DampingLaw& law, double m_a);

/// The lower-bound construction uses a different inverse,
/// k(s) = g(sqrt s) sqrt s, built directly from g. Kept under its own name.
double lower_h_inv(const DampingLaw& law, double s);
double lower_h_inv_prime(const DampingLaw& law, double s);

/// min over log-uniform s in (0, 1] of h0(g(s) s) - eps0 (s^2 + g(s)^2).
/// Samples stay in the range where g(s) s is a normal double.
double verify_h0_domination(const DampingLaw& law, int n_samples);

/// A constant alpha with (h^{-1})'(s) <= alpha s (h^{-1})''(s) on the convex branch.
double lemma_alpha(const DampingLaw& law);

}  // namespace decaylab
