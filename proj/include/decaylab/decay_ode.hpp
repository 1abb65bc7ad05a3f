#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "decaylab/damping.hpp"

namespace decaylab {

/// Parameters of the decay ODE  phi' = (eps0 / 2 C1) phi (h^{-1})'(phi^{-beta}).
/// C1 has no constructive value; it is an explicit input (default 1).
struct PhiParams {
    double eps0 = 1.0;
    double C1 = 1.0;
    double beta = 2.0;
    double phi0 = 1.0;
    double r0 = 1.0;

    double rate() const { return eps0 / (2.0 * C1); }
};

enum class TrajectoryKind { phi, theta, psi };

struct Trajectory {
    std::vector<double> times;
    std::vector<double> values;
    TrajectoryKind kind = TrajectoryKind::phi;
    /// Monotone in the expected direction (and concave for phi) on the samples.
    bool shape_ok = true;
};

/// Integration controls shared by the scalar solvers. The RK4 substep is
/// min(grid spacing, substep_fraction / initial log-rate).
struct OdeControls {
    double substep_fraction = 0.01;
};

struct Phi0Admissibility {
    bool admissible = false;
    bool within_r0 = false;
    double lhs = 0.0;  // (h^{-1})'(phi0^{-beta})
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs
};

/// min( (2 C1 delta / eps0) / (8 C_T + 2 lambda^2 + 1), (1 / eps0) / (1/m + M^2) ).
double phi0_admissibility_bound(double eps0, double C1, double delta, double lambda, double C_T,
                                double m, double M);

Phi0Admissibility phi_initial_admissible(const PhiParams& params, const DampingLaw& law,
                                         double m_a, double delta, double lambda, double C_T,
                                         double m, double M);

/// phi0 with (h^{-1})'(phi0^{-beta}) = fraction * rhs, capped so that
/// phi0^{-beta} stays inside (0, min(r0, convex branch)].
double admissible_phi0(const PhiParams& params, const DampingLaw& law, double m_a, double rhs,
                       double fraction);

Trajectory solve_phi(const PhiParams& params, const DampingLaw& law, double m_a,
                     std::span<const double> t_grid, OdeControls ctl = {});

/// theta' = -(eps0 / 2 C1) theta (h^{-1})'(theta^beta), theta(0) = theta0.
Trajectory solve_theta(const PhiParams& params, const DampingLaw& law, double m_a, double theta0,
                       std::span<const double> t_grid, OdeControls ctl = {});

/// psi' = -a_inf psi k'(psi) with k(s) = g(sqrt s) sqrt s (lower-bound inverse).
Trajectory solve_psi(double a_inf, const DampingLaw& law, double psi0,
                     std::span<const double> t_grid, OdeControls ctl = {});

/// Inverse of (h^{-1})' on [0, (h^{-1})'(y_top)], y_top = min(y_max, convex branch end).
/// Analytic for power majorants, bisection otherwise. Throws DomainError outside.
double h_inv_prime_inverse(const DampingLaw& law, double m_a, double x, double y_max);

struct BoundParams {
    double alpha = 1.0;
    double beta = 1.0;
    double C = 1.0;
    double k0 = 1.0;
};

/// [alpha / (beta C (h^{-1})'(r0)), alpha / (beta C (h^{-1})'(theta0^beta))].
std::pair<double, double> k0_window(const BoundParams& bp, const DampingLaw& law, double m_a,
                                    double r0, double theta0);

/// ( ((h^{-1})')^{-1}( (alpha / beta C) / (t + k0) ) )^{1/beta}.
double theta_bound(double t, const BoundParams& bp, const DampingLaw& law, double m_a,
                   double r0);

/// Convex conjugate H*(x) = x y - h^{-1}(y), y = ((h^{-1})')^{-1}(x), for
/// 0 <= x <= (h^{-1})'(law.r0).
double conjugate_eval(const DampingLaw& law, double m_a, double x);

enum class Alpha0Status { positive, zero, divergent };

struct Alpha0Estimate {
    double value = 0.0;
    Alpha0Status status = Alpha0Status::zero;
    bool converged = false;
};

/// lim_{s -> inf} s (h^{-1})'(s^{-beta}) along a geometric sequence with
/// Aitken extrapolation.
Alpha0Estimate estimate_alpha0(const DampingLaw& law, double m_a, double beta);

struct A2Report {
    Alpha0Estimate alpha0;
    /// Vanishing limits at 0 of h^{-1}, (h^{-1})', s (h^{-1})'', s^2 (h^{-1})''',
    /// together with strict convexity on the samples.
    bool limits_ok = false;
    double limits_worst = 0.0;
    bool convex_ok = false;
    /// (h^{-1})'(s) <= beta s (h^{-1})''(s)
    bool ineq2_ok = false;
    double ineq2_worst = 0.0;  // most negative normalized slack
    double ineq2_worst_at = 0.0;
    /// (beta^2 - beta) s (h^{-1})'' + beta^2 s^2 (h^{-1})''' >= 0
    bool ineq3_ok = false;
    double ineq3_worst = 0.0;
    double ineq3_worst_at = 0.0;
    /// Ratio bound; vacuous unless beta s (h^{-1})'' - (h^{-1})' > 0 on all samples.
    bool ratio_bounded = false;
    bool ratio_applies = false;
    double ratio_max = 0.0;
    int underflow_samples = 0;
    bool verdict = false;
};

A2Report check_A2(const DampingLaw& law, double m_a, double beta, double r0, int n_samples);

struct PhiAudit {
    bool increasing = false;
    bool concave = false;
    bool ratio_decreasing = false;
    double alpha0 = 0.0;
    double phi_prime_start = 0.0;
    double phi_prime_end = 0.0;
    double phi_prime_limit = 0.0;  // eps0 alpha0 / 2 C1
    double curvature_integral = 0.0;  // int_0^T |phi''|
    double curvature_target = 0.0;    // phi'(0) - eps0 alpha0 / 2 C1
    double conjugate_budget = 0.0;    // (eps0 / 2 C1) int_0^T phi H*(2 C1 phi' / eps0 phi)
    double budget_bound = 0.0;        // phi0^{1-beta} / (beta - 1)
    bool budget_ok = false;
    bool ok = false;
};

PhiAudit phi_property_audit(const PhiParams& params, const DampingLaw& law, double m_a,
                            double horizon, int n_intervals = 20000, OdeControls ctl = {});

/// Uniform grid 0, dt, ..., ending exactly at t_end.
std::vector<double> uniform_grid(double t_end, std::size_t n_intervals);

}  // namespace decaylab
