#include "decaylab/decay_ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "decaylab/errors.hpp"

namespace decaylab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw ConfigError("time grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ConfigError("time grid must be strictly increasing");
}

// Classical RK4 for an autonomous scalar ODE, sampled on `grid`.
template <class F>
std::vector<double> integrate_rk4(F&& f, double y0, std::span<const double> grid, double h_max) {
    std::vector<double> out(grid.size());
    double y = y0;
    out[0] = y;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double span = grid[i] - grid[i - 1];
        const double m = std::max(1.0, std::ceil(span / h_max));
        const auto substeps = static_cast<std::size_t>(m);
        const double h = span / m;
        for (std::size_t j = 0; j < substeps; ++j) {
            const double k1 = f(y);
            const double k2 = f(y + 0.5 * h * k1);
            const double k3 = f(y + 0.5 * h * k2);
            const double k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!std::isfinite(y)) {
            std::ostringstream msg;
            msg << "non-finite ODE value at t=" << grid[i];
            throw SolverError(msg.str());
        }
        out[i] = y;
    }
    return out;
}

double max_substep(double fraction, double rate0) {
    if (!(fraction > 0.0)) throw ConfigError("substep fraction must be positive");
    return rate0 > 0.0 ? fraction / rate0 : kInf;
}

bool monotone(const std::vector<double>& v, bool increasing) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (increasing ? v[i] < v[i - 1] : v[i] > v[i - 1]) return false;
    }
    return true;
}

// Slopes between samples must not increase (up to rounding).
bool concave_samples(std::span<const double> t, const std::vector<double>& v) {
    for (std::size_t i = 2; i < v.size(); ++i) {
        const double s0 = (v[i - 1] - v[i - 2]) / (t[i - 1] - t[i - 2]);
        const double s1 = (v[i] - v[i - 1]) / (t[i] - t[i - 1]);
        const double scale = 1e-7 * std::max(std::abs(s0), std::abs(s1))
                             + 1e-13 * std::abs(v[i]) / (t[i] - t[i - 1]);
        if (s1 - s0 > scale) return false;
    }
    return true;
}

void validate(const PhiParams& p) {
    if (!(p.eps0 > 0.0)) throw ConfigError("eps0 must be positive");
    if (!(p.C1 > 0.0)) throw ConfigError("C1 must be positive");
    if (!(p.beta > 0.0)) throw ConfigError("beta must be positive");
    if (!(p.phi0 > 0.0)) throw ConfigError("phi0 must be positive");
    if (!(p.r0 > 0.0 && p.r0 <= 1.0)) throw ConfigError("r0 must lie in (0, 1]");
}

// Aitken delta-squared extrapolation of x0, x1, x2 (falls back to x2).
double aitken(double x0, double x1, double x2) {
    const double d1 = x1 - x0;
    const double d2 = x2 - x1;
    const double denom = d2 - d1;
    if (denom == 0.0 || !std::isfinite(denom)) return x2;
    return x2 - d2 * d2 / denom;
}

}  // namespace

std::vector<double> uniform_grid(double t_end, std::size_t n_intervals) {
    if (n_intervals == 0) throw ConfigError("grid needs at least one interval");
    std::vector<double> g(n_intervals + 1);
    for (std::size_t i = 0; i <= n_intervals; ++i)
        g[i] = t_end * static_cast<double>(i) / static_cast<double>(n_intervals);
    g.back() = t_end;
    return g;
}

double phi0_admissibility_bound(double eps0, double C1, double delta, double lambda, double C_T,
                                double m, double M) {
    const double first = 2.0 * C1 * delta / eps0 / (8.0 * C_T + 2.0 * lambda * lambda + 1.0);
    const double second = 1.0 / eps0 / (1.0 / m + M * M);
    return std::min(first, second);
}

Phi0Admissibility phi_initial_admissible(const PhiParams& params, const DampingLaw& law,
                                         double m_a, double delta, double lambda, double C_T,
                                         double m, double M) {
    validate(params);
    Phi0Admissibility r;
    const double y0 = std::pow(params.phi0, -params.beta);
    r.within_r0 = y0 <= params.r0;
    r.lhs = h_inv_prime(law, m_a, y0);
    r.rhs = phi0_admissibility_bound(params.eps0, params.C1, delta, lambda, C_T, m, M);
    r.margin = r.rhs - r.lhs;
    r.admissible = r.within_r0 && r.lhs < r.rhs;
    return r;
}

double admissible_phi0(const PhiParams& params, const DampingLaw& law, double m_a, double rhs,
                       double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("phi0 safety fraction must lie in (0, 1)");
    const double y_top = std::min(params.r0, h_inv_convex_limit(law, m_a));
    double y = y_top;
    const double target = fraction * rhs;
    if (target < h_inv_prime(law, m_a, y_top)) y = h_inv_prime_inverse(law, m_a, target, y_top);
    return std::pow(y, -1.0 / params.beta);
}

Trajectory solve_phi(const PhiParams& params, const DampingLaw& law, double m_a,
                     std::span<const double> t_grid, OdeControls ctl) {
    validate(params);
    check_grid(t_grid);
    const double kappa = params.rate();
    const double beta = params.beta;
    auto rhs = [&](double phi) { return kappa * phi * h_inv_prime(law, m_a, std::pow(phi, -beta)); };
    const double h_max = max_substep(ctl.substep_fraction,
                                     kappa * h_inv_prime(law, m_a, std::pow(params.phi0, -beta)));
    Trajectory tr;
    tr.kind = TrajectoryKind::phi;
    tr.times.assign(t_grid.begin(), t_grid.end());
    tr.values = integrate_rk4(rhs, params.phi0, t_grid, h_max);
    tr.shape_ok = monotone(tr.values, true) && concave_samples(t_grid, tr.values);
    return tr;
}

Trajectory solve_theta(const PhiParams& params, const DampingLaw& law, double m_a, double theta0,
                       std::span<const double> t_grid, OdeControls ctl) {
    validate(params);
    check_grid(t_grid);
    if (!(theta0 > 0.0)) throw ConfigError("theta0 must be positive");
    if (std::pow(theta0, params.beta) > params.r0) throw ConfigError("theta0^beta must not exceed r0");
    const double kappa = params.rate();
    const double beta = params.beta;
    auto rhs = [&](double theta) {
        if (theta <= 0.0) return 0.0;
        return -kappa * theta * h_inv_prime(law, m_a, std::pow(theta, beta));
    };
    const double h_max =
        max_substep(ctl.substep_fraction, kappa * h_inv_prime(law, m_a, std::pow(theta0, beta)));
    Trajectory tr;
    tr.kind = TrajectoryKind::theta;
    tr.times.assign(t_grid.begin(), t_grid.end());
    tr.values = integrate_rk4(rhs, theta0, t_grid, h_max);
    tr.shape_ok = monotone(tr.values, false)
                  && std::all_of(tr.values.begin(), tr.values.end(), [](double v) { return v > 0.0; });
    return tr;
}

Trajectory solve_psi(double a_inf, const DampingLaw& law, double psi0,
                     std::span<const double> t_grid, OdeControls ctl) {
    check_grid(t_grid);
    if (!(a_inf > 0.0)) throw ConfigError("sup of the damping coefficient must be positive");
    if (!(psi0 > 0.0)) throw ConfigError("psi0 must be positive");
    auto rhs = [&](double psi) {
        if (psi <= 0.0) return 0.0;
        return -a_inf * psi * lower_h_inv_prime(law, psi);
    };
    const double h_max = max_substep(ctl.substep_fraction, a_inf * lower_h_inv_prime(law, psi0));
    Trajectory tr;
    tr.kind = TrajectoryKind::psi;
    tr.times.assign(t_grid.begin(), t_grid.end());
    tr.values = integrate_rk4(rhs, psi0, t_grid, h_max);
    tr.shape_ok = monotone(tr.values, false)
                  && std::all_of(tr.values.begin(), tr.values.end(), [](double v) { return v > 0.0; });
    return tr;
}

double h_inv_prime_inverse(const DampingLaw& law, double m_a, double x, double y_max) {
    if (!(m_a > 0.0)) throw DomainError("m_a must be positive");
    const double y_top = std::min(y_max, h_inv_convex_limit(law, m_a));
    const double x_top = h_inv_prime(law, m_a, y_top);
    if (!(x >= 0.0) || x > x_top) {
        std::ostringstream msg;
        msg << "argument " << x << " outside the range [0, " << x_top
            << "] of (h^{-1})' on (0, " << y_top << "]";
        throw DomainError(msg.str());
    }
    if (x == 0.0) return 0.0;
    if (x == x_top) return y_top;
    if (law.power_majorant()) {
        // (h^{-1})'(y) = (q / c) (y / m_a)^{q - 1}
        const double q = 1.0 / law.gamma;
        return m_a * std::pow(law.c * x / q, 1.0 / (q - 1.0));
    }
    double lo = 0.0;
    double hi = y_top;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (h_inv_prime(law, m_a, mid) < x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> k0_window(const BoundParams& bp, const DampingLaw& law, double m_a,
                                    double r0, double theta0) {
    const double scale = bp.alpha / (bp.beta * bp.C);
    return {scale / h_inv_prime(law, m_a, r0),
            scale / h_inv_prime(law, m_a, std::pow(theta0, bp.beta))};
}

double theta_bound(double t, const BoundParams& bp, const DampingLaw& law, double m_a, double r0) {
    if (!(t >= 0.0)) throw DomainError("theta_bound needs t >= 0");
    const double arg = bp.alpha / (bp.beta * bp.C) / (t + bp.k0);
    return std::pow(h_inv_prime_inverse(law, m_a, arg, r0), 1.0 / bp.beta);
}

double conjugate_eval(const DampingLaw& law, double m_a, double x) {
    const double y = h_inv_prime_inverse(law, m_a, x, law.r0);
    if (y == 0.0) return 0.0;
    return x * y - h_inv(law, m_a, y);
}

Alpha0Estimate estimate_alpha0(const DampingLaw& law, double m_a, double beta) {
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    // s_k = 10^{k / 2}, keeping s^{-beta} a normal double.
    std::vector<double> vals;
    for (int k = 2; k <= 200; ++k) {
        const double s = std::pow(10.0, 0.5 * k);
        const double y = std::pow(s, -beta);
        if (y < 1e-280) break;
        if (y > law.r0) continue;
        vals.push_back(s * h_inv_prime(law, m_a, y));
    }
    Alpha0Estimate est;
    if (vals.size() < 4) throw SolverError("alpha0 estimation: too few samples");
    const std::size_t n = vals.size();
    if (vals[n - 1] == 0.0) {
        est.status = Alpha0Status::zero;
        est.converged = true;
        return est;
    }
    // Local log-log slopes against s (consecutive samples are half a decade apart).
    auto slope = [&](std::size_t i) {
        if (!(vals[i - 1] > 0.0)) return -kInf;
        return std::log10(vals[i] / vals[i - 1]) / 0.5;
    };
    const double s1 = slope(n - 2);
    const double s2 = slope(n - 1);
    if (s1 > 1e-6 && s2 > 1e-6) {
        est.value = kInf;
        est.status = Alpha0Status::divergent;
        est.converged = true;
        return est;
    }
    if (s1 < -1e-6 && s2 < -1e-6) {
        est.status = Alpha0Status::zero;
        est.converged = true;
        return est;
    }
    const double a1 = aitken(vals[n - 4], vals[n - 3], vals[n - 2]);
    const double a2 = aitken(vals[n - 3], vals[n - 2], vals[n - 1]);
    est.value = a2;
    est.status = Alpha0Status::positive;
    est.converged = std::abs(a2 - a1) <= 1e-6 * std::abs(a2);
    return est;
}

A2Report check_A2(const DampingLaw& law, double m_a, double beta, double r0, int n_samples) {
    if (n_samples < 100) throw ConfigError("check_A2 needs at least 100 samples");
    if (!(r0 > 0.0 && r0 <= 1.0)) throw ConfigError("r0 must lie in (0, 1]");
    A2Report rep;
    rep.alpha0 = estimate_alpha0(law, m_a, beta);

    // Limits at 0 along s_k = r0 10^{-k}.
    {
        double worst = 0.0;
        bool ok = true;
        std::vector<Jet3> seq;
        std::vector<double> ss;
        for (int k = 1; k <= 60; ++k) {
            const double s = r0 * std::pow(10.0, -k);
            seq.push_back(h_inv_jet(law, m_a, s));
            ss.push_back(s);
        }
        const Jet3 top = h_inv_jet(law, m_a, r0);
        auto quantity = [&](std::size_t i, int which) {
            const Jet3& j = seq[i];
            switch (which) {
            case 0: return j.value;
            case 1: return j.d1;
            case 2: return ss[i] * j.d2;
            default: return ss[i] * ss[i] * j.d3;
            }
        };
        const double ref[4] = {top.value, top.d1, r0 * top.d2, r0 * r0 * top.d3};
        const std::size_t n = seq.size();
        for (int w = 0; w < 4; ++w) {
            const double lim = aitken(quantity(n - 3, w), quantity(n - 2, w), quantity(n - 1, w));
            const double tail = std::max(std::abs(quantity(n - 1, w)), std::abs(lim));
            const double rel = tail / std::max(std::abs(ref[w]), 1e-300);
            worst = std::max(worst, rel);
            if (rel > 1e-8 || std::abs(quantity(n - 1, w)) > std::abs(quantity(n - 2, w)) * (1.0 + 1e-12))
                ok = false;
        }
        rep.limits_worst = worst;
        rep.limits_ok = ok;
    }

    // Log-uniform samples of [r0 1e-10, r0].
    bool convex = true;
    bool ineq2 = true;
    bool ineq3 = true;
    bool ratio_applies = true;
    rep.ineq2_worst = kInf;
    rep.ineq3_worst = kInf;
    std::vector<double> ratios;
    const double log_lo = std::log(r0 * 1e-10);
    const double log_hi = std::log(r0);
    for (int k = 0; k < n_samples; ++k) {
        const double s = k + 1 == n_samples
                             ? r0
                             : std::exp(log_lo + (log_hi - log_lo) * k / (n_samples - 1));
        if (h_inv_underflows(law, m_a, s)) {
            ++rep.underflow_samples;
            continue;
        }
        const Jet3 j = h_inv_jet(law, m_a, s);
        if (j.d1 == 0.0 && j.d2 == 0.0) {
            ++rep.underflow_samples;
            continue;
        }
        if (!(j.d2 > 0.0)) convex = false;

        const double lhs2 = j.d1;
        const double rhs2 = beta * s * j.d2;
        const double slack2 = (rhs2 - lhs2) / (std::abs(lhs2) + std::abs(rhs2));
        if (slack2 < rep.ineq2_worst) {
            rep.ineq2_worst = slack2;
            rep.ineq2_worst_at = s;
        }
        if (slack2 < -1e-9) ineq2 = false;

        const double t1 = (beta * beta - beta) * s * j.d2;
        const double t2 = beta * beta * s * s * j.d3;
        const double val3 = t1 + t2;
        const double scale3 = std::abs(t1) + std::abs(t2);
        const double slack3 = scale3 > 0.0 ? val3 / scale3 : 0.0;
        if (slack3 < rep.ineq3_worst) {
            rep.ineq3_worst = slack3;
            rep.ineq3_worst_at = s;
        }
        if (slack3 < -1e-9) ineq3 = false;

        const double gap = rhs2 - lhs2;
        if (!(gap > 1e-9 * (std::abs(lhs2) + std::abs(rhs2)))) ratio_applies = false;
        ratios.push_back(gap > 0.0 ? j.d1 * val3 / gap : kInf);
    }
    rep.convex_ok = convex;
    rep.limits_ok = rep.limits_ok && convex;
    rep.ineq2_ok = ineq2;
    rep.ineq3_ok = ineq3;
    rep.ratio_applies = ratio_applies && !ratios.empty();
    if (!rep.ratio_applies) {
        rep.ratio_bounded = true;
    } else {
        // Bounded if finite and not growing towards s -> 0: the smallest tenth
        // of the usable samples must not exceed twice the maximum over the rest.
        const std::size_t n_low = std::max<std::size_t>(1, ratios.size() / 10);
        double low_max = 0.0;
        double rest_max = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            if (!std::isfinite(ratios[i])) finite = false;
            double& slot = i < n_low ? low_max : rest_max;
            slot = std::max(slot, ratios[i]);
        }
        rep.ratio_max = std::max(low_max, rest_max);
        rep.ratio_bounded = finite && low_max <= 2.0 * rest_max + 1e-300;
    }
    rep.verdict = rep.limits_ok && rep.ineq2_ok && rep.ineq3_ok && rep.ratio_bounded;
    return rep;
}

PhiAudit phi_property_audit(const PhiParams& params, const DampingLaw& law, double m_a,
                            double horizon, int n_intervals, OdeControls ctl) {
    validate(params);
    if (!(params.beta > 1.0)) throw ConfigError("the phi audit needs beta > 1");
    if (!(horizon > 0.0)) throw ConfigError("audit horizon must be positive");
    if (n_intervals < 2 || n_intervals % 2 != 0) throw ConfigError("audit needs an even interval count");

    // Geometric grid t(sigma) = (1 + T)^sigma - 1, Simpson in sigma.
    const auto N = static_cast<std::size_t>(n_intervals);
    const double log_span = std::log1p(horizon);
    std::vector<double> t(N + 1), dt_dsigma(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        const double sigma = static_cast<double>(i) / static_cast<double>(N);
        t[i] = std::expm1(sigma * log_span);
        dt_dsigma[i] = log_span * std::exp(sigma * log_span);
    }
    t[N] = horizon;
    const Trajectory phi = solve_phi(params, law, m_a, t, ctl);

    DampingLaw audit_law = law;
    audit_law.r0 = params.r0;
    const double kappa = params.rate();
    const double beta = params.beta;

    PhiAudit a;
    a.increasing = true;
    a.concave = true;
    a.ratio_decreasing = true;
    std::vector<double> curv(N + 1), budget(N + 1);
    double prev_ratio = kInf;
    for (std::size_t i = 0; i <= N; ++i) {
        const double f = phi.values[i];
        const double y = std::pow(f, -beta);
        const Jet3 j = h_inv_jet(law, m_a, y);
        const double dphi = kappa * f * j.d1;
        const double bracket = j.d1 - beta * y * j.d2;
        const double ddphi = kappa * dphi * bracket;
        const double scale = std::abs(j.d1) + std::abs(beta * y * j.d2);
        if (bracket > 1e-9 * scale) a.concave = false;
        if (dphi < 0.0 || (i > 0 && f < phi.values[i - 1])) a.increasing = false;
        const double ratio = kappa * std::abs(bracket);
        if (ratio > prev_ratio + 1e-9 * kappa * scale) a.ratio_decreasing = false;
        prev_ratio = ratio;
        if (i == 0) a.phi_prime_start = dphi;
        if (i == N) a.phi_prime_end = dphi;
        curv[i] = std::abs(ddphi) * dt_dsigma[i];
        const double x = j.d1;  // 2 C1 phi' / (eps0 phi)
        budget[i] = kappa * f * conjugate_eval(audit_law, m_a, x) * dt_dsigma[i];
    }
    auto simpson = [&](const std::vector<double>& f) {
        double s = f.front() + f.back();
        for (std::size_t i = 1; i < N; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
        return s / (3.0 * static_cast<double>(N));
    };
    a.curvature_integral = simpson(curv);
    a.conjugate_budget = simpson(budget);
    const Alpha0Estimate alpha0 = estimate_alpha0(law, m_a, beta);
    a.alpha0 = alpha0.value;
    a.phi_prime_limit = kappa * alpha0.value;
    a.curvature_target = a.phi_prime_start - a.phi_prime_limit;
    a.budget_bound = std::pow(params.phi0, 1.0 - beta) / (beta - 1.0);
    a.budget_ok = a.conjugate_budget <= a.budget_bound;
    const bool curvature_ok = a.curvature_integral <= a.curvature_target * (1.0 + 1e-6) + 1e-12;
    a.ok = a.increasing && a.concave && a.ratio_decreasing && a.budget_ok && curvature_ok;
    return a;
}

}  // namespace decaylab
