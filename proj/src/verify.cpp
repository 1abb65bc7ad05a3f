#include "decaylab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "decaylab/errors.hpp"

namespace decaylab {

namespace {

void check_series(std::span<const double> t, std::span<const double> a, std::span<const double> b) {
    if (t.empty()) throw ConfigError("empty series");
    if (a.size() != t.size() || b.size() != t.size()) throw ConfigError("series lengths differ");
}

std::string fmt(const char* pattern, double x) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, x);
    return buf;
}

CriterionResult criterion(std::string name, Verdict v, double value, double threshold,
                          std::string detail = {}) {
    return CriterionResult{std::move(name), v, value, threshold, std::move(detail)};
}

}  // namespace

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::warning: return "WARNING";
    case Verdict::not_applicable: return "NOT-APPLICABLE";
    }
    return "?";
}

double calibrate_envelope(std::span<const double> t, std::span<const double> E,
                          std::span<const double> phi, double t_cal) {
    check_series(t, E, phi);
    double c = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size() && t[i] <= t_cal; ++i) c = std::max(c, E[i] * phi[i]);
    if (!std::isfinite(c)) throw ConfigError("no samples at or before the calibration time");
    return c;
}

UpperCheck check_upper_envelope(std::span<const double> t, std::span<const double> E,
                                std::span<const double> phi, double C_cal, double t_cal,
                                double margin) {
    check_series(t, E, phi);
    UpperCheck r;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > t_cal)) continue;
        ++r.samples;
        const double excess = E[i] * phi[i] / C_cal - 1.0;
        if (excess > worst) {
            worst = excess;
            r.worst_t = t[i];
        }
    }
    r.max_violation = std::max(worst, 0.0);
    r.pass = r.max_violation <= margin;
    return r;
}

double fit_exponent(std::span<const double> t, std::span<const double> E, double t_a, double t_b) {
    if (t.size() != E.size()) throw ConfigError("series lengths differ");
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_a || t[i] > t_b) continue;
        if (!(E[i] > 0.0)) throw SolverError("fit_exponent: nonpositive energy in the fit window");
        sx += std::log1p(t[i]);
        sy += std::log(E[i]);
        ++n;
    }
    if (n < 2) throw SolverError("fit_exponent: fewer than two samples in the fit window");
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_a || t[i] > t_b) continue;
        const double dx = std::log1p(t[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(E[i]) - my);
    }
    if (!(sxx > 0.0)) throw SolverError("fit_exponent: degenerate fit window");
    return sxy / sxx;
}

LowerCheck check_lower_envelope(std::span<const double> t, std::span<const double> E,
                                std::span<const double> psi, double E_high0, double T0) {
    check_series(t, E, psi);
    if (!(E_high0 > 0.0)) throw ConfigError("lower envelope needs E_high(0) > 0");
    LowerCheck r;
    bool first = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < T0) continue;
        if (first) {
            r.psi0 = psi[i];
            first = false;
        }
        const double s = psi[i] / (4.0 * std::sqrt(E_high0));
        const double bound = s * s;
        const double ratio = E[i] > 0.0 ? bound / E[i] : (bound > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        r.worst_ratio = std::max(r.worst_ratio, ratio);
        // psi0 makes the bound touch E at T0; allow for the rounding of that product.
        if (ratio > 1.0 + 1e-12) ++r.violations;
    }
    r.pass = r.violations == 0;
    return r;
}

BuiltSystem build_wave_system(const RunConfig& cfg) {
    const Mesh1D mesh = build_mesh(cfg.L, cfg.n);
    const double lambda = poincare_constant(mesh, PoincareMode::discrete);
    const double delta = cfg.ode.delta;
    CoefficientProfile a = bump_profile(mesh, cfg.a.x_lo, cfg.a.x_hi, cfg.a.amplitude, cfg.a.smoothing);
    const double b_amp = cfg.b.amplitude_fraction
                             ? *cfg.b.amplitude_fraction * (1.0 - delta) / (lambda * lambda)
                             : cfg.b.amplitude;
    CoefficientProfile b = bump_profile(mesh, cfg.b.x_lo, cfg.b.x_hi, b_amp, cfg.b.smoothing);
    const AdmissibilityReport adm = check_b_admissible(b, lambda, delta);
    return BuiltSystem{WaveSystem{mesh, std::move(a), std::move(b), make_law(cfg.law)}, adm};
}

int ExperimentReport::exit_code() const {
    for (const auto& v : verdicts)
        if (v.verdict == Verdict::fail) return 1;
    return 0;
}

ExperimentReport run_experiment(const RunConfig& cfg) {
    ExperimentReport rep;
    rep.config = cfg;
    const BuiltSystem built = build_wave_system(cfg);
    const WaveSystem& sys = built.system;
    rep.mesh = sys.mesh;
    rep.dt = cfg.step();
    rep.law = sys.law;
    rep.admissibility = built.admissibility;
    const Mesh1D& mesh = rep.mesh;
    const double lambda = rep.admissibility.lambda;
    const double delta = cfg.ode.delta;
    rep.m_a = sys.a.mass(mesh);
    rep.a_inf = sys.a.max();
    rep.decay_applicable = rep.admissibility.admissible && rep.m_a > 0.0;

    const SimConfig sim = cfg.sim_config();
    const auto n_steps = static_cast<std::size_t>(std::floor(cfg.t_end / sim.dt + 1e-9));
    const auto every = static_cast<std::size_t>(sim.record_every);
    std::vector<double> record_times;
    for (std::size_t n = 0; n <= n_steps; n += every) record_times.push_back(static_cast<double>(n) * sim.dt);

    PhiParams& pp = rep.phi_params;
    pp.eps0 = cfg.ode.eps0.value_or(rep.law.eps0);
    pp.C1 = cfg.ode.C1;
    pp.beta = cfg.ode.beta;
    pp.r0 = cfg.ode.r0;
    const OdeControls ctl{cfg.ode.substep_fraction};

    Trajectory phi_traj;
    if (rep.decay_applicable) {
        const double rhs = phi0_admissibility_bound(pp.eps0, pp.C1, delta, lambda, cfg.ode.C_T,
                                                    rep.law.m, rep.law.M);
        pp.phi0 = cfg.ode.phi0 ? *cfg.ode.phi0
                               : admissible_phi0(pp, rep.law, rep.m_a, rhs, cfg.ode.phi0_safety);
        rep.phi0_check = phi_initial_admissible(pp, rep.law, rep.m_a, delta, lambda, cfg.ode.C_T,
                                                rep.law.m, rep.law.M);
        if (rep.phi0_check->within_r0) phi_traj = solve_phi(pp, rep.law, rep.m_a, record_times, ctl);
    } else {
        pp.phi0 = cfg.ode.phi0.value_or(1.0);
    }
    const bool have_phi = !phi_traj.values.empty();

    XDiagnostic xd;
    const bool use_x = cfg.verify.x_diag && have_phi;
    if (use_x) {
        xd.k = cfg.verify.k;
        xd.k1 = cfg.verify.k1;
        const double record_dt = static_cast<double>(every) * sim.dt;
        const double kappa = pp.rate();
        xd.phi = [&, record_dt, kappa](double t) {
            const auto i = static_cast<std::size_t>(std::llround(t / record_dt));
            const double f = phi_traj.values.at(i);
            return std::pair{f, kappa * f * h_inv_prime(rep.law, rep.m_a, std::pow(f, -pp.beta))};
        };
    }

    const WaveState init = make_initial_state(mesh, cfg.initial_data());
    SimResult sr = simulate(sys, init, sim, use_x ? &xd : nullptr);
    rep.records = std::move(sr.records);
    rep.step_residual_max = sr.max_step_residual;
    rep.newton_retries = sr.retries;

    const std::size_t nr = rep.records.size();
    std::vector<double> t(nr), E(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        t[i] = rep.records[i].t;
        E[i] = rep.records[i].E_uv;
    }
    rep.E0 = E.front();
    rep.E_high0 = rep.records.front().E_high;
    for (std::size_t i = 0; i < nr; ++i) {
        const auto& r = rep.records[i];
        rep.identity_residual_max = std::max(rep.identity_residual_max, std::abs(r.E_uv - rep.E0 + r.diss_cum));
        if (rep.E0 > 0.0) rep.conservation_max = std::max(rep.conservation_max, std::abs(r.E_uv - rep.E0) / rep.E0);
        if (r.E_uv < 0.5 * delta * r.quad_sum) ++rep.coercivity_violations;
    }

    auto& V = rep.verdicts;
    V.push_back(criterion("b_admissible",
                          rep.admissibility.admissible ? Verdict::pass : Verdict::warning,
                          rep.admissibility.b_max, rep.admissibility.threshold,
                          rep.admissibility.admissible ? "" : "coupling too large; decay checks not applicable"));
    {
        const double tol = kIdentityTolerance * rep.E0;
        V.push_back(criterion("dissipation_identity",
                              rep.identity_residual_max <= tol ? Verdict::pass : Verdict::fail,
                              rep.identity_residual_max, tol));
    }
    if (rep.m_a == 0.0) {
        V.push_back(criterion("conservation",
                              rep.conservation_max <= kIdentityTolerance ? Verdict::pass : Verdict::fail,
                              rep.conservation_max, kIdentityTolerance, "undamped control run"));
    } else {
        V.push_back(criterion("conservation", Verdict::not_applicable, rep.conservation_max,
                              kIdentityTolerance, "damped run"));
    }
    V.push_back(criterion("coercivity",
                          !rep.admissibility.admissible ? Verdict::not_applicable
                          : rep.coercivity_violations == 0 ? Verdict::pass
                                                           : Verdict::fail,
                          static_cast<double>(rep.coercivity_violations), 0.0));

    const char* na_reason = rep.m_a == 0.0 ? "no damping" : "coupling not admissible";
    if (rep.phi0_check) {
        V.push_back(criterion("phi0_admissible", rep.phi0_check->admissible ? Verdict::pass : Verdict::fail,
                              rep.phi0_check->lhs, rep.phi0_check->rhs,
                              rep.phi0_check->within_r0 ? "" : "phi0^(-beta) exceeds r0"));
    } else {
        V.push_back(criterion("phi0_admissible", Verdict::not_applicable, 0.0, 0.0, na_reason));
    }

    rep.t_cal = cfg.calibration_time();
    const double fit_a = cfg.verify.fit_t_a.value_or(rep.t_cal);
    const double fit_b = cfg.verify.fit_t_b.value_or(cfg.t_end);
    try {
        rep.fitted_exponent = fit_exponent(t, E, fit_a, fit_b);
    } catch (const SolverError&) {
        rep.fitted_exponent.reset();
    }

    if (have_phi) {
        rep.phi = phi_traj.values;
        V.push_back(criterion("phi_shape", phi_traj.shape_ok ? Verdict::pass : Verdict::fail, 0.0, 0.0,
                              "increasing and concave on the samples"));
        rep.C_cal = calibrate_envelope(t, E, rep.phi, rep.t_cal);
        rep.envelope.resize(nr);
        for (std::size_t i = 0; i < nr; ++i) rep.envelope[i] = rep.C_cal / rep.phi[i];
        rep.upper = check_upper_envelope(t, E, rep.phi, rep.C_cal, rep.t_cal, cfg.verify.margin);
        V.push_back(criterion("upper_envelope", rep.upper.pass ? Verdict::pass : Verdict::fail,
                              rep.upper.max_violation, cfg.verify.margin,
                              fmt("worst at t=%.6g", rep.upper.worst_t)));
    } else {
        V.push_back(criterion("phi_shape", Verdict::not_applicable, 0.0, 0.0, na_reason));
        V.push_back(criterion("upper_envelope", Verdict::not_applicable, 0.0, cfg.verify.margin, na_reason));
    }

    if (cfg.verify.max_exponent) {
        const double lim = *cfg.verify.max_exponent;
        if (!rep.decay_applicable) {
            V.push_back(criterion("decay_exponent", Verdict::not_applicable, rep.fitted_exponent.value_or(0.0), lim, na_reason));
        } else if (!rep.fitted_exponent) {
            V.push_back(criterion("decay_exponent", Verdict::fail, 0.0, lim, "fit failed"));
        } else {
            V.push_back(criterion("decay_exponent", *rep.fitted_exponent <= lim ? Verdict::pass : Verdict::fail,
                                  *rep.fitted_exponent, lim));
        }
    }

    if (cfg.verify.lower_bound) {
        if (!rep.decay_applicable || !(rep.E_high0 > 0.0)) {
            V.push_back(criterion("lower_envelope", Verdict::not_applicable, 0.0, 0.0, na_reason));
        } else {
            const double T0 = cfg.verify.T0_fraction * cfg.t_end;
            const auto first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), T0) - t.begin());
            if (first >= nr || !(E[first] > 0.0)) {
                V.push_back(criterion("lower_envelope", Verdict::not_applicable, 0.0, 0.0, "no energy past T0"));
            } else {
                const double psi0 = 4.0 * std::sqrt(rep.E_high0 * E[first]);
                const std::vector<double> tail(t.begin() + static_cast<std::ptrdiff_t>(first), t.end());
                const Trajectory psi = solve_psi(rep.a_inf, rep.law, psi0, tail, ctl);
                rep.psi.assign(nr, std::numeric_limits<double>::quiet_NaN());
                std::copy(psi.values.begin(), psi.values.end(), rep.psi.begin() + static_cast<std::ptrdiff_t>(first));
                rep.lower = check_lower_envelope(std::span(t).subspan(first), std::span(E).subspan(first),
                                                 psi.values, rep.E_high0, t[first]);
                V.push_back(criterion("lower_envelope", rep.lower->pass ? Verdict::pass : Verdict::warning,
                                      rep.lower->worst_ratio, 1.0,
                                      fmt("T0=%.6g (diagnostic)", t[first])));
            }
        }
    }
    return rep;
}

}  // namespace decaylab
