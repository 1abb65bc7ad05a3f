#include "decaylab/wave_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "decaylab/block_tridiag.hpp"

namespace decaylab {

namespace {

void check_sizes(const WaveState& s, const Mesh1D& mesh) {
    const std::size_t n = mesh.n;
    if (s.u.size() != n || s.v.size() != n || s.p.size() != n || s.q.size() != n)
        throw ConfigError("wave state size does not match the mesh");
}

void check_sizes(const WaveState& s, const WaveSystem& sys) {
    check_sizes(s, sys.mesh);
    if (sys.a.values.size() != sys.mesh.n || sys.b.values.size() != sys.mesh.n)
        throw ConfigError("coefficient profile size does not match the mesh");
}

double sup_norm(std::span<const Vec2> r) {
    double m = 0.0;
    for (const auto& x : r) m = std::max({m, std::abs(x[0]), std::abs(x[1])});
    return m;
}

// Second-order energy built from velocities and accelerations.
double quadratic_energy(const Mesh1D& mesh, const CoefficientProfile& b,
                        std::span<const double> x, std::span<const double> y,
                        std::span<const double> xt, std::span<const double> yt) {
    return 0.5 * (gradient_norm_sq(mesh, x) + gradient_norm_sq(mesh, y) + inner(mesh, xt, xt)
                  + inner(mesh, yt, yt))
           + weighted_inner(mesh, b.values, x, y);
}

}  // namespace

WaveState zero_state(const Mesh1D& mesh) {
    WaveState s;
    s.u.assign(mesh.n, 0.0);
    s.v.assign(mesh.n, 0.0);
    s.p.assign(mesh.n, 0.0);
    s.q.assign(mesh.n, 0.0);
    return s;
}

double energy(const WaveState& s, const Mesh1D& mesh, const CoefficientProfile& b) {
    check_sizes(s, mesh);
    if (b.values.size() != mesh.n) throw ConfigError("coupling profile size does not match the mesh");
    return quadratic_energy(mesh, b, s.u, s.v, s.p, s.q);
}

double quadratic_sum(const WaveState& s, const Mesh1D& mesh) {
    check_sizes(s, mesh);
    return gradient_norm_sq(mesh, s.u) + gradient_norm_sq(mesh, s.v) + inner(mesh, s.p, s.p)
           + inner(mesh, s.q, s.q);
}

std::pair<std::vector<double>, std::vector<double>> accelerations(const WaveState& s,
                                                                  const WaveSystem& sys) {
    check_sizes(s, sys);
    const std::size_t n = sys.mesh.n;
    std::vector<double> pt(n), qt(n);
    apply_laplacian(sys.mesh, s.u, pt);
    apply_laplacian(sys.mesh, s.v, qt);
    for (std::size_t i = 0; i < n; ++i) {
        pt[i] -= sys.b.values[i] * s.v[i] + sys.a.values[i] * g_eval(sys.law, s.p[i]);
        qt[i] -= sys.b.values[i] * s.u[i];
    }
    return {std::move(pt), std::move(qt)};
}

double higher_energy(const WaveState& s, const WaveSystem& sys) {
    const auto [pt, qt] = accelerations(s, sys);
    return quadratic_energy(sys.mesh, sys.b, s.p, s.q, pt, qt);
}

double x_functional(const WaveState& s, const WaveSystem& sys, double phi, double phi_prime,
                    double k, double k1) {
    const Mesh1D& mesh = sys.mesh;
    const auto [pt, qt] = accelerations(s, sys);
    const double e_uv = quadratic_energy(mesh, sys.b, s.u, s.v, s.p, s.q);
    const double e_high = quadratic_energy(mesh, sys.b, s.p, s.q, pt, qt);
    return phi_prime * (inner(mesh, s.u, s.p) + inner(mesh, s.v, s.q))
           + k1 * phi_prime * (inner(mesh, pt, s.q) - inner(mesh, qt, s.p)) + phi * e_uv
           + k * phi_prime * e_high;
}

WaveState step(const WaveState& s, const WaveSystem& sys, const SimConfig& cfg, StepInfo* info) {
    check_sizes(s, sys);
    const Mesh1D& mesh = sys.mesh;
    const std::size_t n = mesh.n;
    const auto& a = sys.a.values;
    const auto& b = sys.b.values;
    const double dt = cfg.dt;
    const double k = 0.5 * dt;
    const double r = k * k / (mesh.h * mesh.h);

    // Midpoint velocities (P, Q) solve
    //   (I - k^2 Lap) P + k a g(P) + k^2 b Q = p + k Lap u - k b v
    //   (I - k^2 Lap) Q + k^2 b P           = q + k Lap v - k b u
    std::vector<double> lap_u(n), lap_v(n);
    apply_laplacian(mesh, s.u, lap_u);
    apply_laplacian(mesh, s.v, lap_v);
    std::vector<Vec2> rhs(n), mid(n), res(n), delta(n);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] = Vec2{s.p[i] + k * lap_u[i] - k * b[i] * s.v[i],
                      s.q[i] + k * lap_v[i] - k * b[i] * s.u[i]};
        mid[i] = Vec2{s.p[i], s.q[i]};
    }

    auto residual = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 left = i > 0 ? mid[i - 1] : Vec2{0.0, 0.0};
            const Vec2 right = i + 1 < n ? mid[i + 1] : Vec2{0.0, 0.0};
            const double P = mid[i][0];
            const double Q = mid[i][1];
            res[i][0] = (1.0 + 2.0 * r) * P - r * (left[0] + right[0])
                        + k * a[i] * g_eval(sys.law, P) + k * k * b[i] * Q - rhs[i][0];
            res[i][1] = (1.0 + 2.0 * r) * Q - r * (left[1] + right[1]) + k * k * b[i] * P
                        - rhs[i][1];
        }
        return sup_norm(res);
    };

    std::vector<SymBlock2> jac(n), work(n);
    const double tol = cfg.newton_tol * std::max(1.0, sup_norm(rhs));
    double norm = residual();
    int it = 0;
    while (!(norm <= tol)) {
        if (it >= cfg.newton_max_iter || !std::isfinite(norm)) {
            std::ostringstream msg;
            msg << "Newton did not converge at t=" << s.t << " (dt=" << dt << ", iterations=" << it
                << ", residual=" << norm << ")";
            throw StepFailure(msg.str(), it, norm);
        }
        for (std::size_t i = 0; i < n; ++i) {
            jac[i] = SymBlock2{1.0 + 2.0 * r + k * a[i] * g_prime(sys.law, mid[i][0]),
                               k * k * b[i], 1.0 + 2.0 * r};
        }
        solve_block_tridiagonal(jac, r, res, delta, work);
        for (std::size_t i = 0; i < n; ++i) {
            mid[i][0] -= delta[i][0];
            mid[i][1] -= delta[i][1];
        }
        ++it;
        norm = residual();
    }

    WaveState out;
    out.u.resize(n);
    out.v.resize(n);
    out.p.resize(n);
    out.q.resize(n);
    out.t = s.t + dt;
    double diss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double P = mid[i][0];
        const double Q = mid[i][1];
        out.u[i] = s.u[i] + dt * P;
        out.v[i] = s.v[i] + dt * Q;
        out.p[i] = 2.0 * P - s.p[i];
        out.q[i] = 2.0 * Q - s.q[i];
        diss += a[i] * g_eval(sys.law, P) * P;
    }
    if (info) {
        info->newton_iterations = it;
        info->residual = norm;
        info->dissipation = dt * mesh.h * diss;
    }
    return out;
}

void validate(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("sim.dt must be positive");
    if (!(cfg.newton_tol > 0.0)) throw ConfigError("sim.newton_tol must be positive");
    if (cfg.newton_max_iter < 1) throw ConfigError("sim.newton_max_iter must be >= 1");
    if (cfg.record_every < 1) throw ConfigError("sim.record_every must be >= 1");
    if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) throw ConfigError("sim.t_end must be finite and >= 0");
}

SimResult simulate(const WaveSystem& sys, const WaveState& initial, const SimConfig& cfg,
                   const XDiagnostic* x_diag) {
    validate(cfg);
    check_sizes(initial, sys);
    const double t0 = initial.t;

    auto make_record = [&](const WaveState& s, double e_uv, double diss) {
        EnergyRecord rec;
        rec.t = s.t;
        rec.E_uv = e_uv;
        rec.E_high = higher_energy(s, sys);
        rec.diss_cum = diss;
        rec.quad_sum = quadratic_sum(s, sys.mesh);
        if (x_diag && x_diag->phi) {
            const auto [phi, dphi] = x_diag->phi(s.t);
            rec.X_diag = x_functional(s, sys, phi, dphi, x_diag->k, x_diag->k1);
        }
        return rec;
    };

    SimResult result;
    WaveState state = initial;
    double e_old = energy(state, sys.mesh, sys.b);
    double diss_cum = 0.0;
    result.records.push_back(make_record(state, e_old, diss_cum));

    const auto n_steps = static_cast<std::size_t>(std::floor((cfg.t_end - t0) / cfg.dt + 1e-9));
    SimConfig half = cfg;
    half.dt = 0.5 * cfg.dt;
    for (std::size_t n = 1; n <= n_steps; ++n) {
        StepInfo info;
        WaveState next;
        double dissipation = 0.0;
        try {
            next = step(state, sys, cfg, &info);
            dissipation = info.dissipation;
        } catch (const StepFailure&) {
            ++result.retries;
            const WaveState mid = step(state, sys, half, &info);
            dissipation = info.dissipation;
            next = step(mid, sys, half, &info);
            dissipation += info.dissipation;
        }
        // Time from the step count, not accumulated increments.
        next.t = t0 + static_cast<double>(n) * cfg.dt;
        const double e_new = energy(next, sys.mesh, sys.b);
        result.max_step_residual =
            std::max(result.max_step_residual, std::abs(e_new - e_old + dissipation));
        diss_cum += dissipation;
        e_old = e_new;
        state = std::move(next);
        if (n % static_cast<std::size_t>(cfg.record_every) == 0)
            result.records.push_back(make_record(state, e_new, diss_cum));
    }
    result.steps = n_steps;
    result.final_state = std::move(state);
    return result;
}

std::vector<double> sample_field(const Mesh1D& mesh, const FieldSpec& spec) {
    using std::numbers::pi;
    std::vector<double> f(mesh.n, 0.0);
    for (std::size_t i = 0; i < mesh.n; ++i) {
        const double x = mesh.node(i);
        for (const auto& m : spec.modes) f[i] += m.amplitude * std::sin(m.k * pi * x / mesh.length);
        for (const auto& g : spec.bumps) {
            const double z = (x - g.center) / g.width;
            f[i] += g.amplitude * std::exp(-0.5 * z * z);
        }
    }
    return f;
}

WaveState make_initial_state(const Mesh1D& mesh, const InitialData& data) {
    WaveState s;
    s.u = sample_field(mesh, data.u0);
    s.v = sample_field(mesh, data.v0);
    s.p = sample_field(mesh, data.u1);
    s.q = sample_field(mesh, data.v1);
    return s;
}

}  // namespace decaylab
