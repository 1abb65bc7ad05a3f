#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "decaylab/wave_sim.hpp"
#include "support.hpp"

using namespace decaylab;
using std::numbers::pi;

namespace {

WaveSystem make_system(std::size_t n, double a_amp, double b_amp, DampingLaw law) {
    const Mesh1D m = build_mesh(1.0, n);
    return WaveSystem{m, bump_profile(m, 0.1, 0.4, a_amp, 0.0), bump_profile(m, 0.5, 0.9, b_amp, 0.0),
                      std::move(law)};
}

std::vector<double> sine_mode(const Mesh1D& m, int k, double amp = 1.0) {
    std::vector<double> w(m.n);
    for (std::size_t i = 0; i < m.n; ++i) w[i] = amp * std::sin(k * pi * m.node(i));
    return w;
}

// Discrete eigenvalue of the three-point Laplacian for mode k on (0, 1).
double mu(const Mesh1D& m, int k) {
    const double s = std::sin(k * pi * m.h / 2.0);
    return 4.0 * s * s / (m.h * m.h);
}

WaveState random_state(std::mt19937_64& rng, std::size_t n, double scale) {
    WaveState s;
    s.u = testsupport::random_field(rng, n, scale);
    s.v = testsupport::random_field(rng, n, scale);
    s.p = testsupport::random_field(rng, n, scale);
    s.q = testsupport::random_field(rng, n, scale);
    return s;
}

}  // namespace

TEST_CASE("energy of simple states") {
    const auto sys = make_system(200, 0.0, 0.0, make_linear());
    const Mesh1D& m = sys.mesh;
    CHECK(energy(zero_state(m), m, sys.b) == 0.0);

    // sum_i sin^2(pi i / (n+1)) = (n+1)/2, so the discrete value is mu_1 / 4 exactly.
    WaveState s = zero_state(m);
    s.u = sine_mode(m, 1);
    CHECK(energy(s, m, sys.b) == doctest::Approx(mu(m, 1) / 4.0).epsilon(1e-12));
    CHECK(std::abs(energy(s, m, sys.b) - pi * pi / 4.0) < 10.0 * m.h * m.h);

    const double b0 = 1.7;
    const auto bfull = bump_profile(m, 0.0, 1.0, b0, 0.0);
    s.v = s.u;
    CHECK(energy(s, m, bfull) == doctest::Approx(mu(m, 1) / 2.0 + b0 / 2.0).epsilon(1e-12));
    CHECK(std::abs(energy(s, m, bfull) - (pi * pi / 2.0 + b0 / 2.0)) < 10.0 * m.h * m.h);
}

TEST_CASE("higher energy of a static sine") {
    const auto sys = make_system(200, 0.0, 0.0, make_linear());
    const Mesh1D& m = sys.mesh;
    CHECK(higher_energy(zero_state(m), sys) == 0.0);
    WaveState s = zero_state(m);
    s.u = sine_mode(m, 1, 1.0 / (pi * pi));
    // p_t = Lap u = -(mu_1 / pi^2) sin(pi x), so E_high = (mu_1 / pi^2)^2 / 4.
    const double r = mu(m, 1) / (pi * pi);
    CHECK(higher_energy(s, sys) == doctest::Approx(r * r / 4.0).epsilon(1e-12));
    CHECK(higher_energy(s, sys) == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("higher energy matches the time derivative over one small step") {
    const auto sys = make_system(60, 1.0, 0.8, make_linear());
    std::mt19937_64 rng(5);
    WaveState s = zero_state(sys.mesh);
    s.u = sine_mode(sys.mesh, 1);
    s.v = sine_mode(sys.mesh, 2, 0.5);
    s.p = sine_mode(sys.mesh, 3, 0.2);
    const SimConfig cfg{1e-6, 1e-6};
    const WaveState next = step(s, sys, cfg);
    const auto [pt, qt] = accelerations(s, sys);
    for (std::size_t i = 0; i < sys.mesh.n; ++i) {
        CHECK((next.p[i] - s.p[i]) / cfg.dt == doctest::Approx(pt[i]).epsilon(1e-4).scale(1.0));
        CHECK((next.q[i] - s.q[i]) / cfg.dt == doctest::Approx(qt[i]).epsilon(1e-4).scale(1.0));
    }
}

TEST_CASE("zero state is a fixed point") {
    const auto sys = make_system(30, 1.0, 1.0, make_polynomial(3.0));
    const SimConfig cfg{sys.mesh.h, 1.0};
    const WaveState out = step(zero_state(sys.mesh), sys, cfg);
    for (std::size_t i = 0; i < sys.mesh.n; ++i) {
        CHECK(out.u[i] == 0.0);
        CHECK(out.v[i] == 0.0);
        CHECK(out.p[i] == 0.0);
        CHECK(out.q[i] == 0.0);
    }
}

TEST_CASE("undamped run conserves energy over 10^4 steps") {
    const auto sys = make_system(50, 0.0, 0.0, make_linear());
    WaveState s = zero_state(sys.mesh);
    s.u = sine_mode(sys.mesh, 1);
    SimConfig cfg;
    cfg.dt = sys.mesh.h;
    cfg.t_end = 10000 * cfg.dt;
    cfg.record_every = 100;
    const auto res = simulate(sys, s, cfg);
    CHECK(res.steps == 10000);
    const double e0 = res.records.front().E_uv;
    const double tol = 10.0 * cfg.newton_tol * static_cast<double>(res.steps);
    for (const auto& r : res.records) CHECK(std::abs(r.E_uv - e0) <= tol);
}

TEST_CASE("property: per-step dissipation identity for every law") {
    std::mt19937_64 rng(1234);
    for (const auto& law : testsupport::catalog()) {
        CAPTURE(to_string(law.kind));
        const auto sys = make_system(40, 1.5, 1.0, law);
        SimConfig cfg;
        cfg.dt = 0.05;
        for (int trial = 0; trial < 20; ++trial) {
            const WaveState s = random_state(rng, sys.mesh.n, 1.5);
            StepInfo info;
            const WaveState next = step(s, sys, cfg, &info);
            const double e_old = energy(s, sys.mesh, sys.b);
            const double e_new = energy(next, sys.mesh, sys.b);
            CHECK(std::abs(e_new - e_old + info.dissipation) <= 10.0 * cfg.newton_tol);
            CHECK(info.dissipation >= 0.0);
            CHECK(e_new <= e_old + 10.0 * cfg.newton_tol);
        }
    }
}

TEST_CASE("damped run: telescoped identity and monotone records") {
    const auto sys = make_system(80, 1.0, 1.0, make_polynomial(3.0));
    WaveState s = zero_state(sys.mesh);
    s.u = sine_mode(sys.mesh, 1);
    s.v = sine_mode(sys.mesh, 2);
    SimConfig cfg;
    cfg.dt = sys.mesh.h;
    cfg.t_end = 2000 * cfg.dt;
    const auto res = simulate(sys, s, cfg);
    const double e0 = res.records.front().E_uv;
    const double tol = 10.0 * cfg.newton_tol * static_cast<double>(res.steps);
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& r = res.records[i];
        CHECK(std::abs(r.E_uv - e0 + r.diss_cum) <= tol);
        if (i > 0) {
            CHECK(r.diss_cum >= res.records[i - 1].diss_cum);
            CHECK(r.E_uv <= res.records[i - 1].E_uv + 10.0 * cfg.newton_tol);
        }
    }
}

TEST_CASE("short horizon gives a single record") {
    const auto sys = make_system(20, 1.0, 0.0, make_linear());
    SimConfig cfg;
    cfg.dt = 0.1;
    cfg.t_end = 0.05;
    const auto res = simulate(sys, zero_state(sys.mesh), cfg);
    CHECK(res.records.size() == 1);
    CHECK(res.records[0].t == 0.0);
}

TEST_CASE("undamped system is symmetric under swapping the components") {
    const auto sys = make_system(40, 0.0, 2.0, make_linear());
    std::mt19937_64 rng(8);
    const WaveState s = random_state(rng, sys.mesh.n, 1.0);
    WaveState swapped = s;
    std::swap(swapped.u, swapped.v);
    std::swap(swapped.p, swapped.q);
    // b must be symmetric too: take it on the whole interval.
    WaveSystem full = sys;
    full.b = bump_profile(sys.mesh, 0.0, 1.0, 2.0, 0.0);
    SimConfig cfg;
    cfg.dt = sys.mesh.h;
    WaveState a = s, b = swapped;
    for (int k = 0; k < 200; ++k) {
        a = step(a, full, cfg);
        b = step(b, full, cfg);
    }
    for (std::size_t i = 0; i < sys.mesh.n; ++i) {
        CHECK(a.u[i] == doctest::Approx(b.v[i]).epsilon(1e-10).scale(1.0));
        CHECK(a.p[i] == doctest::Approx(b.q[i]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("property: coercivity of the energy for admissible coupling") {
    std::mt19937_64 rng(42);
    const double delta = 0.5;
    for (std::size_t n : {5, 50, 200}) {
        const Mesh1D m = build_mesh(1.0, n);
        const double lam = poincare_constant(m, PoincareMode::discrete);
        const double bmax = (1.0 - delta) / (lam * lam);
        for (const auto& b : {bump_profile(m, 0.0, 1.0, bmax, 0.0), bump_profile(m, 0.5, 0.9, 0.3 * bmax, 0.05)}) {
            REQUIRE(check_b_admissible(b, lam, delta).admissible);
            int bad = 0;
            for (int trial = 0; trial < 400; ++trial) {
                WaveState s = random_state(rng, n, 1.0);
                // Worst-case-ish: u = -v makes the cross term negative.
                if (trial % 2)
                    for (std::size_t i = 0; i < n; ++i) s.v[i] = -s.u[i];
                const double E = energy(s, m, b);
                if (E < 0.5 * delta * quadratic_sum(s, m) * (1.0 - 1e-12)) ++bad;
            }
            CHECK(bad == 0);
        }
    }
}

TEST_CASE("x_functional reductions and direct evaluation") {
    const auto sys = make_system(30, 1.0, 0.7, make_polynomial(3.0));
    const Mesh1D& m = sys.mesh;
    CHECK(x_functional(zero_state(m), sys, 2.0, 0.1, 1.0, 1.0) == 0.0);

    std::mt19937_64 rng(77);
    const WaveState s = random_state(rng, m.n, 1.0);
    CHECK(x_functional(s, sys, 1.0, 0.0, 0.0, 0.0) == doctest::Approx(energy(s, m, sys.b)).epsilon(1e-13));

    // Independent straightforward summation.
    const double h = m.h;
    std::vector<double> pt(m.n), qt(m.n);
    for (std::size_t i = 0; i < m.n; ++i) {
        const double ul = i ? s.u[i - 1] : 0.0, ur = i + 1 < m.n ? s.u[i + 1] : 0.0;
        const double vl = i ? s.v[i - 1] : 0.0, vr = i + 1 < m.n ? s.v[i + 1] : 0.0;
        const double pp = s.p[i];
        pt[i] = (ul - 2 * s.u[i] + ur) / (h * h) - sys.b.values[i] * s.v[i] - sys.a.values[i] * pp * pp * pp;
        qt[i] = (vl - 2 * s.v[i] + vr) / (h * h) - sys.b.values[i] * s.u[i];
    }
    double up = 0, vq = 0, ptq = 0, qtp = 0, bpq = 0, buv = 0;
    for (std::size_t i = 0; i < m.n; ++i) {
        up += h * s.u[i] * s.p[i];
        vq += h * s.v[i] * s.q[i];
        ptq += h * pt[i] * s.q[i];
        qtp += h * qt[i] * s.p[i];
        bpq += h * sys.b.values[i] * s.p[i] * s.q[i];
        buv += h * sys.b.values[i] * s.u[i] * s.v[i];
    }
    using testsupport::grad_sq;
    using testsupport::sum_sq;
    const double E = 0.5 * (grad_sq(s.u, h) + grad_sq(s.v, h) + sum_sq(s.p, h) + sum_sq(s.q, h)) + buv;
    const double Eh = 0.5 * (grad_sq(s.p, h) + grad_sq(s.q, h) + sum_sq(pt, h) + sum_sq(qt, h)) + bpq;
    const double phi = 2.0, dphi = 0.1;
    const double expected = dphi * up + dphi * vq + dphi * (ptq - qtp) + phi * E + dphi * Eh;
    CHECK(x_functional(s, sys, phi, dphi, 1.0, 1.0) == doctest::Approx(expected).epsilon(1e-11));
    CHECK(higher_energy(s, sys) == doctest::Approx(Eh).epsilon(1e-11));
}

TEST_CASE("Newton failure is reported with diagnostics") {
    const auto sys = make_system(20, 1.0, 0.0, make_polynomial(3.0));
    WaveState s = zero_state(sys.mesh);
    s.p = sine_mode(sys.mesh, 1, 3.0);
    SimConfig cfg;
    cfg.dt = 0.5;
    cfg.newton_max_iter = 1;
    cfg.newton_tol = 1e-300;
    try {
        (void)step(s, sys, cfg);
        FAIL("expected StepFailure");
    } catch (const StepFailure& e) {
        CHECK(e.iterations() == 1);
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("initial data from modes and bumps") {
    const Mesh1D m = build_mesh(2.0, 99);
    FieldSpec spec;
    spec.modes.push_back({2, 0.5});
    spec.bumps.push_back({1.0, 0.1, 2.0});
    const auto f = sample_field(m, spec);
    for (std::size_t i = 0; i < m.n; ++i) {
        const double x = m.node(i);
        const double z = (x - 1.0) / 0.1;
        CHECK(f[i] == doctest::Approx(0.5 * std::sin(2 * pi * x / 2.0) + 2.0 * std::exp(-0.5 * z * z)));
    }
}
