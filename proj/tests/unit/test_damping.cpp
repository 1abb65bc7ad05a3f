#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "decaylab/damping.hpp"
#include "decaylab/errors.hpp"
#include "support.hpp"

using namespace decaylab;

namespace {

bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

// Sample range where the law's h^{-1} is representable and on its convex branch.
std::pair<double, double> smooth_range(const DampingLaw& law) {
    switch (law.kind) {
    case LawKind::exp_origin: return {0.02, 0.99};
    case LawKind::double_exp_origin: return {0.2, 0.99};
    default: return {1e-4, 0.99};
    }
}

}  // namespace

TEST_CASE("law names round-trip") {
    for (const auto& law : testsupport::catalog()) {
        const auto parsed = parse_law_kind(to_string(law.kind));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == law.kind);
    }
    CHECK_FALSE(parse_law_kind("cubic").has_value());
}

TEST_CASE("g values from the catalog") {
    const auto cubic = make_polynomial(3.0);
    CHECK(g_eval(cubic, 0.5) == doctest::Approx(0.125));
    CHECK(g_eval(cubic, 0.0) == 0.0);
    CHECK(g_prime(cubic, 0.5) == doctest::Approx(0.75));

    // Independent extended-precision evaluation of s^3 exp(-1/s^2) at s = 1/2.
    const long double oracle = 0.125L * std::exp(-4.0L);
    CHECK(g_eval(make_exp_origin(), 0.5) == doctest::Approx(static_cast<double>(oracle)).epsilon(1e-14));
    CHECK(g_eval(make_exp_origin(), 0.5) == doctest::Approx(2.28945486109177e-3).epsilon(1e-12));

    const auto lin = make_linear();
    for (double s : {-50.0, -1.0, -0.3, 0.0, 1e-9, 0.7, 1.0, 3.0}) CHECK(g_prime(lin, s) == 1.0);
}

TEST_CASE("exp law derivative vanishes at the origin") {
    const auto law = make_exp_origin();
    CHECK(g_prime(law, 0.0) == 0.0);
    for (double h : {1e-1, 3e-2, 1e-2}) CHECK((g_eval(law, h) - g_eval(law, 0.0)) / h < 1e-10);
}

TEST_CASE("h0 of the cubic law and its tangent extension") {
    const auto law = make_polynomial(3.0, 1.0);
    CHECK(h0_eval(law, 0.25) == doctest::Approx(0.5));
    CHECK(h0_eval(law, 0.0) == 0.0);
    CHECK(h0_eval(law, 4.0) == doctest::Approx(2.5));
    CHECK_THROWS_AS(h0_eval(law, -1e-3), DomainError);
}

TEST_CASE("derivative of h^{-1} on the catalog examples") {
    CHECK(h_inv_prime(make_quadratic_test(), 1.0, 0.3) == doctest::Approx(0.3));
    CHECK(h_inv_prime(make_polynomial(2.0), 1.0, 0.04) == doctest::Approx(0.3));

    const auto ex = make_exp_origin(1.0);
    const double oracle = 3.0 / std::exp(1.0);
    CHECK(h_inv_prime(ex, 1.0, 1.0) == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(oracle == doctest::Approx(1.10364).epsilon(1e-5));
    const double step = 1e-5;
    const double fd = (h_inv(ex, 1.0, 1.0 + step) - h_inv(ex, 1.0, 1.0 - step)) / (2.0 * step);
    CHECK(fd == doctest::Approx(oracle).epsilon(1e-8));

    CHECK_THROWS_AS(h_inv_prime(ex, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(h_inv_prime(ex, 1.0, -0.5), DomainError);
}

TEST_CASE("mass rescaling of h^{-1}") {
    // h^{-1}(y) = m_a h0^{-1}(y / m_a) with h0^{-1}(z) = z^2 / 2.
    const auto law = make_quadratic_test();
    for (double m_a : {0.3, 1.0, 2.5})
        for (double y : {0.01, 0.2, 0.29}) {
            CHECK(h_inv(law, m_a, y) == doctest::Approx(y * y / (2.0 * m_a)));
            CHECK(h_inv_prime(law, m_a, y) == doctest::Approx(y / m_a));
            CHECK(h_inv_second(law, m_a, y) == doctest::Approx(1.0 / m_a));
        }
}

TEST_CASE("certified eps0 dominates on (0, 1]") {
    for (const auto& law : testsupport::catalog()) {
        CAPTURE(to_string(law.kind));
        CHECK(verify_h0_domination(law, 4000) >= -1e-15);
    }
    // Cubic law, closed form: slack s^2 - (s^2 + s^6) / 2 >= 0.
    CHECK(make_polynomial(3.0).eps0 == doctest::Approx(0.5));
}

TEST_CASE("doubling eps0 breaks domination") {
    for (auto law : testsupport::catalog()) {
        CAPTURE(to_string(law.kind));
        law.eps0 *= 2.0;
        CHECK(verify_h0_domination(law, 4000) < 0.0);
    }
}

TEST_CASE("property: g is odd and nondecreasing") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (const auto& law : testsupport::catalog()) {
        CAPTURE(to_string(law.kind));
        int bad_mono = 0, bad_odd = 0;
        for (int i = 0; i < 10000; ++i) {
            double s1 = dist(rng), s2 = dist(rng);
            if (s1 > s2) std::swap(s1, s2);
            if (g_eval(law, s1) > g_eval(law, s2)) ++bad_mono;
            if (g_eval(law, -s1) != -g_eval(law, s1)) ++bad_odd;
        }
        CHECK(bad_mono == 0);
        CHECK(bad_odd == 0);
    }
}

TEST_CASE("property: growth bounds") {
    for (const auto& law : testsupport::catalog()) {
        CAPTURE(to_string(law.kind));
        CHECK(law.m > 0.0);
        CHECK(law.m <= law.M);
        for (int k = 0; k <= 400; ++k) {
            const double s = std::pow(100.0, k / 400.0);  // [1, 100]
            for (double sg : {s, -s}) {
                const double gs = g_eval(law, sg) * sg;
                CHECK(gs >= law.m * s * s * (1.0 - 1e-12));
                CHECK(gs <= law.M * s * s * (1.0 + 1e-12));
            }
        }
        for (int k = 1; k < 400; ++k) {
            const double s = k / 400.0;
            CHECK(g_eval(law, s) * s <= law.M0 * s * s * (1.0 + 1e-12));
            CHECK(g_prime(law, s) <= law.M1 * (1.0 + 1e-12));
            CHECK(g_prime(law, s) >= 0.0);
        }
    }
}

TEST_CASE("property: h0 is concave") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(0.0, 5.0);
    for (const auto& law : testsupport::catalog()) {
        CAPTURE(to_string(law.kind));
        int bad = 0;
        for (int i = 0; i < 2000; ++i) {
            const double y1 = dist(rng), y2 = dist(rng);
            const double mid = h0_eval(law, 0.5 * (y1 + y2));
            const double avg = 0.5 * (h0_eval(law, y1) + h0_eval(law, y2));
            if (mid < avg * (1.0 - 1e-12)) ++bad;
        }
        CHECK(bad == 0);
    }
}

TEST_CASE("property: analytic derivatives of h^{-1} match finite differences") {
    for (const auto& law : testsupport::catalog()) {
        CAPTURE(to_string(law.kind));
        const auto [lo, hi] = smooth_range(law);
        for (double m_a : {0.3, 1.0}) {
            for (int k = 0; k <= 60; ++k) {
                const double y = m_a * lo * std::pow(hi / lo, k / 60.0);
                const Jet3 j = h_inv_jet(law, m_a, y);
                const double el = std::max({1.0, std::abs(j.d1 * y / j.value), std::abs(j.d2 * y / j.d1),
                                            std::abs(j.d3 * y / j.d2)});
                const double step = 1e-4 * y / el;
                const Jet3 jp = h_inv_jet(law, m_a, y + step);
                const Jet3 jm = h_inv_jet(law, m_a, y - step);
                CAPTURE(y);
                CHECK(close_rel((jp.value - jm.value) / (2 * step), j.d1, 1e-6));
                CHECK(close_rel((jp.d1 - jm.d1) / (2 * step), j.d2, 1e-6));
                CHECK(close_rel((jp.d2 - jm.d2) / (2 * step), j.d3, 1e-6));
                CHECK(j.d1 == h_inv_prime(law, m_a, y));
                CHECK(j.d2 == h_inv_second(law, m_a, y));
                CHECK(j.d3 == h_inv_third(law, m_a, y));
            }
        }
    }
}

TEST_CASE("property: g_prime matches finite differences away from the matching point") {
    for (const auto& law : testsupport::catalog()) {
        CAPTURE(to_string(law.kind));
        for (int k = 1; k <= 300; ++k) {
            const double s = 0.05 + 2.95 * k / 300.0;
            if (std::abs(s - law.s_star) < 1e-3) continue;
            const double el = std::max(1.0, std::abs(g_prime(law, s) * s / g_eval(law, s)));
            const double step = 1e-4 * s / el;
            const double fd = (g_eval(law, s + step) - g_eval(law, s - step)) / (2.0 * step);
            CAPTURE(s);
            CHECK(close_rel(fd, g_prime(law, s), 1e-6, 1e-300));
        }
    }
}

TEST_CASE("lower-bound inverse is built from g") {
    CHECK(lower_h_inv(make_polynomial(3.0), 0.36) == doctest::Approx(0.36 * 0.36));
    CHECK(lower_h_inv_prime(make_polynomial(3.0), 0.36) == doctest::Approx(0.72));
    CHECK(lower_h_inv(make_linear(), 0.36) == doctest::Approx(0.36));
    CHECK(lower_h_inv_prime(make_linear(), 0.36) == doctest::Approx(1.0));
}

TEST_CASE("factories reject parameters outside their certified range") {
    CHECK_THROWS_AS(make_linear(0.5), ConfigError);
    CHECK_THROWS_AS(make_linear(1.0), ConfigError);
    CHECK_THROWS_AS(make_polynomial(0.5), ConfigError);
    CHECK_THROWS_AS(make_log_weakened(5.0, 0.9), ConfigError);
    CHECK_THROWS_AS(make_exp_origin(0.0), ConfigError);
}
