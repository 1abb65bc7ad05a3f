#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "decaylab/damping.hpp"

namespace testsupport {

inline std::vector<decaylab::DampingLaw> catalog() {
    using namespace decaylab;
    return {make_linear(), make_polynomial(3.0), make_polynomial(2.0), make_log_weakened(),
            make_exp_origin(), make_double_exp_origin(), make_quadratic_test()};
}

inline std::vector<double> random_field(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> w(n);
    for (auto& x : w) x = dist(rng);
    return w;
}

// Straightforward quadrature helpers, written independently of the library.
inline double sum_sq(const std::vector<double>& w, double h) {
    double s = 0.0;
    for (double x : w) s += x * x;
    return h * s;
}

inline double grad_sq(const std::vector<double>& w, double h) {
    double s = 0.0;
    double prev = 0.0;
    for (double x : w) {
        s += (x - prev) * (x - prev);
        prev = x;
    }
    s += prev * prev;
    return s / h;
}

}  // namespace testsupport
