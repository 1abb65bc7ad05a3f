#include "decaylab/block_tridiag.hpp"

#include <cmath>

#include "decaylab/errors.hpp"

namespace decaylab {

namespace {

SymBlock2 inverse(const SymBlock2& m) {
    const double det = m.a * m.d - m.b * m.b;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det))
        throw SolverError("singular 2x2 block in block-tridiagonal solve");
    const double inv = 1.0 / det;
    return SymBlock2{m.d * inv, -m.b * inv, m.a * inv};
}

Vec2 apply(const SymBlock2& m, const Vec2& v) {
    return Vec2{m.a * v[0] + m.b * v[1], m.b * v[0] + m.d * v[1]};
}

}  // namespace

void solve_block_tridiagonal(std::span<const SymBlock2> diag, double off,
                             std::span<const Vec2> rhs, std::span<Vec2> x,
                             std::span<SymBlock2> work) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    // work[i] holds the inverse of the eliminated diagonal block; x carries the
    // modified right-hand side during the forward sweep.
    const double off2 = off * off;
    work[0] = inverse(diag[0]);
    x[0] = rhs[0];
    for (std::size_t i = 1; i < n; ++i) {
        const SymBlock2& prev = work[i - 1];
        const SymBlock2 eliminated{diag[i].a - off2 * prev.a, diag[i].b - off2 * prev.b,
                                   diag[i].d - off2 * prev.d};
        const Vec2 carried = apply(prev, x[i - 1]);
        x[i] = Vec2{rhs[i][0] + off * carried[0], rhs[i][1] + off * carried[1]};
        work[i] = inverse(eliminated);
    }
    x[n - 1] = apply(work[n - 1], x[n - 1]);
    for (std::size_t i = n - 1; i-- > 0;) {
        const Vec2 y{x[i][0] + off * x[i + 1][0], x[i][1] + off * x[i + 1][1]};
        x[i] = apply(work[i], y);
    }
}

}  // namespace decaylab
