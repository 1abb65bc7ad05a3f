#pragma once

#include <array>
#include <span>

namespace decaylab {

/// Symmetric 2x2 block [[a, b], [b, d]].
struct SymBlock2 {
    double a = 0.0;
    double b = 0.0;
    double d = 0.0;
};

using Vec2 = std::array<double, 2>;

/// Solves the block-tridiagonal system
///   diag[i] x[i] - off * (x[i-1] + x[i+1]) = rhs[i],   i = 0..n-1,
/// with 2x2 diagonal blocks and scalar (times identity) off-diagonal coupling,
/// by block Thomas elimination. `work` must have the size of `diag`; `x` may
/// alias `rhs`. No pivoting: the caller guarantees block diagonal dominance.
void solve_block_tridiagonal(std::span<const SymBlock2> diag, double off,
                             std::span<const Vec2> rhs, std::span<Vec2> x,
                             std::span<SymBlock2> work);

}  // namespace decaylab
