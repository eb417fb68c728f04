#pragma once

#include "ccoa/linalg.hpp"

namespace ccoa {

/// Euclidean projection of z onto the probability simplex
/// (argmin over the simplex of ||p - z||^2), computed with the
/// sort / cumulative-sum support rule:
///
///   p_i = max(z_i - tau(z), 0)
///
/// Output sums to 1 with all components >= 0. Sparse by construction:
/// components below the support threshold are exactly zero.
/// Throws InvalidDimension on empty input, InvalidValue on NaN/Inf.
Vec sparsemax(const Vec& z);

/// Applies the sparsemax Jacobian at z to an upstream vector:
///
///   J(z) v = s .* v - s * (sum of v over the support) / |S|
///
/// where s is the 0/1 support indicator of sparsemax(z). Exact away from
/// support-boundary points. Throws InvalidDimension on size mismatch.
Vec sparsemax_jacobian_apply(const Vec& z, const Vec& upstream);

/// a.b / (|a| |b|), in [-1, 1]. Throws ZeroVector when either norm is zero.
double cosine_similarity(const Vec& a, const Vec& b);

} // namespace ccoa
