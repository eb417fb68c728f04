#include "ccoa/sparsemax.hpp"

#include <algorithm>
#include <cmath>

namespace ccoa {

namespace {

// Support threshold tau via the sorted-cumulative rule:
// sort descending, k(z) = max{k : 1 + k*z_(k) > cumsum_k}, tau = (cumsum_k - 1)/k.
double support_threshold(const Vec& z) {
    Vec sorted(z);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0;
    double tau = sorted[0] - 1.0;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
        cumsum += sorted[k - 1];
        if (1.0 + static_cast<double>(k) * sorted[k - 1] > cumsum) {
            tau = (cumsum - 1.0) / static_cast<double>(k);
        } else {
            break;
        }
    }
    return tau;
}

} // namespace

Vec sparsemax(const Vec& z) {
    require_finite_vector(z, "sparsemax");
    const double tau = support_threshold(z);
    Vec p(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::max(z[i] - tau, 0.0);
    }
    return p;
}

Vec sparsemax_jacobian_apply(const Vec& z, const Vec& upstream) {
    require_finite_vector(z, "sparsemax_jacobian_apply");
    require_same_dim(z, upstream, "sparsemax_jacobian_apply");
    const Vec p = sparsemax(z);

    double support_size = 0.0;
    double support_sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            support_size += 1.0;
            support_sum += upstream[i];
        }
    }
    Vec out(z.size(), 0.0);
    const double mean = support_sum / support_size; // support is never empty
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) out[i] = upstream[i] - mean;
    }
    return out;
}

double cosine_similarity(const Vec& a, const Vec& b) {
    require_finite_vector(a, "cosine_similarity");
    require_finite_vector(b, "cosine_similarity");
    require_same_dim(a, b, "cosine_similarity");
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na == 0.0 || nb == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cosine_similarity: zero-norm input");
    }
    return dot(a, b) / (na * nb);
}

} // namespace ccoa
