#pragma once

#include <cmath>

#include "mgsta/types.hpp"

namespace mgsta {

/// Gain-shaping scalar c(sigma) = 1/sqrt(||sigma||) + alpha.
/// A positive floor on ||sigma|| keeps the value finite on the sliding set;
/// pass reg = 0 for the unregularized definition (valid for sigma != 0).
inline double c_sigma(double sigma_norm, double alpha, double reg = 0.0) {
    return 1.0 / std::sqrt(std::max(sigma_norm, reg)) + alpha;
}

/// Applies the state scaling diag(c(sigma) I_n, I_n) to x = [sigma; z].
/// At sigma = 0 the product c(sigma)*sigma vanishes, so by continuity the
/// scaled vector is [alpha*sigma; z] there (only the product ever enters).
inline Vector scale_state(const Vector& sigma, const Vector& z, double alpha,
                          double reg = 0.0) {
    const int n = static_cast<int>(sigma.size());
    Vector out(2 * n);
    const double nrm = sigma.norm();
    const double c = nrm > 0.0 ? c_sigma(nrm, alpha, reg) : alpha;
    out.head(n) = c * sigma;
    out.tail(n) = z;
    return out;
}

} // namespace mgsta
