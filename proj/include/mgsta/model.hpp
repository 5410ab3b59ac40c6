#pragma once

#include <optional>
#include <vector>

#include "mgsta/types.hpp"

namespace mgsta::model {

/// One vertex of the plant polytope: the regular-form matrices of
///   zeta' = A zeta + E sigma
///   sigma' = C zeta + D sigma + B u + f(t)
struct VertexMatrices {
    Matrix A; // r x r
    Matrix E; // r x n
    Matrix C; // n x r
    Matrix D; // n x n
    Matrix B; // n x m
};

/// Convex polytope of plants: every admissible plant is a convex
/// combination of the stored vertices.
struct PolytopicPlant {
    std::vector<VertexMatrices> vertices;
    int r = 0; // internal state dimension (zeta)
    int n = 0; // sliding-variable dimension (sigma)
    int m = 0; // input dimension

    int vertex_count() const { return static_cast<int>(vertices.size()); }
};

/// Validates dimensions across the vertex list and returns the plant.
/// Throws std::invalid_argument on an empty list or any mismatch.
PolytopicPlant make_polytope(std::vector<VertexMatrices> vertices);

/// Convex combination of the vertices for barycentric coordinates lambda.
/// lambda must be nonnegative and sum to one within 1e-12.
VertexMatrices combine(const PolytopicPlant& plant, const Vector& lambda);

struct VertexCheck {
    bool hurwitz = false;
    double spectral_abscissa = 0.0; // max real part of eig(A)
    int rank_B = 0;
    double sigma_ratio = 0.0;       // smallest/largest singular value of B
    bool full_row_rank = false;
};

/// Result of the standing-assumption checks. `pass` aggregates the
/// per-vertex necessary conditions; the common quadratic Lyapunov
/// certificate, when attempted, is a sufficient robustness check and its
/// failure is reported but does not clear `pass`.
struct AssumptionReport {
    std::vector<VertexCheck> vertex;
    std::optional<bool> common_lyapunov;
    bool pass = false;
};

/// Per-vertex Hurwitz and input-rank tests; optionally attempts a common
/// Lyapunov matrix S0 > 0 with Ai' S0 + S0 Ai < 0 for all vertices.
AssumptionReport check_assumptions(const PolytopicPlant& plant,
                                   bool try_common_lyapunov = true);

/// Design-time data: shaping scalars, cost weights and the initial state.
struct DesignConfig {
    double gamma = 1.0; // disturbance shaping
    double alpha = 1.0; // c(sigma) offset
    double rho = 1.0;   // Lyapunov coupling rate
    double omega = 1.0; // gain magnitude bound
    Matrix H;           // q x r cost weight on the state
    Matrix J;           // q x m cost weight on the control
    Vector zeta0;
    Vector sigma0;
    Vector eta0;

    /// Throws std::invalid_argument when a field is inconsistent with the
    /// plant dimensions or a scalar is not strictly positive.
    void validate(int r, int n, int m) const;
};

} // namespace mgsta::model
