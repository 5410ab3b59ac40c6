#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "mgsta/model.hpp"
#include "mgsta/synthesis.hpp"
#include "mgsta/types.hpp"

namespace mgsta::analysis {

/// Analysis-side Lyapunov certificates: S for the internal subsystem,
/// P for the sliding subsystem, diagonal multiplier scalars and the
/// design scalars they were produced with.
struct Certificates {
    Matrix S; // r x r, positive definite
    Matrix P; // 2n x 2n, positive definite
    double mu = 0.0, beta = 0.0, pi = 0.0, kappa = 0.0;
    double alpha = 0.0, rho = 0.0, gamma = 0.0;
};

/// S = Q^{-1}, P = X^{-1} from a feasible synthesis result.
Certificates certificates_from_synthesis(const synthesis::SynthesisResult& r);

/// Decay condition of the internal subsystem:
/// [[A'S + SA + rho S, *], [G0' E' S / alpha, -rho P]].
/// Returns the maximum eigenvalue; the condition holds iff it is < 0.
double zeta_decay_margin(const model::VertexMatrices& vertex, const Matrix& S,
                         const Matrix& P, double alpha, double rho);

/// Decay condition of the sliding subsystem for given gains, paired with
/// the coupling bound [[rho S, *], [C + B K0, kappa I]].
/// Returns (max eig of the decay form, min eig of the coupling form);
/// both conditions hold iff the first is < 0 and the second is > 0.
std::pair<double, double>
sigma_decay_margins(const model::VertexMatrices& vertex, const Matrix& K0,
                    const Matrix& K, const Certificates& certs);

/// Performance forms extending the two conditions with the cost rows.
/// Returns (max eig of the extended decay form, min eig of the extended
/// coupling form).
std::pair<double, double>
performance_margins(const model::VertexMatrices& vertex,
                    const Certificates& certs, const Matrix& K0,
                    const Matrix& H, const Matrix& J);

/// Lyapunov values (v, V, nu): v = zeta'S zeta,
/// V = (R(sigma)x)' P (R(sigma)x) with x = [sigma; z], nu = max(v, V).
std::tuple<double, double, double>
lyapunov_nu(const Vector& zeta, const Vector& sigma, const Vector& z,
            const Matrix& S, const Matrix& P, double alpha,
            double sigma_reg = 0.0);

/// Stability and finite-time constants derived from verified margins.
/// The rate conversions are conservative; simulated reaching times must
/// only respect the bound direction.
struct StabilityConstants {
    double eps_L = 0.0;   // exponential rate floor of the internal loop
    double eps_N = 0.0;   // sqrt-decay margin of the sliding loop
    double theta_N = 0.0; // lambda_max(P)
    double nu_star = 0.0; // residual level (eps_N / eps_L)^2

    /// Reaching-time bound T(nu0) <= (2 / eps_N)(sqrt(nu0) - sqrt(nu*)).
    double reach_time(double nu0) const;
};

/// Builds the constants from the worst-case vertex margins:
/// eps_L = |worst performance-decay eigenvalue| / lambda_max(diag(S, P, I)),
/// eps_N = |worst sliding-decay eigenvalue|, theta_N = lambda_max(P).
/// Throws std::invalid_argument unless every margin is strictly feasible.
StabilityConstants
stability_constants(const model::PolytopicPlant& plant,
                    const Certificates& certs, const Matrix& K0,
                    const Matrix& K1, const Matrix& K2, const Matrix& H,
                    const Matrix& J);

struct VerificationRow {
    std::string point;      // "vertex i" or "sample k"
    std::string inequality; // which condition
    double margin = 0.0;    // sign-adjusted (positive = satisfied)
    bool pass = false;
};

/// Evaluates all analysis inequalities at every vertex and at a number of
/// random simplex combinations (smoke test for the convex-hull argument).
std::vector<VerificationRow>
verify_all(const model::PolytopicPlant& plant, const Certificates& certs,
           const Matrix& K0, const Matrix& K1, const Matrix& K2,
           const Matrix& H, const Matrix& J, int simplex_samples = 16,
           unsigned seed = 12345);

} // namespace mgsta::analysis
