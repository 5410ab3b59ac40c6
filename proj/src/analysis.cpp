#include "mgsta/analysis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mgsta/lmi.hpp"
#include "mgsta/scaling.hpp"

namespace mgsta::analysis {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double max_eig(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()),
                                              Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

double min_eig(const Matrix& M) { return -max_eig(-M); }

void check_pd(const Matrix& M, const char* name) {
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument(std::string("analysis: ") + name +
                                    " is not positive definite");
}

} // namespace

Certificates certificates_from_synthesis(const synthesis::SynthesisResult& r) {
    require(r.feasible(), "certificates_from_synthesis: result is not feasible");
    Certificates c;
    Eigen::LLT<Matrix> lltQ(r.Q);
    Eigen::LLT<Matrix> lltX(r.X);
    require(lltQ.info() == Eigen::Success && lltX.info() == Eigen::Success,
            "certificates_from_synthesis: Q or X is not positive definite");
    c.S = lltQ.solve(Matrix::Identity(r.Q.rows(), r.Q.cols()));
    c.P = lltX.solve(Matrix::Identity(r.X.rows(), r.X.cols()));
    c.S = 0.5 * (c.S + c.S.transpose());
    c.P = 0.5 * (c.P + c.P.transpose());
    c.mu = r.mu;
    c.beta = r.beta;
    c.pi = r.pi;
    c.kappa = r.kappa;
    c.alpha = r.alpha;
    c.rho = r.rho;
    c.gamma = r.gamma;
    return c;
}

double zeta_decay_margin(const model::VertexMatrices& vertex, const Matrix& S,
                         const Matrix& P, double alpha, double rho) {
    require(alpha > 0.0 && rho > 0.0, "zeta_decay_margin: scalars must be positive");
    const int r = static_cast<int>(vertex.A.rows());
    const int n = static_cast<int>(vertex.C.rows());
    require(S.rows() == r && P.rows() == 2 * n,
            "zeta_decay_margin: certificate dimensions");
    const auto s = lmi::StructuralMatrices::make(n);

    Matrix M = Matrix::Zero(r + 2 * n, r + 2 * n);
    M.topLeftCorner(r, r) =
        vertex.A.transpose() * S + S * vertex.A + rho * S;
    const Matrix off = (1.0 / alpha) * s.G0.transpose() * vertex.E.transpose() * S;
    M.block(r, 0, 2 * n, r) = off;
    M.block(0, r, r, 2 * n) = off.transpose();
    M.bottomRightCorner(2 * n, 2 * n) = -rho * P;
    return max_eig(M);
}

std::pair<double, double>
sigma_decay_margins(const model::VertexMatrices& vertex, const Matrix& K0,
                    const Matrix& K, const Certificates& certs) {
    const int n = static_cast<int>(vertex.C.rows());
    const int r = static_cast<int>(vertex.A.rows());
    require(K.rows() == vertex.B.cols() && K.cols() == 2 * n,
            "sigma_decay_margins: K must be m x 2n");
    check_pd(certs.P, "P");
    check_pd(certs.S, "S");
    require(certs.mu > 0.0 && certs.beta > 0.0 && certs.pi > 0.0 &&
                certs.kappa > 0.0,
            "sigma_decay_margins: multiplier scalars must be positive");
    const auto s = lmi::StructuralMatrices::make(n);
    const Matrix A_K = s.A0 + s.B0(vertex.B) * K;
    const Matrix& P = certs.P;

    // structural quadratic P [E0'; F0'; G0; G0]' Z [E0'; F0'; G0; G0] P
    Matrix struct_q = certs.mu * (s.E0 * s.E0.transpose()) +
                      certs.beta * (s.F0 * s.F0.transpose()) +
                      (certs.pi + certs.kappa) * (s.G0.transpose() * s.G0);
    // gain/disturbance quadratic with the inverted multipliers
    const Matrix BK = vertex.B * K;
    const Matrix DG = vertex.D * s.G0;
    Matrix gain_q = (1.0 / certs.mu) * BK.transpose() * BK +
                    (1.0 / (certs.beta * certs.gamma * certs.gamma)) *
                        s.G0.transpose() * s.G0 +
                    (1.0 / (certs.pi * certs.alpha * certs.alpha)) *
                        DG.transpose() * DG;

    Matrix decay = A_K.transpose() * P + P * A_K + P * struct_q * P + gain_q +
                   certs.rho * P;
    const double decay_margin = max_eig(decay);

    Matrix coupling = Matrix::Zero(r + n, r + n);
    coupling.topLeftCorner(r, r) = certs.rho * certs.S;
    const Matrix C0 = vertex.C + vertex.B * K0;
    coupling.block(r, 0, n, r) = C0;
    coupling.block(0, r, r, n) = C0.transpose();
    coupling.bottomRightCorner(n, n) =
        certs.kappa * Matrix::Identity(n, n);
    return {decay_margin, min_eig(coupling)};
}

std::pair<double, double>
performance_margins(const model::VertexMatrices& vertex,
                    const Certificates& certs, const Matrix& K0,
                    const Matrix& H, const Matrix& J) {
    const int r = static_cast<int>(vertex.A.rows());
    const int n = static_cast<int>(vertex.C.rows());
    const int q = static_cast<int>(H.rows());
    require(H.cols() == r && J.rows() == q,
            "performance_margins: cost weight dimensions");
    const auto s = lmi::StructuralMatrices::make(n);
    const Matrix HJK = H + J * K0;

    Matrix M = Matrix::Zero(r + 2 * n + q, r + 2 * n + q);
    M.topLeftCorner(r, r) =
        vertex.A.transpose() * certs.S + certs.S * vertex.A + certs.rho * certs.S;
    const Matrix off =
        (1.0 / certs.alpha) * s.G0.transpose() * vertex.E.transpose() * certs.S;
    M.block(r, 0, 2 * n, r) = off;
    M.block(0, r, r, 2 * n) = off.transpose();
    M.block(r, r, 2 * n, 2 * n) = -certs.rho * certs.P;
    M.block(r + 2 * n, 0, q, r) = HJK;
    M.block(0, r + 2 * n, r, q) = HJK.transpose();
    M.bottomRightCorner(q, q) = -Matrix::Identity(q, q);
    const double perf_decay = max_eig(M);

    Matrix N = Matrix::Zero(r + n + q, r + n + q);
    N.topLeftCorner(r, r) = certs.rho * certs.S;
    const Matrix C0 = vertex.C + vertex.B * K0;
    N.block(r, 0, n, r) = C0;
    N.block(0, r, r, n) = C0.transpose();
    N.block(r, r, n, n) = certs.kappa * Matrix::Identity(n, n);
    N.block(r + n, 0, q, r) = HJK;
    N.block(0, r + n, r, q) = HJK.transpose();
    N.bottomRightCorner(q, q) = certs.alpha * Matrix::Identity(q, q);
    return {perf_decay, min_eig(N)};
}

std::tuple<double, double, double>
lyapunov_nu(const Vector& zeta, const Vector& sigma, const Vector& z,
            const Matrix& S, const Matrix& P, double alpha, double sigma_reg) {
    const double v = zeta.dot(S * zeta);
    const Vector xs = scale_state(sigma, z, alpha, sigma_reg);
    const double V = xs.dot(P * xs);
    return {v, V, std::max(v, V)};
}

double StabilityConstants::reach_time(double nu0) const {
    if (nu0 <= nu_star) return 0.0;
    return 2.0 / eps_N * (std::sqrt(nu0) - std::sqrt(nu_star));
}

StabilityConstants
stability_constants(const model::PolytopicPlant& plant,
                    const Certificates& certs, const Matrix& K0,
                    const Matrix& K1, const Matrix& K2, const Matrix& H,
                    const Matrix& J) {
    Matrix K(K1.rows(), K1.cols() + K2.cols());
    K << K1, K2;
    double worst_perf = -std::numeric_limits<double>::infinity();
    double worst_decay = -std::numeric_limits<double>::infinity();
    for (const auto& v : plant.vertices) {
        worst_perf = std::max(worst_perf,
                              performance_margins(v, certs, K0, H, J).first);
        worst_decay = std::max(worst_decay,
                               sigma_decay_margins(v, K0, K, certs).first);
    }
    require(worst_perf < 0.0 && worst_decay < 0.0,
            "stability_constants: margins are not strictly feasible");

    const double scale = std::max({max_eig(certs.S), max_eig(certs.P), 1.0});
    StabilityConstants sc;
    sc.eps_L = -worst_perf / scale;
    sc.eps_N = -worst_decay;
    sc.theta_N = max_eig(certs.P);
    sc.nu_star = (sc.eps_N / sc.eps_L) * (sc.eps_N / sc.eps_L);
    return sc;
}

std::vector<VerificationRow>
verify_all(const model::PolytopicPlant& plant, const Certificates& certs,
           const Matrix& K0, const Matrix& K1, const Matrix& K2,
           const Matrix& H, const Matrix& J, int simplex_samples,
           unsigned seed) {
    Matrix K(K1.rows(), K1.cols() + K2.cols());
    K << K1, K2;

    std::vector<VerificationRow> rows;
    auto add = [&](const std::string& point, const char* name, double margin) {
        rows.push_back({point, name, margin, margin > 0.0});
    };
    auto run_point = [&](const std::string& tag, const model::VertexMatrices& v) {
        add(tag, "zeta_decay",
            -zeta_decay_margin(v, certs.S, certs.P, certs.alpha, certs.rho));
        const auto [dec, coup] = sigma_decay_margins(v, K0, K, certs);
        add(tag, "sigma_decay", -dec);
        add(tag, "coupling", coup);
        const auto [pdec, pcoup] = performance_margins(v, certs, K0, H, J);
        add(tag, "perf_decay", -pdec);
        add(tag, "perf_coupling", pcoup);
    };

    for (int i = 0; i < plant.vertex_count(); ++i) {
        std::ostringstream tag;
        tag << "vertex " << i;
        run_point(tag.str(), plant.vertices[i]);
    }

    std::mt19937 rng(seed);
    std::exponential_distribution<double> expd(1.0);
    for (int k = 0; k < simplex_samples; ++k) {
        Vector lambda(plant.vertex_count());
        for (int i = 0; i < lambda.size(); ++i) lambda[i] = expd(rng);
        lambda /= lambda.sum();
        std::ostringstream tag;
        tag << "sample " << k;
        run_point(tag.str(), combine(plant, lambda));
    }
    return rows;
}

} // namespace mgsta::analysis
