#include "mgsta/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mgsta/lmi.hpp"
#include "mgsta/sdp.hpp"

namespace mgsta::model {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

} // namespace

PolytopicPlant make_polytope(std::vector<VertexMatrices> vertices) {
    require(!vertices.empty(), "make_polytope: empty vertex list");

    const auto& v0 = vertices.front();
    const int r = static_cast<int>(v0.A.rows());
    const int n = static_cast<int>(v0.C.rows());
    const int m = static_cast<int>(v0.B.cols());

    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const auto& v = vertices[i];
        std::ostringstream tag;
        tag << "make_polytope: vertex " << i << ": ";
        require(v.A.rows() == r && v.A.cols() == r, tag.str() + "A must be r x r");
        require(v.E.rows() == r && v.E.cols() == n, tag.str() + "E must be r x n");
        require(v.C.rows() == n && v.C.cols() == r, tag.str() + "C must be n x r");
        require(v.D.rows() == n && v.D.cols() == n, tag.str() + "D must be n x n");
        require(v.B.rows() == n && v.B.cols() == m, tag.str() + "B must be n x m");
        require(all_finite(v.A) && all_finite(v.E) && all_finite(v.C) &&
                    all_finite(v.D) && all_finite(v.B),
                tag.str() + "non-finite entry");
    }
    require(m >= n, "make_polytope: m < n, input matrix cannot have full row rank");

    PolytopicPlant plant;
    plant.vertices = std::move(vertices);
    plant.r = r;
    plant.n = n;
    plant.m = m;
    return plant;
}

VertexMatrices combine(const PolytopicPlant& plant, const Vector& lambda) {
    require(lambda.size() == plant.vertex_count(),
            "combine: lambda length does not match the vertex count");
    require(lambda.minCoeff() >= 0.0, "combine: lambda has a negative component");
    require(std::abs(lambda.sum() - 1.0) <= 1e-12,
            "combine: lambda does not sum to one");

    VertexMatrices out;
    out.A = Matrix::Zero(plant.r, plant.r);
    out.E = Matrix::Zero(plant.r, plant.n);
    out.C = Matrix::Zero(plant.n, plant.r);
    out.D = Matrix::Zero(plant.n, plant.n);
    out.B = Matrix::Zero(plant.n, plant.m);
    for (int i = 0; i < plant.vertex_count(); ++i) {
        const auto& v = plant.vertices[i];
        out.A += lambda[i] * v.A;
        out.E += lambda[i] * v.E;
        out.C += lambda[i] * v.C;
        out.D += lambda[i] * v.D;
        out.B += lambda[i] * v.B;
    }
    return out;
}

namespace {

// Feasibility of A_i' S0 + S0 A_i < 0, S0 > 0, posed as maximizing the
// uniform decay slack s over a normalized I <= S0 <= tau I window.
bool common_lyapunov_certificate(const PolytopicPlant& plant) {
    const int r = plant.r;
    const int ns = r * (r + 1) / 2; // S0 scalars
    const int slack = ns;           // index of s
    const int var_count = ns + 1;

    const auto basis = lmi::symmetric_basis(r, 0);
    const Matrix I = Matrix::Identity(r, r);

    std::vector<lmi::AffineMatrixExpr> exprs;
    for (const auto& v : plant.vertices) {
        lmi::ExprBuilder b({r}, lmi::Sense::NegativeDefinite);
        b.add_matrix_var_sym(0, v.A.transpose(), basis, I);
        b.add_scalar_var(0, 0, slack, I);
        exprs.push_back(b.take());
    }
    {
        lmi::ExprBuilder b({r}, lmi::Sense::PositiveDefinite); // S0 >= I
        b.add_matrix_var(0, 0, I, basis, I);
        b.add_const(0, 0, -I);
        exprs.push_back(b.take());
    }
    {
        lmi::ExprBuilder b({r}, lmi::Sense::PositiveDefinite); // S0 <= tau I
        constexpr double tau = 1e6;
        b.add_const(0, 0, tau * I);
        b.add_matrix_var(0, 0, -I, basis, I);
        exprs.push_back(b.take());
    }

    sdp::TranslateOptions topt;
    topt.margin_coeff = 0.0; // strictness handled by the sign of s
    auto problem = sdp::translate(exprs, slack, topt);
    problem.var_count = var_count;
    // maximize the slack
    problem.objective = {{slack, -1.0}};

    sdp::SolverSettings settings;
    settings.feas_tol = 1e-7;
    settings.gap_tol = 1e-6;
    auto sol = sdp::solve(problem, settings);
    if (sol.status != sdp::SolveStatus::Optimal) return false;
    return sol.assignment[slack] > 1e-9;
}

} // namespace

AssumptionReport check_assumptions(const PolytopicPlant& plant,
                                   bool try_common_lyapunov) {
    AssumptionReport report;
    report.vertex.reserve(plant.vertices.size());
    bool pass = true;
    for (const auto& v : plant.vertices) {
        VertexCheck c;
        Eigen::EigenSolver<Matrix> eig(v.A);
        c.spectral_abscissa = eig.eigenvalues().real().maxCoeff();
        c.hurwitz = c.spectral_abscissa < 0.0;

        Eigen::JacobiSVD<Matrix> svd(v.B);
        const auto& sv = svd.singularValues();
        const double smax = sv.size() > 0 ? sv(0) : 0.0;
        const double smin = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
        c.sigma_ratio = smax > 0.0 ? smin / smax : 0.0;
        c.rank_B = 0;
        for (int k = 0; k < sv.size(); ++k)
            if (sv(k) > 1e-9 * smax) ++c.rank_B;
        c.full_row_rank = c.rank_B == plant.n;

        pass = pass && c.hurwitz && c.full_row_rank;
        report.vertex.push_back(c);
    }
    report.pass = pass;
    if (try_common_lyapunov && pass)
        report.common_lyapunov = common_lyapunov_certificate(plant);
    return report;
}

void DesignConfig::validate(int r, int n, int m) const {
    require(gamma > 0.0 && alpha > 0.0 && rho > 0.0 && omega > 0.0,
            "DesignConfig: gamma, alpha, rho, omega must be positive");
    require(H.cols() == r, "DesignConfig: H must have r columns");
    require(J.cols() == m, "DesignConfig: J must have m columns");
    require(H.rows() == J.rows(), "DesignConfig: H and J row counts differ");
    require(zeta0.size() == r, "DesignConfig: zeta0 must have length r");
    require(sigma0.size() == n, "DesignConfig: sigma0 must have length n");
    require(eta0.size() == n, "DesignConfig: eta0 must have length n");
}

} // namespace mgsta::model
