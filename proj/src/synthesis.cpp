#include "mgsta/synthesis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mgsta/scaling.hpp"

namespace mgsta::synthesis {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

std::vector<lmi::AffineMatrixExpr>
assemble_program(const model::PolytopicPlant& plant,
                 const model::DesignConfig& config,
                 const lmi::VariableLayout& layout) {
    config.validate(plant.r, plant.n, plant.m);
    std::vector<lmi::AffineMatrixExpr> exprs;
    exprs.reserve(3 * plant.vertex_count() + 3);
    for (int i = 0; i < plant.vertex_count(); ++i) {
        exprs.push_back(lmi::build_sigma_decay_lmi(plant, i, config.alpha,
                                                   config.rho, config.gamma,
                                                   layout));
        exprs.push_back(lmi::build_zeta_decay_lmi(plant, i, config.alpha,
                                                  config.rho, config.H,
                                                  config.J, layout));
        exprs.push_back(lmi::build_coupling_lmi(plant, i, config.alpha,
                                                config.rho, config.H, config.J,
                                                layout));
    }
    // initial-state blocks assume f(0) = 0; then z(0) = eta0
    const Vector x0_scaled =
        scale_state(config.sigma0, config.eta0, config.alpha);
    auto [init_zeta, init_x] =
        lmi::build_initial_bound_lmis(config.zeta0, x0_scaled, layout);
    exprs.push_back(std::move(init_zeta));
    exprs.push_back(std::move(init_x));
    exprs.push_back(lmi::build_gain_bound_lmi(config.omega, layout));
    return exprs;
}

std::tuple<Matrix, Matrix, Matrix>
recover_gains(const Matrix& Q, const Matrix& X, const Matrix& Y,
              const Matrix& W, int n) {
    Eigen::FullPivLU<Matrix> luQ(Q);
    Eigen::FullPivLU<Matrix> luX(X);
    require(luQ.isInvertible(), "recover_gains: Q is singular");
    require(luX.isInvertible(), "recover_gains: X is singular");
    // K0 Q = W and K X = Y; Q and X are symmetric, so the transposed
    // systems reuse the same factorizations
    Matrix K0 = luQ.solve(W.transpose()).transpose();
    Matrix K = luX.solve(Y.transpose()).transpose();
    return {K0, K.leftCols(n), K.rightCols(K.cols() - n)};
}

std::pair<double, std::vector<double>>
compute_delta(const model::PolytopicPlant& plant, const Matrix& K2,
              double gamma) {
    require(gamma > 0.0, "compute_delta: gamma must be positive");
    std::vector<double> deltas;
    deltas.reserve(plant.vertices.size());
    double dmin = kInf;
    for (std::size_t i = 0; i < plant.vertices.size(); ++i) {
        const Matrix BK2 = plant.vertices[i].B * K2;
        Eigen::JacobiSVD<Matrix> svd(BK2);
        const double smin = svd.singularValues().minCoeff();
        if (smin <= 0.0) {
            std::ostringstream os;
            os << "compute_delta: B K2 is singular at vertex " << i;
            throw std::invalid_argument(os.str());
        }
        // ||(B K2)^{-1}|| = 1 / smallest singular value of B K2
        const double delta = smin / gamma;
        deltas.push_back(delta);
        dmin = std::min(dmin, delta);
    }
    return {dmin, deltas};
}

SynthesisResult solve_inner(const model::PolytopicPlant& plant,
                            const model::DesignConfig& config,
                            const sdp::SolverSettings& settings) {
    lmi::VariableLayout layout(plant.r, plant.n, plant.m);
    const auto exprs = assemble_program(plant, config, layout);

    sdp::TranslateOptions topt;
    topt.layout = &layout;
    const auto problem = sdp::translate(exprs, layout.theta_index(), topt);
    const auto sol = sdp::solve(problem, settings);

    SynthesisResult result;
    result.status = sol.status;
    result.alpha = config.alpha;
    result.rho = config.rho;
    result.gamma = config.gamma;
    result.omega = config.omega;
    result.iterations = sol.iterations;
    result.message = sol.message;
    if (sol.status != sdp::SolveStatus::Optimal) return result;

    result.theta = sol.assignment[layout.theta_index()];
    result.Q = layout.q_value(sol.assignment);
    result.X = layout.x_value(sol.assignment);
    result.Y = layout.y_value(sol.assignment);
    result.W = layout.w_value(sol.assignment);
    result.mu = sol.assignment[layout.mu_index()];
    result.beta = sol.assignment[layout.beta_index()];
    result.pi = sol.assignment[layout.pi_index()];
    result.kappa = sol.assignment[layout.kappa_index()];

    auto [K0, K1, K2] = recover_gains(result.Q, result.X, result.Y, result.W,
                                      plant.n);
    result.K0 = std::move(K0);
    result.K1 = std::move(K1);
    result.K2 = std::move(K2);

    auto [dmin, deltas] = compute_delta(plant, result.K2, config.gamma);
    result.delta_min = dmin;
    result.delta_vertex = std::move(deltas);
    for (const auto& v : plant.vertices) {
        Eigen::JacobiSVD<Matrix> svd(v.B * result.K2);
        const auto& sv = svd.singularValues();
        result.bk2_condition.push_back(sv.maxCoeff() / sv.minCoeff());
    }
    result.margins = sdp::verify_solution(exprs, sol.assignment, 1e-7);
    return result;
}

namespace {

std::vector<double> grid_points(double lo, double hi, int count, bool log_spaced) {
    require(count >= 1, "outer_search: grid needs at least one point");
    if (count == 1) {
        require(lo == hi, "outer_search: a one-point axis needs min == max");
        return {lo};
    }
    require(lo < hi, "outer_search: grid bounds must satisfy min < max");
    std::vector<double> pts(count);
    if (log_spaced) {
        require(lo > 0.0, "outer_search: log grid needs positive bounds");
        const double llo = std::log(lo), lhi = std::log(hi);
        for (int i = 0; i < count; ++i)
            pts[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
    } else {
        for (int i = 0; i < count; ++i)
            pts[i] = lo + (hi - lo) * i / (count - 1);
    }
    return pts;
}

struct InnerEval {
    double theta = kInf;
    SynthesisResult result;
};

InnerEval eval_point(const model::PolytopicPlant& plant,
                     model::DesignConfig config, double alpha, double rho,
                     const sdp::SolverSettings& settings) {
    config.alpha = alpha;
    config.rho = rho;
    InnerEval e;
    try {
        e.result = solve_inner(plant, config, settings);
    } catch (const std::exception& ex) {
        e.result.status = sdp::SolveStatus::NumericalTrouble;
        e.result.message = ex.what();
        return e;
    }
    if (e.result.feasible()) e.theta = e.result.theta;
    return e;
}

// golden-section refinement of theta(alpha, rho) along one axis; the
// landscape keeps only the grid sweep, refinement points stay internal
double golden_axis(const model::PolytopicPlant& plant,
                   const model::DesignConfig& config,
                   const sdp::SolverSettings& settings, bool alpha_axis,
                   double fixed, double lo, double hi, double best_x,
                   double& best_theta) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto eval = [&](double x) {
        const double a = alpha_axis ? x : fixed;
        const double r = alpha_axis ? fixed : x;
        return eval_point(plant, config, a, r, settings).theta;
    };
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = eval(x1), f2 = eval(x2);
    for (int i = 0; i < 8; ++i) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = eval(x2);
        }
    }
    double x = f1 <= f2 ? x1 : x2;
    double fx = std::min(f1, f2);
    if (fx < best_theta) {
        best_theta = fx;
        return x;
    }
    return best_x;
}

} // namespace

SearchOutcome outer_search(const model::PolytopicPlant& plant,
                           const model::DesignConfig& config,
                           const SearchGrid& grid,
                           const sdp::SolverSettings& settings, int threads) {
    const auto alphas = grid_points(grid.alpha_min, grid.alpha_max,
                                    grid.alpha_points, grid.log_spaced);
    const auto rhos = grid_points(grid.rho_min, grid.rho_max, grid.rho_points,
                                  grid.log_spaced);

    std::vector<std::pair<double, double>> points;
    for (double a : alphas)
        for (double r : rhos) points.emplace_back(a, r);

    std::vector<InnerEval> evals(points.size());
    int workers = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(points.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            evals[i] = eval_point(plant, config, points[i].first,
                                  points[i].second, settings);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    SearchOutcome outcome;
    outcome.landscape.reserve(points.size());
    double best_theta = kInf;
    std::size_t best_index = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
        outcome.landscape.push_back({points[i].first, points[i].second,
                                     evals[i].theta, evals[i].result.status});
        if (evals[i].theta < best_theta) {
            best_theta = evals[i].theta;
            best_index = i;
        }
    }
    if (best_index == points.size())
        throw std::runtime_error("outer_search: every grid point was infeasible");

    double alpha = points[best_index].first;
    double rho = points[best_index].second;

    // coordinate descent around the best grid point; each pass shrinks a
    // bracket of one grid cell on either side
    auto neighbors = [](const std::vector<double>& pts, double x) {
        auto it = std::lower_bound(pts.begin(), pts.end(), x);
        std::size_t idx = it == pts.end()
                              ? pts.size() - 1
                              : static_cast<std::size_t>(it - pts.begin());
        const double lo = idx > 0 ? pts[idx - 1] : pts.front();
        const double hi = idx + 1 < pts.size() ? pts[idx + 1] : pts.back();
        return std::make_pair(lo, hi);
    };
    for (int pass = 0; pass < grid.refine_passes; ++pass) {
        auto [alo, ahi] = neighbors(alphas, alpha);
        if (alo < ahi)
            alpha = golden_axis(plant, config, settings, true, rho, alo, ahi,
                                alpha, best_theta);
        auto [rlo, rhi] = neighbors(rhos, rho);
        if (rlo < rhi)
            rho = golden_axis(plant, config, settings, false, alpha, rlo, rhi,
                              rho, best_theta);
    }

    auto best = eval_point(plant, config, alpha, rho, settings);
    if (!best.result.feasible()) {
        // fall back to the best recorded grid point
        best = eval_point(plant, config, points[best_index].first,
                          points[best_index].second, settings);
    }
    outcome.best = std::move(best.result);
    return outcome;
}

} // namespace mgsta::synthesis
