#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mgsta/model.hpp"
#include "mgsta/sdp.hpp"

namespace mgsta::synthesis {

/// Output of the inner convex program at a fixed (alpha, rho): certified
/// performance bound, certificate matrices, recovered gains and the
/// admissible disturbance bound.
struct SynthesisResult {
    sdp::SolveStatus status = sdp::SolveStatus::NumericalTrouble;
    double theta = 0.0; // guaranteed performance bound
    Matrix Q, X, Y, W;
    double mu = 0.0, beta = 0.0, pi = 0.0, kappa = 0.0;
    Matrix K0, K1, K2;
    std::vector<double> delta_vertex;
    double delta_min = 0.0;
    std::vector<double> bk2_condition; // cond(B_i K2) per vertex
    double alpha = 0.0, rho = 0.0, gamma = 0.0, omega = 0.0;
    std::vector<sdp::ExprMargin> margins; // per assembled LMI
    int iterations = 0;
    std::string message;

    bool feasible() const { return status == sdp::SolveStatus::Optimal; }
};

/// Assembles the full LMI list (per-vertex decay and coupling conditions,
/// initial bounds, gain bound) for the given design scalars.
std::vector<lmi::AffineMatrixExpr>
assemble_program(const model::PolytopicPlant& plant,
                 const model::DesignConfig& config,
                 const lmi::VariableLayout& layout);

/// Solves the inner minimization of theta at the fixed (alpha, rho) in
/// `config`, recovers the gains and attaches verification margins.
SynthesisResult solve_inner(const model::PolytopicPlant& plant,
                            const model::DesignConfig& config,
                            const sdp::SolverSettings& settings = {});

/// K0 = W Q^{-1}; K = Y X^{-1} split into (K1 | K2) after n columns.
/// Throws std::invalid_argument when Q or X is numerically singular.
std::tuple<Matrix, Matrix, Matrix>
recover_gains(const Matrix& Q, const Matrix& X, const Matrix& Y,
              const Matrix& W, int n);

/// Per-vertex admissible disturbance-rate bounds
/// delta_i = 1 / (||(B_i K2)^{-1}|| gamma) and their minimum.
/// Throws std::invalid_argument when some B_i K2 is singular.
std::pair<double, std::vector<double>>
compute_delta(const model::PolytopicPlant& plant, const Matrix& K2,
              double gamma);

struct SearchGrid {
    double alpha_min = 1.0, alpha_max = 100.0;
    int alpha_points = 8;
    double rho_min = 0.1, rho_max = 10.0;
    int rho_points = 8;
    bool log_spaced = true;
    int refine_passes = 3; // coordinate-descent refinements around the best
};

struct SearchPoint {
    double alpha = 0.0, rho = 0.0;
    double theta = 0.0; // +inf when not optimal
    sdp::SolveStatus status = sdp::SolveStatus::NumericalTrouble;
};

struct SearchOutcome {
    SynthesisResult best;
    std::vector<SearchPoint> landscape;
};

/// Grid sweep over (alpha, rho) followed by golden-section coordinate
/// descent around the best feasible point. Grid points run on up to
/// `threads` workers (0 = hardware concurrency). Throws std::runtime_error
/// when every evaluated point is infeasible.
SearchOutcome outer_search(const model::PolytopicPlant& plant,
                           const model::DesignConfig& config,
                           const SearchGrid& grid,
                           const sdp::SolverSettings& settings = {},
                           int threads = 0);

} // namespace mgsta::synthesis
