#pragma once

#include <span>
#include <string>
#include <vector>

#include "mgsta/lmi.hpp"
#include "mgsta/types.hpp"

namespace mgsta::sdp {

/// One PSD constraint F0 + sum_j y_j Fj >= 0 with symmetric coefficient
/// matrices stored sparsely over the variable indices.
struct PsdBlock {
    Matrix F0;
    std::vector<std::pair<int, Matrix>> coeffs; // sorted by variable index
    int dim() const { return static_cast<int>(F0.rows()); }
};

/// Standard-form semidefinite program: minimize a sparse linear objective
/// subject to PSD block constraints.
struct ConicProblem {
    int var_count = 0;
    std::vector<std::pair<int, double>> objective;
    std::vector<PsdBlock> blocks;
};

enum class SolveStatus { Optimal, Infeasible, NumericalTrouble };

const char* to_string(SolveStatus s);

struct ConicSolution {
    Vector assignment;
    double objective_value = 0.0;
    SolveStatus status = SolveStatus::NumericalTrouble;
    std::vector<double> block_min_eig; // at the returned assignment
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double rel_gap = 0.0;
    std::string message;
};

struct SolverSettings {
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iterations = 200;
    bool extended_precision = false; // run the iteration in long double
};

struct TranslateOptions {
    /// Strict inequalities are realized by shifting each block with
    /// margin_coeff * (1 + data scale) * I.
    double margin_coeff = 1e-7;
    /// When a layout is supplied, floors Q >= eps I, X >= eps I and
    /// mu, beta, pi, kappa >= eps are appended, eps = floor_coeff * (1 +
    /// data scale); the change of variables needs Q and X invertible.
    const lmi::VariableLayout* layout = nullptr;
    double floor_coeff = 1e-6;
};

/// Maps the affine expressions onto standard-form PSD blocks (negative-
/// definite expressions are negated) and sets the objective to minimize the
/// indexed variable. Throws std::invalid_argument on layout mismatch.
ConicProblem translate(std::span<const lmi::AffineMatrixExpr> exprs,
                       int objective_index,
                       const TranslateOptions& options = {});

/// Homogeneous self-dual interior-point solve (Nesterov-Todd scaling,
/// predictor-corrector). The returned assignment is the best iterate even
/// when the status is not Optimal.
ConicSolution solve(const ConicProblem& problem,
                    const SolverSettings& settings = {});

struct ExprMargin {
    int index = 0;            // position in the expression list
    double margin = 0.0;      // sign-adjusted minimum eigenvalue
    bool pass = false;
};

/// Evaluates every expression at the assignment and reports the
/// sign-adjusted eigenvalue margin (min eig for positive-definite sense,
/// -max eig for negative-definite). pass iff margin >= -tolerance.
std::vector<ExprMargin>
verify_solution(std::span<const lmi::AffineMatrixExpr> exprs,
                const Vector& assignment, double tolerance = 0.0);

/// Sparse text dump of the standard form: header with sizes, then
/// (block, var, row, col, value) triplet lines; var -1 is the constant.
std::string dump_problem(const ConicProblem& problem);

} // namespace mgsta::sdp
