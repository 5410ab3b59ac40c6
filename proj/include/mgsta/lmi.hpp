#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mgsta/model.hpp"
#include "mgsta/types.hpp"

namespace mgsta::lmi {

/// Index map over the scalar decision variables of the synthesis program.
/// Layout order: Q (symmetric r x r, upper triangle row-major), X (symmetric
/// 2n x 2n), Y (full m x 2n, row-major), W (full m x r, row-major), then the
/// scalars mu, beta, pi, kappa, theta. Symmetric matrices are parameterized
/// by their upper triangle; an off-diagonal scalar enters both mirrored
/// entries with coefficient one, so evaluation reproduces the full matrix.
class VariableLayout {
  public:
    VariableLayout(int r, int n, int m);

    int r() const { return r_; }
    int n() const { return n_; }
    int m() const { return m_; }
    int count() const { return count_; }

    int q_index(int i, int j) const;
    int x_index(int i, int j) const;
    int y_index(int row, int col) const;
    int w_index(int row, int col) const;
    int mu_index() const { return scalar0_; }
    int beta_index() const { return scalar0_ + 1; }
    int pi_index() const { return scalar0_ + 2; }
    int kappa_index() const { return scalar0_ + 3; }
    int theta_index() const { return scalar0_ + 4; }

    Matrix q_value(const Vector& assignment) const;
    Matrix x_value(const Vector& assignment) const;
    Matrix y_value(const Vector& assignment) const;
    Matrix w_value(const Vector& assignment) const;

    void set_q(Vector& assignment, const Matrix& Q) const;
    void set_x(Vector& assignment, const Matrix& X) const;
    void set_y(Vector& assignment, const Matrix& Y) const;
    void set_w(Vector& assignment, const Matrix& W) const;

  private:
    int r_, n_, m_;
    int q0_, x0_, y0_, w0_, scalar0_, count_;
};

enum class Sense { NegativeDefinite, PositiveDefinite };

/// Symmetric-matrix-valued affine function of the layout scalars:
///   M(a) = const_term + sum_j a[j] * coeff  for (j, coeff) in coeff_terms.
struct AffineMatrixExpr {
    int size = 0;
    Sense sense = Sense::NegativeDefinite;
    Matrix const_term;
    std::vector<std::pair<int, Matrix>> coeff_terms; // sorted by index

    /// Largest relative asymmetry over the constant and coefficient
    /// matrices; the builders produce exactly symmetric data.
    double max_asymmetry() const;
};

/// Dense evaluation at an assignment covering all referenced indices.
/// Throws std::invalid_argument when the assignment is too short.
Matrix eval_expr(const AffineMatrixExpr& expr, const Vector& assignment);

/// Block-structured assembly helper. Off-diagonal placements mirror the
/// transposed term automatically so the result stays symmetric.
class ExprBuilder {
  public:
    ExprBuilder(std::vector<int> block_sizes, Sense sense);

    void add_const(int bi, int bj, const Matrix& M);
    void add_scalar_var(int bi, int bj, int var, const Matrix& M);
    /// Adds L * V * R placed at block (bi, bj), where V is the structured
    /// matrix variable expanded through `basis` (per-scalar basis matrices).
    void add_matrix_var(int bi, int bj,
                        const Matrix& L,
                        const std::vector<std::pair<int, Matrix>>& basis,
                        const Matrix& R);
    /// Adds L * V * R + (L * V * R)' on diagonal block bi.
    void add_matrix_var_sym(int bi,
                            const Matrix& L,
                            const std::vector<std::pair<int, Matrix>>& basis,
                            const Matrix& R);

    AffineMatrixExpr take();

  private:
    void place(Matrix& target, int bi, int bj, const Matrix& M);

    std::vector<int> offsets_;
    int size_;
    Sense sense_;
    Matrix const_term_;
    std::map<int, Matrix> coeffs_;
};

/// Per-scalar basis of a symmetric d x d variable starting at layout
/// index `first` (upper triangle, row-major; mirrored off-diagonals).
std::vector<std::pair<int, Matrix>> symmetric_basis(int d, int first);
/// Per-scalar basis of a full rows x cols variable (row-major).
std::vector<std::pair<int, Matrix>> full_basis(int rows, int cols, int first);

/// Structural matrices of the sliding subsystem in x = [sigma; z]
/// coordinates: x' = L(sigma) (A0 + B0 K) R(sigma) x + ...
struct StructuralMatrices {
    Matrix A0; // [[0, 0], [I, 0]]
    Matrix E0; // [I/2; 0]
    Matrix F0; // [0; I]
    Matrix G0; // [I, 0]

    static StructuralMatrices make(int n);
    Matrix B0(const Matrix& B) const; // [B; 0]
};

/// Vertex condition certifying contraction of the sliding subsystem
/// (sigma, z): negative-definite block expression of size 6n built from
/// X, Y and the diagonal multiplier scalars.
AffineMatrixExpr build_sigma_decay_lmi(const model::VertexMatrices& vertex,
                                       double alpha, double rho, double gamma,
                                       const VariableLayout& layout);
AffineMatrixExpr build_sigma_decay_lmi(const model::PolytopicPlant& plant,
                                       int vertex, double alpha, double rho,
                                       double gamma,
                                       const VariableLayout& layout);

/// Vertex condition certifying decay of the internal (zeta) subsystem with
/// the cost rows appended: negative-definite, size r + 2n + q.
AffineMatrixExpr build_zeta_decay_lmi(const model::VertexMatrices& vertex,
                                      double alpha, double rho,
                                      const Matrix& H, const Matrix& J,
                                      const VariableLayout& layout);
AffineMatrixExpr build_zeta_decay_lmi(const model::PolytopicPlant& plant,
                                      int vertex, double alpha, double rho,
                                      const Matrix& H, const Matrix& J,
                                      const VariableLayout& layout);

/// Vertex condition bounding the coupling output C zeta + B u into the
/// sliding subsystem: positive-definite, size r + n + q.
AffineMatrixExpr build_coupling_lmi(const model::VertexMatrices& vertex,
                                    double alpha, double rho,
                                    const Matrix& H, const Matrix& J,
                                    const VariableLayout& layout);
AffineMatrixExpr build_coupling_lmi(const model::PolytopicPlant& plant,
                                    int vertex, double alpha, double rho,
                                    const Matrix& H, const Matrix& J,
                                    const VariableLayout& layout);

/// Initial-value bounds linking theta to the Lyapunov level at t = 0:
/// [[theta, zeta0'], [zeta0, Q]] > 0 and [[theta, x0s'], [x0s, X]] > 0,
/// where x0s is the scaled initial state of the sliding subsystem.
std::pair<AffineMatrixExpr, AffineMatrixExpr>
build_initial_bound_lmis(const Vector& zeta0, const Vector& x0_scaled,
                         const VariableLayout& layout);

/// Gain magnitude bound [[omega I, Y], [Y', X]] > 0.
AffineMatrixExpr build_gain_bound_lmi(double omega,
                                      const VariableLayout& layout);

/// Human-readable dump: block size, sense, constant norm and per-variable
/// coefficient sparsity. Debug aid only; no stable format.
std::string dump_expr(const AffineMatrixExpr& expr);

} // namespace mgsta::lmi
