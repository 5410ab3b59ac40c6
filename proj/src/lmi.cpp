#include "mgsta/lmi.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mgsta::lmi {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

int sym_count(int d) { return d * (d + 1) / 2; }

// position of (i, j), i <= j, in a row-major upper-triangle enumeration
int upper_offset(int d, int i, int j) {
    return i * d - i * (i - 1) / 2 + (j - i);
}

} // namespace

VariableLayout::VariableLayout(int r, int n, int m) : r_(r), n_(n), m_(m) {
    require(r >= 1 && n >= 1 && m >= 1, "VariableLayout: dimensions must be positive");
    q0_ = 0;
    x0_ = q0_ + sym_count(r_);
    y0_ = x0_ + sym_count(2 * n_);
    w0_ = y0_ + m_ * 2 * n_;
    scalar0_ = w0_ + m_ * r_;
    count_ = scalar0_ + 5;
}

int VariableLayout::q_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    require(j < r_, "VariableLayout: Q index out of range");
    return q0_ + upper_offset(r_, i, j);
}

int VariableLayout::x_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    require(j < 2 * n_, "VariableLayout: X index out of range");
    return x0_ + upper_offset(2 * n_, i, j);
}

int VariableLayout::y_index(int row, int col) const {
    require(row < m_ && col < 2 * n_, "VariableLayout: Y index out of range");
    return y0_ + row * 2 * n_ + col;
}

int VariableLayout::w_index(int row, int col) const {
    require(row < m_ && col < r_, "VariableLayout: W index out of range");
    return w0_ + row * r_ + col;
}

namespace {

Matrix sym_value(const Vector& a, int d, int first) {
    Matrix M(d, d);
    int k = first;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            M(i, j) = a[k];
            M(j, i) = a[k];
            ++k;
        }
    return M;
}

void sym_store(Vector& a, const Matrix& M, int first) {
    int k = first;
    const int d = static_cast<int>(M.rows());
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) a[k++] = 0.5 * (M(i, j) + M(j, i));
}

} // namespace

Matrix VariableLayout::q_value(const Vector& a) const { return sym_value(a, r_, q0_); }
Matrix VariableLayout::x_value(const Vector& a) const { return sym_value(a, 2 * n_, x0_); }

Matrix VariableLayout::y_value(const Vector& a) const {
    Matrix Y(m_, 2 * n_);
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < 2 * n_; ++j) Y(i, j) = a[y_index(i, j)];
    return Y;
}

Matrix VariableLayout::w_value(const Vector& a) const {
    Matrix W(m_, r_);
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < r_; ++j) W(i, j) = a[w_index(i, j)];
    return W;
}

void VariableLayout::set_q(Vector& a, const Matrix& Q) const { sym_store(a, Q, q0_); }
void VariableLayout::set_x(Vector& a, const Matrix& X) const { sym_store(a, X, x0_); }

void VariableLayout::set_y(Vector& a, const Matrix& Y) const {
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < 2 * n_; ++j) a[y_index(i, j)] = Y(i, j);
}

void VariableLayout::set_w(Vector& a, const Matrix& W) const {
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < r_; ++j) a[w_index(i, j)] = W(i, j);
}

double AffineMatrixExpr::max_asymmetry() const {
    auto rel_asym = [](const Matrix& M) {
        const double nrm = M.norm();
        if (nrm == 0.0) return 0.0;
        return (M - M.transpose()).norm() / nrm;
    };
    double worst = rel_asym(const_term);
    for (const auto& [j, M] : coeff_terms) worst = std::max(worst, rel_asym(M));
    return worst;
}

Matrix eval_expr(const AffineMatrixExpr& expr, const Vector& assignment) {
    int max_index = -1;
    for (const auto& [j, M] : expr.coeff_terms) max_index = std::max(max_index, j);
    require(assignment.size() > max_index,
            "eval_expr: assignment does not cover every variable in the expression");
    Matrix out = expr.const_term;
    for (const auto& [j, M] : expr.coeff_terms) out += assignment[j] * M;
    return out;
}

ExprBuilder::ExprBuilder(std::vector<int> block_sizes, Sense sense)
    : sense_(sense) {
    offsets_.resize(block_sizes.size() + 1, 0);
    for (std::size_t i = 0; i < block_sizes.size(); ++i)
        offsets_[i + 1] = offsets_[i] + block_sizes[i];
    size_ = offsets_.back();
    const_term_ = Matrix::Zero(size_, size_);
}

void ExprBuilder::place(Matrix& target, int bi, int bj, const Matrix& M) {
    target.block(offsets_[bi], offsets_[bj], M.rows(), M.cols()) += M;
    if (bi != bj)
        target.block(offsets_[bj], offsets_[bi], M.cols(), M.rows()) +=
            M.transpose();
}

void ExprBuilder::add_const(int bi, int bj, const Matrix& M) {
    place(const_term_, bi, bj, M);
}

void ExprBuilder::add_scalar_var(int bi, int bj, int var, const Matrix& M) {
    auto [it, inserted] = coeffs_.try_emplace(var, Matrix::Zero(size_, size_));
    place(it->second, bi, bj, M);
}

void ExprBuilder::add_matrix_var(int bi, int bj, const Matrix& L,
                                 const std::vector<std::pair<int, Matrix>>& basis,
                                 const Matrix& R) {
    for (const auto& [var, E] : basis) add_scalar_var(bi, bj, var, L * E * R);
}

void ExprBuilder::add_matrix_var_sym(int bi, const Matrix& L,
                                     const std::vector<std::pair<int, Matrix>>& basis,
                                     const Matrix& R) {
    for (const auto& [var, E] : basis) {
        const Matrix M = L * E * R;
        add_scalar_var(bi, bi, var, M + M.transpose());
    }
}

AffineMatrixExpr ExprBuilder::take() {
    AffineMatrixExpr expr;
    expr.size = size_;
    expr.sense = sense_;
    expr.const_term = std::move(const_term_);
    expr.coeff_terms.reserve(coeffs_.size());
    for (auto& [j, M] : coeffs_) {
        if (M.norm() > 0.0) expr.coeff_terms.emplace_back(j, std::move(M));
    }
    return expr;
}

std::vector<std::pair<int, Matrix>> symmetric_basis(int d, int first) {
    std::vector<std::pair<int, Matrix>> basis;
    basis.reserve(sym_count(d));
    int k = first;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            Matrix E = Matrix::Zero(d, d);
            E(i, j) = 1.0;
            E(j, i) = 1.0;
            basis.emplace_back(k++, std::move(E));
        }
    return basis;
}

std::vector<std::pair<int, Matrix>> full_basis(int rows, int cols, int first) {
    std::vector<std::pair<int, Matrix>> basis;
    basis.reserve(rows * cols);
    int k = first;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            Matrix E = Matrix::Zero(rows, cols);
            E(i, j) = 1.0;
            basis.emplace_back(k++, std::move(E));
        }
    return basis;
}

StructuralMatrices StructuralMatrices::make(int n) {
    StructuralMatrices s;
    s.A0 = Matrix::Zero(2 * n, 2 * n);
    s.A0.block(n, 0, n, n) = Matrix::Identity(n, n);
    s.E0 = Matrix::Zero(2 * n, n);
    s.E0.topRows(n) = 0.5 * Matrix::Identity(n, n);
    s.F0 = Matrix::Zero(2 * n, n);
    s.F0.bottomRows(n) = Matrix::Identity(n, n);
    s.G0 = Matrix::Zero(n, 2 * n);
    s.G0.leftCols(n) = Matrix::Identity(n, n);
    return s;
}

Matrix StructuralMatrices::B0(const Matrix& B) const {
    const int n = static_cast<int>(G0.rows());
    Matrix out = Matrix::Zero(2 * n, B.cols());
    out.topRows(n) = B;
    return out;
}

namespace {

void check_scalars(double alpha, double rho, double gamma) {
    require(alpha > 0.0 && rho > 0.0 && gamma > 0.0,
            "lmi: alpha, rho, gamma must be positive");
}

void check_vertex_dims(const model::VertexMatrices& v, const VariableLayout& L,
                       const char* who) {
    require(v.A.rows() == L.r() && v.C.rows() == L.n() && v.B.cols() == L.m(),
            std::string(who) + ": vertex dimensions do not match the layout");
}

} // namespace

AffineMatrixExpr build_sigma_decay_lmi(const model::VertexMatrices& vertex,
                                       double alpha, double rho, double gamma,
                                       const VariableLayout& layout) {
    check_scalars(alpha, rho, gamma);
    check_vertex_dims(vertex, layout, "build_sigma_decay_lmi");
    const int n = layout.n();
    const auto s = StructuralMatrices::make(n);
    const auto Xb = symmetric_basis(2 * n, layout.x_index(0, 0));
    const auto Yb = full_basis(layout.m(), 2 * n, layout.y_index(0, 0));
    const Matrix I2n = Matrix::Identity(2 * n, 2 * n);
    const Matrix In = Matrix::Identity(n, n);

    // blocks: [x-block 2n | four n-sized multiplier slots]
    ExprBuilder b({2 * n, n, n, n, n}, Sense::NegativeDefinite);
    b.add_matrix_var_sym(0, I2n, Xb, s.A0.transpose()); // A0 X + X A0'
    b.add_matrix_var_sym(0, s.B0(vertex.B), Yb, I2n);   // B0 Y + Y' B0'
    b.add_matrix_var(0, 0, rho * I2n, Xb, I2n);         // rho X
    // structural quadratic weighted by the diagonal multipliers
    b.add_scalar_var(0, 0, layout.mu_index(), s.E0 * s.E0.transpose());
    b.add_scalar_var(0, 0, layout.beta_index(), s.F0 * s.F0.transpose());
    b.add_scalar_var(0, 0, layout.pi_index(), s.G0.transpose() * s.G0);
    b.add_scalar_var(0, 0, layout.kappa_index(), s.G0.transpose() * s.G0);
    // coupling rows against the multiplier slots
    b.add_matrix_var(1, 0, vertex.B, Yb, I2n);
    b.add_matrix_var(2, 0, (1.0 / gamma) * s.G0, Xb, I2n);
    b.add_matrix_var(3, 0, (1.0 / alpha) * vertex.D * s.G0, Xb, I2n);
    b.add_scalar_var(1, 1, layout.mu_index(), -In);
    b.add_scalar_var(2, 2, layout.beta_index(), -In);
    b.add_scalar_var(3, 3, layout.pi_index(), -In);
    b.add_scalar_var(4, 4, layout.kappa_index(), -In);
    return b.take();
}

AffineMatrixExpr build_sigma_decay_lmi(const model::PolytopicPlant& plant,
                                       int vertex, double alpha, double rho,
                                       double gamma,
                                       const VariableLayout& layout) {
    return build_sigma_decay_lmi(plant.vertices.at(vertex), alpha, rho, gamma,
                                 layout);
}

AffineMatrixExpr build_zeta_decay_lmi(const model::VertexMatrices& vertex,
                                      double alpha, double rho,
                                      const Matrix& H, const Matrix& J,
                                      const VariableLayout& layout) {
    check_scalars(alpha, rho, 1.0);
    check_vertex_dims(vertex, layout, "build_zeta_decay_lmi");
    require(H.rows() == J.rows(), "build_zeta_decay_lmi: H and J row counts differ");
    require(H.cols() == layout.r() && J.cols() == layout.m(),
            "build_zeta_decay_lmi: cost weight dimensions");
    const int r = layout.r(), n = layout.n();
    const int q = static_cast<int>(H.rows());
    const auto s = StructuralMatrices::make(n);
    const auto Qb = symmetric_basis(r, layout.q_index(0, 0));
    const auto Xb = symmetric_basis(2 * n, layout.x_index(0, 0));
    const auto Wb = full_basis(layout.m(), r, layout.w_index(0, 0));
    const Matrix Ir = Matrix::Identity(r, r);
    const Matrix I2n = Matrix::Identity(2 * n, 2 * n);

    ExprBuilder b({r, 2 * n, q}, Sense::NegativeDefinite);
    b.add_matrix_var_sym(0, vertex.A, Qb, Ir); // A Q + Q A'
    b.add_matrix_var(0, 0, rho * Ir, Qb, Ir);
    b.add_matrix_var(1, 0, (1.0 / alpha) * I2n, Xb,
                     s.G0.transpose() * vertex.E.transpose());
    b.add_matrix_var(1, 1, -rho * I2n, Xb, I2n);
    b.add_matrix_var(2, 0, H, Qb, Ir);
    b.add_matrix_var(2, 0, J, Wb, Ir);
    b.add_const(2, 2, -Matrix::Identity(q, q));
    return b.take();
}

AffineMatrixExpr build_zeta_decay_lmi(const model::PolytopicPlant& plant,
                                      int vertex, double alpha, double rho,
                                      const Matrix& H, const Matrix& J,
                                      const VariableLayout& layout) {
    return build_zeta_decay_lmi(plant.vertices.at(vertex), alpha, rho, H, J,
                                layout);
}

AffineMatrixExpr build_coupling_lmi(const model::VertexMatrices& vertex,
                                    double alpha, double rho, const Matrix& H,
                                    const Matrix& J,
                                    const VariableLayout& layout) {
    check_scalars(alpha, rho, 1.0);
    check_vertex_dims(vertex, layout, "build_coupling_lmi");
    require(H.rows() == J.rows(), "build_coupling_lmi: H and J row counts differ");
    const int r = layout.r(), n = layout.n();
    const int q = static_cast<int>(H.rows());
    const auto Qb = symmetric_basis(r, layout.q_index(0, 0));
    const auto Wb = full_basis(layout.m(), r, layout.w_index(0, 0));
    const Matrix Ir = Matrix::Identity(r, r);

    ExprBuilder b({r, n, q}, Sense::PositiveDefinite);
    b.add_matrix_var(0, 0, rho * Ir, Qb, Ir);
    b.add_matrix_var(1, 0, vertex.C, Qb, Ir);
    b.add_matrix_var(1, 0, vertex.B, Wb, Ir);
    b.add_scalar_var(1, 1, layout.kappa_index(), Matrix::Identity(n, n));
    b.add_matrix_var(2, 0, H, Qb, Ir);
    b.add_matrix_var(2, 0, J, Wb, Ir);
    b.add_const(2, 2, alpha * Matrix::Identity(q, q));
    return b.take();
}

AffineMatrixExpr build_coupling_lmi(const model::PolytopicPlant& plant,
                                    int vertex, double alpha, double rho,
                                    const Matrix& H, const Matrix& J,
                                    const VariableLayout& layout) {
    return build_coupling_lmi(plant.vertices.at(vertex), alpha, rho, H, J,
                              layout);
}

std::pair<AffineMatrixExpr, AffineMatrixExpr>
build_initial_bound_lmis(const Vector& zeta0, const Vector& x0_scaled,
                         const VariableLayout& layout) {
    require(zeta0.size() == layout.r(),
            "build_initial_bound_lmis: zeta0 must have length r");
    require(x0_scaled.size() == 2 * layout.n(),
            "build_initial_bound_lmis: scaled state must have length 2n");
    const int r = layout.r(), n = layout.n();
    const auto Qb = symmetric_basis(r, layout.q_index(0, 0));
    const auto Xb = symmetric_basis(2 * n, layout.x_index(0, 0));

    ExprBuilder a({1, r}, Sense::PositiveDefinite);
    a.add_scalar_var(0, 0, layout.theta_index(), Matrix::Identity(1, 1));
    a.add_const(1, 0, zeta0);
    a.add_matrix_var(1, 1, Matrix::Identity(r, r), Qb, Matrix::Identity(r, r));

    ExprBuilder bb({1, 2 * n}, Sense::PositiveDefinite);
    bb.add_scalar_var(0, 0, layout.theta_index(), Matrix::Identity(1, 1));
    bb.add_const(1, 0, x0_scaled);
    bb.add_matrix_var(1, 1, Matrix::Identity(2 * n, 2 * n), Xb,
                      Matrix::Identity(2 * n, 2 * n));
    return {a.take(), bb.take()};
}

AffineMatrixExpr build_gain_bound_lmi(double omega,
                                      const VariableLayout& layout) {
    require(omega > 0.0, "build_gain_bound_lmi: omega must be positive");
    const int n = layout.n(), m = layout.m();
    const auto Xb = symmetric_basis(2 * n, layout.x_index(0, 0));
    const auto Yb = full_basis(m, 2 * n, layout.y_index(0, 0));

    ExprBuilder b({m, 2 * n}, Sense::PositiveDefinite);
    b.add_const(0, 0, omega * Matrix::Identity(m, m));
    b.add_matrix_var(0, 1, Matrix::Identity(m, m), Yb,
                     Matrix::Identity(2 * n, 2 * n));
    b.add_matrix_var(1, 1, Matrix::Identity(2 * n, 2 * n), Xb,
                     Matrix::Identity(2 * n, 2 * n));
    return b.take();
}

std::string dump_expr(const AffineMatrixExpr& expr) {
    std::ostringstream os;
    os << "affine expr " << expr.size << "x" << expr.size << " sense "
       << (expr.sense == Sense::NegativeDefinite ? "ND" : "PD") << "\n";
    os << "  const |.|_F = " << expr.const_term.norm() << "\n";
    for (const auto& [j, M] : expr.coeff_terms) {
        int nnz = 0;
        for (int a = 0; a < M.rows(); ++a)
            for (int c = 0; c < M.cols(); ++c)
                if (M(a, c) != 0.0) ++nnz;
        os << "  var " << j << ": nnz " << nnz << " |.|_F = " << M.norm()
           << "\n";
    }
    return os.str();
}

} // namespace mgsta::lmi
