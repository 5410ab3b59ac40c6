#include "mgsta/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mgsta::sdp {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalTrouble: return "numerical_trouble";
    }
    return "unknown";
}

ConicProblem translate(std::span<const lmi::AffineMatrixExpr> exprs,
                       int objective_index, const TranslateOptions& options) {
    ConicProblem problem;
    int max_index = objective_index;

    for (const auto& expr : exprs) {
        if (expr.max_asymmetry() > 1e-12)
            throw std::invalid_argument("translate: expression data is not symmetric");
        double scale = expr.const_term.norm();
        for (const auto& [j, M] : expr.coeff_terms) {
            scale = std::max(scale, M.norm());
            max_index = std::max(max_index, j);
        }
        const double margin = options.margin_coeff * (1.0 + scale);
        const double sign =
            expr.sense == lmi::Sense::NegativeDefinite ? -1.0 : 1.0;

        PsdBlock block;
        block.F0 = sign * expr.const_term -
                   margin * Matrix::Identity(expr.size, expr.size);
        block.coeffs.reserve(expr.coeff_terms.size());
        for (const auto& [j, M] : expr.coeff_terms)
            block.coeffs.emplace_back(j, sign * M);
        problem.blocks.push_back(std::move(block));
    }

    if (options.layout != nullptr) {
        const auto& L = *options.layout;
        if (L.count() <= objective_index)
            throw std::invalid_argument("translate: objective index outside the layout");
        max_index = std::max(max_index, L.count() - 1);
        // floors keep Q, X and the multiplier scalars away from singularity;
        // expressed in the block-normalized scale of the floor itself
        const double eps = options.floor_coeff * 2.0;
        {
            PsdBlock block;
            block.F0 = -eps * Matrix::Identity(L.r(), L.r());
            for (const auto& [j, E] : lmi::symmetric_basis(L.r(), L.q_index(0, 0)))
                block.coeffs.emplace_back(j, E);
            problem.blocks.push_back(std::move(block));
        }
        {
            PsdBlock block;
            block.F0 = -eps * Matrix::Identity(2 * L.n(), 2 * L.n());
            for (const auto& [j, E] :
                 lmi::symmetric_basis(2 * L.n(), L.x_index(0, 0)))
                block.coeffs.emplace_back(j, E);
            problem.blocks.push_back(std::move(block));
        }
        for (int j : {L.mu_index(), L.beta_index(), L.pi_index(), L.kappa_index()}) {
            PsdBlock block;
            block.F0 = Matrix::Constant(1, 1, -eps);
            block.coeffs.emplace_back(j, Matrix::Constant(1, 1, 1.0));
            problem.blocks.push_back(std::move(block));
        }
    }

    problem.var_count = max_index + 1;
    problem.objective = {{objective_index, 1.0}};
    return problem;
}

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct ScaledBlock {
    Mat<Scalar> F0;
    std::vector<std::pair<int, Mat<Scalar>>> terms;
    int dim = 0;
};

// packed symmetric vectorization with sqrt(2)-scaled off-diagonals, so that
// svec(A) . svec(B) = <A, B>
template <typename Scalar>
void svec_into(const Mat<Scalar>& M, Scalar* out) {
    const int d = static_cast<int>(M.rows());
    const Scalar s2 = std::sqrt(Scalar(2));
    int k = 0;
    for (int i = 0; i < d; ++i) {
        out[k++] = M(i, i);
        for (int j = i + 1; j < d; ++j) out[k++] = M(i, j) * s2;
    }
}

template <typename Scalar>
Mat<Scalar> unsvec(const Scalar* in, int d) {
    Mat<Scalar> M(d, d);
    const Scalar inv_s2 = Scalar(1) / std::sqrt(Scalar(2));
    int k = 0;
    for (int i = 0; i < d; ++i) {
        M(i, i) = in[k++];
        for (int j = i + 1; j < d; ++j) {
            const Scalar v = in[k++] * inv_s2;
            M(i, j) = v;
            M(j, i) = v;
        }
    }
    return M;
}

// sup alpha such that diag(sig) + alpha * D stays PSD
template <typename Scalar>
Scalar max_step(const Vec<Scalar>& sig, const Mat<Scalar>& D) {
    const int d = static_cast<int>(sig.size());
    Mat<Scalar> W(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            W(i, j) = D(i, j) / std::sqrt(sig[i] * sig[j]);
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(
        Scalar(0.5) * (W + W.transpose()), Eigen::EigenvaluesOnly);
    const Scalar lam = eig.eigenvalues().minCoeff();
    if (lam >= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return Scalar(-1) / lam;
}

template <typename Scalar>
struct Iterate {
    Vec<Scalar> u;
    Scalar tau, kappa;
    std::vector<Mat<Scalar>> S, Z;
};

struct RawOutcome {
    SolveStatus status = SolveStatus::NumericalTrouble;
    Vector y;
    int iterations = 0;
    double pres = 0.0, dres = 0.0, gap = 0.0;
    std::string message;
};

template <typename Scalar>
RawOutcome solve_impl(const ConicProblem& problem,
                      const SolverSettings& settings) {
    const int p = problem.var_count;
    const int nb = static_cast<int>(problem.blocks.size());

    // block data scaling to unit norm, then per-variable equilibration
    std::vector<ScaledBlock<Scalar>> blocks(nb);
    for (int k = 0; k < nb; ++k) {
        const auto& b = problem.blocks[k];
        double agg = b.F0.norm();
        for (const auto& [j, M] : b.coeffs) agg = std::max(agg, M.norm());
        const double s = agg > 0.0 ? 1.0 / agg : 1.0;
        blocks[k].dim = b.dim();
        blocks[k].F0 = (s * b.F0).template cast<Scalar>();
        for (const auto& [j, M] : b.coeffs) {
            if (j >= p)
                throw std::invalid_argument("solve: variable index outside var_count");
            blocks[k].terms.emplace_back(j, (s * M).template cast<Scalar>());
        }
    }
    Vec<Scalar> d = Vec<Scalar>::Ones(p);
    for (const auto& b : blocks)
        for (const auto& [j, M] : b.terms)
            d[j] = std::max(d[j], Scalar(M.norm()));
    for (auto& b : blocks)
        for (auto& [j, M] : b.terms) M /= d[j];

    Vec<Scalar> c = Vec<Scalar>::Zero(p);
    for (const auto& [j, w] : problem.objective) {
        if (j >= p) throw std::invalid_argument("solve: objective index outside var_count");
        c[j] += Scalar(w);
    }
    c = c.cwiseQuotient(d);
    const Scalar cscale = std::max(Scalar(1), c.cwiseAbs().maxCoeff());
    c /= cscale;

    // variables that appear in no block are frozen at zero
    Vec<Scalar> colnorm = Vec<Scalar>::Zero(p);
    for (const auto& b : blocks)
        for (const auto& [j, M] : b.terms) colnorm[j] += Scalar(M.squaredNorm());
    std::vector<int> active;
    for (int j = 0; j < p; ++j)
        if (colnorm[j] > Scalar(0)) active.push_back(j);
    const int pa = static_cast<int>(active.size());

    int total_dim = 0;
    int pdim = 0;
    std::vector<int> rowoff(nb + 1, 0);
    for (int k = 0; k < nb; ++k) {
        total_dim += blocks[k].dim;
        rowoff[k + 1] = rowoff[k] + blocks[k].dim * (blocks[k].dim + 1) / 2;
    }
    pdim = rowoff[nb];

    Scalar hnorm = Scalar(1);
    {
        Scalar acc = Scalar(0);
        for (const auto& b : blocks) acc += Scalar(b.F0.squaredNorm());
        hnorm += std::sqrt(acc);
    }
    const Scalar cnorm = Scalar(1) + c.cwiseAbs().maxCoeff();

    Iterate<Scalar> it;
    it.u = Vec<Scalar>::Zero(p);
    it.tau = Scalar(1);
    it.kappa = Scalar(1);
    for (const auto& b : blocks) {
        it.S.push_back(Mat<Scalar>::Identity(b.dim, b.dim));
        it.Z.push_back(Mat<Scalar>::Identity(b.dim, b.dim));
    }

    auto adjoint = [&](const std::vector<Mat<Scalar>>& Zs) {
        Vec<Scalar> out = Vec<Scalar>::Zero(p);
        for (int k = 0; k < nb; ++k)
            for (const auto& [j, M] : blocks[k].terms)
                out[j] += (M.array() * Zs[k].array()).sum();
        return out;
    };

    RawOutcome out;
    out.message = "iteration limit reached";
    double best_merit = std::numeric_limits<double>::infinity();
    Vec<Scalar> best_u = it.u;
    Scalar best_tau = Scalar(1);
    const Scalar feas_tol = Scalar(settings.feas_tol);
    const Scalar gap_tol = Scalar(settings.gap_tol);

    // Optimal additionally requires every block of the candidate point to be
    // PSD within feas_tol in the original (unscaled) data units
    auto unscaled_min_eig = [&](const Vec<Scalar>& u, Scalar tau) {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& b : problem.blocks) {
            Matrix M = b.F0;
            for (const auto& [j, C] : b.coeffs)
                M += double(u[j] / tau / d[j]) * C;
            Eigen::SelfAdjointEigenSolver<Matrix> eig(M,
                                                      Eigen::EigenvaluesOnly);
            worst = std::min(worst, eig.eigenvalues().minCoeff());
        }
        return worst;
    };

    for (int iter = 0; iter < settings.max_iterations; ++iter) {
        // residuals of the homogeneous system
        std::vector<Mat<Scalar>> Rx(nb);
        for (int k = 0; k < nb; ++k) {
            Rx[k] = it.S[k] - blocks[k].F0 * it.tau;
            for (const auto& [j, M] : blocks[k].terms) Rx[k] -= it.u[j] * M;
        }
        Vec<Scalar> ry = -adjoint(it.Z) + c * it.tau;
        Scalar hz = Scalar(0);
        for (int k = 0; k < nb; ++k)
            hz += (blocks[k].F0.array() * it.Z[k].array()).sum();
        const Scalar rtau = it.kappa + c.dot(it.u) + hz;

        Scalar sz = Scalar(0);
        for (int k = 0; k < nb; ++k)
            sz += (it.S[k].array() * it.Z[k].array()).sum();
        const Scalar gap = sz + it.tau * it.kappa;
        const Scalar mu = gap / Scalar(total_dim + 1);

        const Scalar pobj = c.dot(it.u) / it.tau;
        const Scalar dobj = -hz / it.tau;
        Scalar rx_norm = Scalar(0);
        for (const auto& R : Rx) rx_norm += R.squaredNorm();
        const Scalar pres = std::sqrt(rx_norm) / it.tau / hnorm;
        const Scalar dres = ry.norm() / it.tau / cnorm;
        const Scalar denom = Scalar(1) + std::abs(pobj) + std::abs(dobj);
        const Scalar szgap = (sz / (it.tau * it.tau)) / denom;
        const Scalar objgap = std::abs(pobj - dobj) / denom;
        const Scalar gapm = std::min(szgap, objgap);

        out.iterations = iter;
        const double merit =
            std::max({double(pres / feas_tol), double(dres / feas_tol),
                      double(gapm / gap_tol)});
        if (merit < best_merit) {
            best_merit = merit;
            best_u = it.u;
            best_tau = it.tau;
            out.pres = double(pres);
            out.dres = double(dres);
            out.gap = double(gapm);
        }

        if (pres <= feas_tol && dres <= feas_tol && gapm <= gap_tol &&
            unscaled_min_eig(it.u, it.tau) >= -double(feas_tol)) {
            out.status = SolveStatus::Optimal;
            out.message.clear();
            best_u = it.u;
            best_tau = it.tau;
            out.pres = double(pres);
            out.dres = double(dres);
            out.gap = double(gapm);
            break;
        }

        // certificates live in the tau -> 0 corner
        if (it.kappa / it.tau > Scalar(1e7) || it.tau < Scalar(1e-10)) {
            const Vec<Scalar> az = adjoint(it.Z);
            if (hz < Scalar(0) && az.norm() / (-hz) <= Scalar(1e-6)) {
                out.status = SolveStatus::Infeasible;
                out.message = "primal infeasibility certificate";
                break;
            }
            Scalar ray = Scalar(0);
            for (int k = 0; k < nb; ++k) {
                Mat<Scalar> Gu = it.S[k];
                for (const auto& [j, M] : blocks[k].terms) Gu -= it.u[j] * M;
                ray += Gu.squaredNorm();
            }
            if (c.dot(it.u) < Scalar(0) &&
                std::sqrt(ray) / (-c.dot(it.u)) <= Scalar(1e-6)) {
                out.status = SolveStatus::NumericalTrouble;
                out.message = "objective appears unbounded below";
                break;
            }
            out.status = SolveStatus::NumericalTrouble;
            out.message = "homogeneous variables collapsed";
            break;
        }

        // Nesterov-Todd scaling per block:
        //   chol(S) = Ls, chol(Z) = Lz, svd(Lz' Ls) = U diag(sig) V',
        //   Rinv = diag(sig)^{1/2} V' Ls^{-1}; scaled point is diag(sig)
        std::vector<Mat<Scalar>> Rinv(nb);
        std::vector<Vec<Scalar>> Sig(nb);
        bool scaling_ok = true;
        for (int k = 0; k < nb; ++k) {
            Eigen::LLT<Mat<Scalar>> lltS(it.S[k]);
            Eigen::LLT<Mat<Scalar>> lltZ(it.Z[k]);
            if (lltS.info() != Eigen::Success || lltZ.info() != Eigen::Success) {
                scaling_ok = false;
                break;
            }
            Mat<Scalar> Ls = lltS.matrixL();
            Mat<Scalar> Lz = lltZ.matrixL();
            Eigen::JacobiSVD<Mat<Scalar>> svd(Lz.transpose() * Ls,
                                              Eigen::ComputeFullU |
                                                  Eigen::ComputeFullV);
            Sig[k] = svd.singularValues();
            if (Sig[k].minCoeff() <= Scalar(0)) {
                scaling_ok = false;
                break;
            }
            Mat<Scalar> LsInv =
                Ls.template triangularView<Eigen::Lower>().solve(
                    Mat<Scalar>::Identity(blocks[k].dim, blocks[k].dim));
            Rinv[k] = Sig[k].cwiseSqrt().asDiagonal() *
                      svd.matrixV().transpose() * LsInv;
        }
        if (!scaling_ok) {
            out.status = SolveStatus::NumericalTrouble;
            out.message = "scaling breakdown (iterate left the cone)";
            break;
        }

        // scaled data, packed columns; QR of the tall matrix
        Mat<Scalar> Gt = Mat<Scalar>::Zero(pdim, pa);
        Vec<Scalar> f0col(pdim);
        std::vector<Mat<Scalar>> Rxt(nb);
        std::vector<int> col_of(p, -1);
        for (int a = 0; a < pa; ++a) col_of[active[a]] = a;
        for (int k = 0; k < nb; ++k) {
            for (const auto& [j, M] : blocks[k].terms) {
                Mat<Scalar> Fs = Rinv[k] * M * Rinv[k].transpose();
                svec_into<Scalar>(Fs, Gt.col(col_of[j]).data() + rowoff[k]);
            }
            Mat<Scalar> F0s = Rinv[k] * blocks[k].F0 * Rinv[k].transpose();
            svec_into<Scalar>(F0s, f0col.data() + rowoff[k]);
            Rxt[k] = Rinv[k] * Rx[k] * Rinv[k].transpose();
        }

        Eigen::ColPivHouseholderQR<Mat<Scalar>> qr(Gt);
        Mat<Scalar> Rfac = qr.matrixR()
                               .topLeftCorner(pa, pa)
                               .template triangularView<Eigen::Upper>();
        // rank guard: clamp negligible diagonal entries
        {
            const Scalar dmax = Rfac.diagonal().cwiseAbs().maxCoeff();
            const Scalar clamp =
                std::max(dmax, Scalar(1)) *
                Scalar(std::numeric_limits<Scalar>::epsilon()) * Scalar(1e3);
            for (int i = 0; i < pa; ++i)
                if (std::abs(Rfac(i, i)) < clamp)
                    Rfac(i, i) = Rfac(i, i) < Scalar(0) ? -clamp : clamp;
        }
        const auto perm = qr.colsPermutation();

        // solve (Gt' Gt) x = Gt' t + w through the R factor
        auto lsq_solve = [&](const Vec<Scalar>& t, const Vec<Scalar>& w) {
            Vec<Scalar> qt = (qr.householderQ().adjoint() * t).head(pa);
            Vec<Scalar> pw = perm.transpose() * w;
            qt += Rfac.template triangularView<Eigen::Upper>()
                      .transpose()
                      .solve(pw);
            Vec<Scalar> x =
                Rfac.template triangularView<Eigen::Upper>().solve(qt);
            return Vec<Scalar>(perm * x);
        };

        Vec<Scalar> ca(pa), ga(pa);
        Vec<Scalar> g_full = Gt.transpose() * f0col;
        for (int a = 0; a < pa; ++a) ca[a] = c[active[a]];
        ga = g_full;
        const Scalar hM = f0col.squaredNorm();
        const Vec<Scalar> u2 = lsq_solve(-f0col, -ca);
        const Scalar den = (ga - ca).dot(u2) + hM + it.kappa / it.tau;

        struct Direction {
            Vec<Scalar> du; // over active columns
            Scalar dtau, dkappa;
            std::vector<Mat<Scalar>> dS, DS, DZ;
        };

        // Newton step for the linearized homogeneous system with scaled
        // complementarity targets NtDir (per block) and dkt (tau*kappa row)
        auto direction_raw = [&](const std::vector<Mat<Scalar>>& NtDir,
                                 Scalar dkt, const Vec<Scalar>& rxt_vec,
                                 const std::vector<Mat<Scalar>>* RxT,
                                 const Vec<Scalar>& ryT,
                                 Scalar rtauT) -> Direction {
            Vec<Scalar> tvec(pdim);
            for (int k = 0; k < nb; ++k)
                svec_into<Scalar>(NtDir[k], tvec.data() + rowoff[k]);
            tvec += rxt_vec;
            Vec<Scalar> ryTa(pa);
            for (int a = 0; a < pa; ++a) ryTa[a] = ryT[active[a]];
            const Vec<Scalar> u1 = lsq_solve(tvec, -ryTa);
            const Scalar q0 = f0col.dot(tvec);
            const Scalar num =
                (ca - ga).dot(u1) + rtauT + q0 + dkt / it.tau;
            Direction dir;
            dir.dtau = num / den;
            dir.du = u1 + dir.dtau * u2;
            dir.dkappa = (dkt - it.kappa * dir.dtau) / it.tau;
            dir.dS.resize(nb);
            dir.DS.resize(nb);
            dir.DZ.resize(nb);
            // scaled DS via the packed columns, original dS via raw data
            Vec<Scalar> ds_vec = Gt * dir.du + dir.dtau * f0col - rxt_vec;
            for (int k = 0; k < nb; ++k) {
                dir.DS[k] = unsvec<Scalar>(ds_vec.data() + rowoff[k],
                                           blocks[k].dim);
                Mat<Scalar> dSk = blocks[k].F0 * dir.dtau;
                if (RxT != nullptr) dSk -= (*RxT)[k];
                for (const auto& [j, M] : blocks[k].terms)
                    dSk += dir.du[col_of[j]] * M;
                dir.dS[k] = std::move(dSk);
                Mat<Scalar> DZk = NtDir[k] - dir.DS[k];
                dir.DZ[k] = Scalar(0.5) * (DZk + DZk.transpose());
            }
            return dir;
        };

        Vec<Scalar> rxt_full(pdim);
        for (int k = 0; k < nb; ++k)
            svec_into<Scalar>(Rxt[k], rxt_full.data() + rowoff[k]);

        auto direction = [&](const std::vector<Mat<Scalar>>& NtDir,
                             Scalar dkt) -> Direction {
            Direction dir =
                direction_raw(NtDir, dkt, rxt_full, &Rx, ry, rtau);
            // two defect-correction passes recover the accuracy the
            // reduced solve loses on ill-conditioned late iterations
            for (int pass = 0; pass < 2; ++pass) {
                std::vector<Mat<Scalar>> dZ(nb);
                for (int k = 0; k < nb; ++k)
                    dZ[k] = Rinv[k].transpose() * dir.DZ[k] * Rinv[k];
                Vec<Scalar> defect_y = ry - adjoint(dZ) + c * dir.dtau;
                Scalar hdz = Scalar(0);
                for (int k = 0; k < nb; ++k)
                    hdz += (blocks[k].F0.array() * dZ[k].array()).sum();
                Scalar defect_tau = rtau + dir.dkappa + hdz;
                for (int a = 0; a < pa; ++a)
                    defect_tau += ca[a] * dir.du[a];
                if (defect_y.norm() <= Scalar(1e-14) * cnorm &&
                    std::abs(defect_tau) <= Scalar(1e-14))
                    break;
                std::vector<Mat<Scalar>> zeroNt(nb);
                for (int k = 0; k < nb; ++k)
                    zeroNt[k] = Mat<Scalar>::Zero(blocks[k].dim, blocks[k].dim);
                Direction corr =
                    direction_raw(zeroNt, Scalar(0),
                                  Vec<Scalar>::Zero(pdim), nullptr,
                                  defect_y, defect_tau);
                dir.du += corr.du;
                dir.dtau += corr.dtau;
                dir.dkappa += corr.dkappa;
                for (int k = 0; k < nb; ++k) {
                    dir.dS[k] += corr.dS[k];
                    dir.DS[k] += corr.DS[k];
                    dir.DZ[k] += corr.DZ[k];
                }
            }
            return dir;
        };

        auto step_bound = [&](const Direction& dir) {
            Scalar amax = std::numeric_limits<Scalar>::infinity();
            for (int k = 0; k < nb; ++k) {
                amax = std::min(amax, max_step<Scalar>(Sig[k], dir.DS[k]));
                amax = std::min(amax, max_step<Scalar>(Sig[k], dir.DZ[k]));
            }
            if (dir.dtau < Scalar(0)) amax = std::min(amax, -it.tau / dir.dtau);
            if (dir.dkappa < Scalar(0))
                amax = std::min(amax, -it.kappa / dir.dkappa);
            return amax;
        };

        // predictor
        std::vector<Mat<Scalar>> NtAff(nb);
        for (int k = 0; k < nb; ++k) {
            NtAff[k] = Mat<Scalar>::Zero(blocks[k].dim, blocks[k].dim);
            NtAff[k].diagonal() = -Sig[k];
        }
        Direction aff = direction(NtAff, -it.tau * it.kappa);
        const Scalar a_aff = std::min(Scalar(1), step_bound(aff));
        Scalar gap_aff = (it.tau + a_aff * aff.dtau) *
                         (it.kappa + a_aff * aff.dkappa);
        for (int k = 0; k < nb; ++k) {
            Mat<Scalar> Sn = a_aff * aff.DS[k];
            Sn.diagonal() += Sig[k];
            Mat<Scalar> Zn = a_aff * aff.DZ[k];
            Zn.diagonal() += Sig[k];
            gap_aff += (Sn.array() * Zn.array()).sum();
        }
        Scalar sigma = gap_aff / gap;
        sigma = std::clamp(sigma, Scalar(0), Scalar(1));
        sigma = sigma * sigma * sigma;

        // corrector with the second-order term in the scaled space
        std::vector<Mat<Scalar>> NtCor(nb);
        for (int k = 0; k < nb; ++k) {
            const auto& sg = Sig[k];
            Mat<Scalar> Xi = -(aff.DS[k] * aff.DZ[k] + aff.DZ[k] * aff.DS[k]);
            Mat<Scalar> Nt(blocks[k].dim, blocks[k].dim);
            for (int i = 0; i < blocks[k].dim; ++i)
                for (int j = 0; j < blocks[k].dim; ++j)
                    Nt(i, j) = Xi(i, j) / (sg[i] + sg[j]);
            Nt.diagonal() += (sigma * mu * sg.cwiseInverse() - sg);
            NtCor[k] = Scalar(0.5) * (Nt + Nt.transpose());
        }
        const Scalar dkt =
            sigma * mu - it.tau * it.kappa - aff.dtau * aff.dkappa;
        Direction dir = direction(NtCor, dkt);

        const Scalar a = std::min(Scalar(1), Scalar(0.98) * step_bound(dir));
        if (a < Scalar(1e-12)) {
            out.status = SolveStatus::NumericalTrouble;
            out.message = "step length collapsed";
            break;
        }
        for (int a_i = 0; a_i < pa; ++a_i)
            it.u[active[a_i]] += a * dir.du[a_i];
        it.tau += a * dir.dtau;
        it.kappa += a * dir.dkappa;
        for (int k = 0; k < nb; ++k) {
            it.S[k] += a * dir.dS[k];
            it.Z[k] += a * (Rinv[k].transpose() * dir.DZ[k] * Rinv[k]);
        }
    }

    Vec<Scalar> y_scaled = best_u / best_tau;
    out.y = Vector::Zero(p);
    for (int j = 0; j < p; ++j)
        out.y[j] = double(y_scaled[j] / d[j]);
    return out;
}

} // namespace

ConicSolution solve(const ConicProblem& problem,
                    const SolverSettings& settings) {
    if (problem.var_count <= 0)
        throw std::invalid_argument("solve: empty problem");
    RawOutcome raw = settings.extended_precision
                         ? solve_impl<long double>(problem, settings)
                         : solve_impl<double>(problem, settings);

    ConicSolution sol;
    sol.assignment = raw.y;
    sol.status = raw.status;
    sol.iterations = raw.iterations;
    sol.primal_residual = raw.pres;
    sol.dual_residual = raw.dres;
    sol.rel_gap = raw.gap;
    sol.message = raw.message;
    sol.objective_value = 0.0;
    for (const auto& [j, w] : problem.objective)
        sol.objective_value += w * raw.y[j];
    sol.block_min_eig.reserve(problem.blocks.size());
    for (const auto& b : problem.blocks) {
        Matrix M = b.F0;
        for (const auto& [j, C] : b.coeffs) M += raw.y[j] * C;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
        sol.block_min_eig.push_back(eig.eigenvalues().minCoeff());
    }
    return sol;
}

std::vector<ExprMargin>
verify_solution(std::span<const lmi::AffineMatrixExpr> exprs,
                const Vector& assignment, double tolerance) {
    std::vector<ExprMargin> out;
    out.reserve(exprs.size());
    int index = 0;
    for (const auto& expr : exprs) {
        Matrix M = lmi::eval_expr(expr, assignment);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
        ExprMargin margin;
        margin.index = index++;
        margin.margin = expr.sense == lmi::Sense::NegativeDefinite
                            ? -eig.eigenvalues().maxCoeff()
                            : eig.eigenvalues().minCoeff();
        margin.pass = margin.margin >= -tolerance;
        out.push_back(margin);
    }
    return out;
}

std::string dump_problem(const ConicProblem& problem) {
    std::ostringstream os;
    os << "conic problem: " << problem.var_count << " variables, "
       << problem.blocks.size() << " psd blocks\n";
    os << "objective:";
    for (const auto& [j, w] : problem.objective) os << " " << j << ":" << w;
    os << "\nblock sizes:";
    for (const auto& b : problem.blocks) os << " " << b.dim();
    os << "\n";
    for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
        const auto& b = problem.blocks[k];
        for (int i = 0; i < b.F0.rows(); ++i)
            for (int j2 = i; j2 < b.F0.cols(); ++j2)
                if (b.F0(i, j2) != 0.0)
                    os << k << " -1 " << i << " " << j2 << " " << b.F0(i, j2)
                       << "\n";
        for (const auto& [var, M] : b.coeffs)
            for (int i = 0; i < M.rows(); ++i)
                for (int j2 = i; j2 < M.cols(); ++j2)
                    if (M(i, j2) != 0.0)
                        os << k << " " << var << " " << i << " " << j2 << " "
                           << M(i, j2) << "\n";
    }
    return os.str();
}

} // namespace mgsta::sdp
