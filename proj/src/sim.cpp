#include "mgsta/sim.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mgsta/scaling.hpp"

namespace mgsta::sim {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

SineDisturbance::SineDisturbance(Vector amplitude, Vector frequency)
    : amp_(std::move(amplitude)), freq_(std::move(frequency)) {
    require(amp_.size() == freq_.size(),
            "SineDisturbance: amplitude and frequency lengths differ");
    declared_bound = amp_.cwiseProduct(freq_).norm();
}

Vector SineDisturbance::f(double t, const Vector&) const {
    Vector out(amp_.size());
    for (int i = 0; i < out.size(); ++i)
        out[i] = amp_[i] * std::sin(freq_[i] * t);
    return out;
}

Vector SineDisturbance::f_dot(double t, const Vector&) const {
    Vector out(amp_.size());
    for (int i = 0; i < out.size(); ++i)
        out[i] = amp_[i] * freq_[i] * std::cos(freq_[i] * t);
    return out;
}

Vector control_law(const Vector& zeta, const Vector& sigma, const Vector& eta,
                   const Matrix& K0, const Matrix& K1, const Matrix& K2,
                   double alpha, double sigma_reg) {
    const double c = c_sigma(sigma.norm(), alpha, sigma_reg);
    return K0 * zeta + c * (K1 * sigma) + K2 * eta;
}

Vector rhs(const Vector& state, double t, const model::VertexMatrices& plant,
           const Gains& gains, const DisturbanceSpec& disturbance,
           double sigma_reg) {
    const int r = static_cast<int>(plant.A.rows());
    const int n = static_cast<int>(plant.C.rows());
    const int na = disturbance.aug_dim();
    require(state.size() == r + 2 * n + na, "rhs: state length mismatch");

    const auto zeta = state.segment(0, r);
    const auto sigma = state.segment(r, n);
    const auto eta = state.segment(r + n, n);
    const auto aug = state.segment(r + 2 * n, na);

    const double c = c_sigma(sigma.norm(), gains.alpha, sigma_reg);
    const Vector u = gains.K0 * zeta + c * (gains.K1 * sigma) + gains.K2 * eta;

    Vector deriv(state.size());
    deriv.segment(0, r) = plant.A * zeta + plant.E * sigma;
    deriv.segment(r, n) = plant.C * zeta + plant.D * sigma + plant.B * u +
                          disturbance.f(t, aug);
    deriv.segment(r + n, n) = (c * c) * sigma;
    if (na > 0) deriv.segment(r + 2 * n, na) = disturbance.aug_rhs(t, aug);
    if (!deriv.allFinite()) {
        std::ostringstream os;
        os << "rhs: non-finite derivative at t = " << t;
        throw std::runtime_error(os.str());
    }
    return deriv;
}

TrajectoryRecord simulate(const model::VertexMatrices& plant,
                          const Gains& gains,
                          const DisturbanceSpec& disturbance,
                          const SimConfig& config, const InitialState& init,
                          const Matrix& H, const Matrix& J,
                          const analysis::Certificates* certs) {
    require(config.dt > 0.0 && config.horizon > config.dt,
            "simulate: dt and horizon are inconsistent");
    require(config.sigma_reg > 0.0, "simulate: sigma_reg must be positive");
    require(config.record_stride >= 1, "simulate: record_stride must be >= 1");

    const int r = static_cast<int>(plant.A.rows());
    const int n = static_cast<int>(plant.C.rows());
    const int na = disturbance.aug_dim();
    const int q = static_cast<int>(H.rows());
    require(init.zeta0.size() == r && init.sigma0.size() == n &&
                init.eta0.size() == n,
            "simulate: initial state dimensions");
    require(q == 0 || H.cols() == r, "simulate: H must have r columns");
    require(J.rows() == q, "simulate: H and J row counts differ");

    const Matrix HJK = q > 0 ? Matrix(H + J * gains.K0) : Matrix(0, r);

    // (B K2)^{-1} gives access to the sliding coordinates z and zbar
    Matrix BK2inv;
    bool has_z = false;
    if (gains.K2.size() > 0) {
        const Matrix BK2 = plant.B * gains.K2;
        Eigen::FullPivLU<Matrix> lu(BK2);
        if (lu.isInvertible()) {
            BK2inv = lu.inverse();
            has_z = true;
        }
    }
    const Matrix C0 = plant.C + plant.B * gains.K0;

    const int steps = static_cast<int>(std::llround(config.horizon / config.dt));
    TrajectoryRecord rec;
    rec.dt = config.dt;
    rec.sigma_reg = config.sigma_reg;
    rec.has_z = has_z;
    rec.has_lyapunov = certs != nullptr && has_z;

    auto record_sample = [&](double t, const Vector& s, double cost) {
        const Vector zeta = s.segment(0, r);
        const Vector sigma = s.segment(r, n);
        const Vector eta = s.segment(r + n, n);
        const Vector aug = s.segment(r + 2 * n, na);
        const Vector u = control_law(zeta, sigma, eta, gains.K0, gains.K1,
                                     gains.K2, gains.alpha, config.sigma_reg);
        rec.t.push_back(t);
        rec.zeta.push_back(zeta);
        rec.sigma.push_back(sigma);
        rec.eta.push_back(eta);
        rec.u.push_back(u);
        rec.xi.push_back(q > 0 ? Vector(HJK * zeta) : Vector::Zero(0));
        rec.cost_integral.push_back(cost);
        if (has_z) {
            const Vector z = eta + BK2inv * disturbance.f(t, aug);
            rec.z.push_back(z);
            rec.zbar.push_back(z + BK2inv * (C0 * zeta));
            if (rec.has_lyapunov) {
                auto [v, V, nu] =
                    analysis::lyapunov_nu(zeta, sigma, z, certs->S, certs->P,
                                          gains.alpha, config.sigma_reg);
                rec.v.push_back(v);
                rec.V.push_back(V);
                rec.nu.push_back(nu);
            }
        }
    };

    // running extrema, evaluated at full resolution
    auto track = [&](double t, const Vector& s) {
        const Vector zeta = s.segment(0, r);
        const Vector sigma = s.segment(r, n);
        const Vector eta = s.segment(r + n, n);
        const Vector aug = s.segment(r + 2 * n, na);
        const Vector u = control_law(zeta, sigma, eta, gains.K0, gains.K1,
                                     gains.K2, gains.alpha, config.sigma_reg);
        rec.max_u_norm = std::max(rec.max_u_norm, u.norm());
        rec.max_fdot = std::max(rec.max_fdot, disturbance.f_dot(t, aug).norm());
        if (has_z) {
            const double c = c_sigma(sigma.norm(), gains.alpha, config.sigma_reg);
            const Vector z = eta + BK2inv * disturbance.f(t, aug);
            const Vector u_st = c * (gains.K1 * sigma) + gains.K2 * z;
            rec.max_u_st_sq = std::max(rec.max_u_st_sq, u_st.squaredNorm());
        }
        return u;
    };

    Vector state(r + 2 * n + na);
    state.segment(0, r) = init.zeta0;
    state.segment(r, n) = init.sigma0;
    state.segment(r + n, n) = init.eta0;
    if (na > 0) state.segment(r + 2 * n, na) = disturbance.aug_initial();

    double cost = 0.0;
    double prev_xi_sq =
        q > 0 ? (HJK * init.zeta0).squaredNorm() : 0.0;
    rec.u0_norm = track(0.0, state).norm();
    record_sample(0.0, state, 0.0);

    const double dt = config.dt;
    for (int step = 1; step <= steps; ++step) {
        const double t = (step - 1) * dt;
        const Vector k1 = rhs(state, t, plant, gains, disturbance, config.sigma_reg);
        const Vector k2 = rhs(state + 0.5 * dt * k1, t + 0.5 * dt, plant, gains,
                              disturbance, config.sigma_reg);
        const Vector k3 = rhs(state + 0.5 * dt * k2, t + 0.5 * dt, plant, gains,
                              disturbance, config.sigma_reg);
        const Vector k4 =
            rhs(state + dt * k3, t + dt, plant, gains, disturbance, config.sigma_reg);
        const Vector next = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (!next.allFinite()) {
            std::ostringstream os;
            os << "simulate: non-finite state at t = " << t + dt;
            throw std::runtime_error(os.str());
        }
        if (next.norm() > 1e6 * (1.0 + state.norm())) {
            std::ostringstream os;
            os << "simulate: state norm exploded at t = " << t + dt;
            throw std::runtime_error(os.str());
        }
        state = next;

        const double xi_sq =
            q > 0 ? (HJK * state.segment(0, r)).squaredNorm() : 0.0;
        cost += 0.5 * dt * (prev_xi_sq + xi_sq);
        prev_xi_sq = xi_sq;

        track(step * dt, state);
        if (step % config.record_stride == 0 || step == steps)
            record_sample(step * dt, state, cost);
    }
    rec.final_cost = cost;
    rec.fdot_compliant =
        rec.max_fdot <= disturbance.declared_bound * (1.0 + 1e-9);
    rec.t_s = detect_sliding(rec, 1e-3, 1e-2);
    return rec;
}

std::optional<double> detect_sliding(const TrajectoryRecord& record,
                                     double tol_sigma, double tol_zbar) {
    if (!record.has_z || record.t.empty()) return std::nullopt;
    int first_ok = -1;
    for (int i = static_cast<int>(record.t.size()) - 1; i >= 0; --i) {
        if (record.sigma[i].norm() <= tol_sigma &&
            record.zbar[i].norm() <= tol_zbar) {
            first_ok = i;
        } else {
            break;
        }
    }
    if (first_ok < 0) return std::nullopt;
    return record.t[first_ok];
}

CostCheck check_cost_bound(const TrajectoryRecord& record, double theta,
                           double omega) {
    CostCheck out;
    out.integral = record.final_cost;
    out.ratio = theta > 0.0 ? out.integral / theta : 0.0;
    out.within_theta = out.integral <= theta;
    out.max_u_st_sq = record.max_u_st_sq;
    out.within_gain_bound = record.max_u_st_sq <= omega * theta;
    return out;
}

} // namespace mgsta::sim
