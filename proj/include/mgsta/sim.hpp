#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "mgsta/analysis.hpp"
#include "mgsta/model.hpp"
#include "mgsta/types.hpp"

namespace mgsta::sim {

struct SimConfig {
    double dt = 1e-4;
    double horizon = 1.0;
    double sigma_reg = 1e-12; // floor on ||sigma|| inside c(sigma)
    int record_stride = 10;   // output decimation
};

/// Disturbance source. f(t) may depend on auxiliary states (reference
/// models, desired trajectories) integrated alongside the plant; a pure
/// time function leaves aug_dim at zero.
class DisturbanceSpec {
  public:
    virtual ~DisturbanceSpec() = default;

    virtual int aug_dim() const { return 0; }
    virtual Vector aug_initial() const { return Vector::Zero(0); }
    virtual Vector aug_rhs(double /*t*/, const Vector& /*aug*/) const {
        return Vector::Zero(0);
    }
    virtual Vector f(double t, const Vector& aug) const = 0;
    virtual Vector f_dot(double t, const Vector& aug) const = 0;

    /// Declared bound on ||f_dot||; simulate() tracks the sampled maximum
    /// against it.
    double declared_bound = std::numeric_limits<double>::infinity();
};

/// f identically zero.
class ZeroDisturbance final : public DisturbanceSpec {
  public:
    explicit ZeroDisturbance(int n) : n_(n) { declared_bound = 0.0; }
    Vector f(double, const Vector&) const override { return Vector::Zero(n_); }
    Vector f_dot(double, const Vector&) const override {
        return Vector::Zero(n_);
    }

  private:
    int n_;
};

/// Per-channel sinusoids f_i(t) = amplitude_i * sin(frequency_i * t).
class SineDisturbance final : public DisturbanceSpec {
  public:
    SineDisturbance(Vector amplitude, Vector frequency);
    Vector f(double t, const Vector&) const override;
    Vector f_dot(double t, const Vector&) const override;

  private:
    Vector amp_, freq_;
};

struct Gains {
    Matrix K0; // m x r
    Matrix K1; // m x n
    Matrix K2; // m x n
    double alpha = 0.0;
};

struct InitialState {
    Vector zeta0, sigma0, eta0;
};

/// u = K0 zeta + c(sigma) K1 sigma + K2 eta with the regularized c.
Vector control_law(const Vector& zeta, const Vector& sigma, const Vector& eta,
                   const Matrix& K0, const Matrix& K1, const Matrix& K2,
                   double alpha, double sigma_reg);

/// Closed-loop vector field at state = [zeta; sigma; eta; aug].
Vector rhs(const Vector& state, double t, const model::VertexMatrices& plant,
           const Gains& gains, const DisturbanceSpec& disturbance,
           double sigma_reg);

/// Time-sampled closed-loop run. Samples are decimated by record_stride;
/// the cost integral and the extrema are accumulated at full resolution.
struct TrajectoryRecord {
    std::vector<double> t;
    std::vector<Vector> zeta, sigma, eta, u, xi;
    std::vector<Vector> z, zbar;          // empty when B K2 is singular
    std::vector<double> v, V, nu;         // empty without certificates
    std::vector<double> cost_integral;    // running integral of xi'xi
    double final_cost = 0.0;
    double max_u_norm = 0.0;
    double u0_norm = 0.0;                 // ||u(0)||
    double max_u_st_sq = 0.0;             // max ||c K1 sigma + K2 z||^2
    double max_fdot = 0.0;                // sampled max ||f_dot||
    bool fdot_compliant = true;           // max_fdot <= declared bound
    bool has_z = false;
    bool has_lyapunov = false;
    std::optional<double> t_s;            // sliding entry estimate
    double dt = 0.0;
    double sigma_reg = 0.0;
};

/// Fixed-step fourth-order Runge-Kutta integration of the closed loop.
/// H and J define the cost output xi = (H + J K0) zeta; pass certificates
/// to record the Lyapunov traces. Throws std::runtime_error on non-finite
/// states or a per-step norm explosion.
TrajectoryRecord simulate(const model::VertexMatrices& plant,
                          const Gains& gains,
                          const DisturbanceSpec& disturbance,
                          const SimConfig& config, const InitialState& init,
                          const Matrix& H, const Matrix& J,
                          const analysis::Certificates* certs = nullptr);

/// Earliest sample time after which both ||sigma|| <= tol_sigma and
/// ||zbar|| <= tol_zbar hold through the end of the record.
std::optional<double> detect_sliding(const TrajectoryRecord& record,
                                     double tol_sigma, double tol_zbar);

struct CostCheck {
    double integral = 0.0;
    double ratio = 0.0;          // integral / theta
    bool within_theta = false;   // integral <= theta
    double max_u_st_sq = 0.0;
    bool within_gain_bound = false; // max ||u_st||^2 <= omega * theta
};

/// Checks the certified cost bound and the control-magnitude bound
/// against a recorded trajectory.
CostCheck check_cost_bound(const TrajectoryRecord& record, double theta,
                           double omega);

} // namespace mgsta::sim
