#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mgsta/model.hpp"
#include "mgsta/sim.hpp"
#include "mgsta/synthesis.hpp"

namespace mgsta::trailer {

/// Physical parameters of the three-trailer chain: two actuated trailers
/// coupled through a passive one, with a redundant third actuator. Mass
/// ranges and the health of actuator 1 span the plant polytope.
struct TrailerParams {
    double m1 = 1.0;
    double m2_min = 2.0, m2_max = 3.0;
    double m3_min = 2.0, m3_max = 3.0;
    double k13 = 30.0, k32 = 45.0;
    double b13 = 15.0, b32 = 30.0;
    double F1_min = 0.0, F1_max = 1.0; // health of actuator 1
    double F2 = 1.0, F3 = 1.0;
    double gamma_e1 = 2.0, gamma_e2 = 4.0; // sliding-surface slopes

    void validate() const;
};

struct VertexInfo {
    double F1 = 0.0, m2 = 0.0, m3 = 0.0;
};

/// Eight-vertex polytope from {F1_min, F1_max} x {m2 range} x {m3 range}
/// in tracking-error coordinates (r = 4, n = 2, m = 2).
model::PolytopicPlant build_trailer_polytope(const TrailerParams& p = {});

/// Parameter combination of each vertex, in build order.
std::vector<VertexInfo> vertex_table(const TrailerParams& p = {});

/// Error-coordinate plant matrices for a single parameter combination.
model::VertexMatrices make_vertex(const TrailerParams& p, double F1,
                                  double m2, double m3);

/// Benchmark design data: gamma = 4, omega = 50, (alpha, rho) = (11, 2.1),
/// identity/state cost weights and the benchmark initial condition.
model::DesignConfig default_design(const TrailerParams& p = {});

/// Gain set shipped with the benchmark configuration.
sim::Gains benchmark_gains();

/// Reference trajectory q_d and its first two derivatives, produced by a
/// third-order low-pass model (DC gain one, triple pole) driven by
/// r_d(t) = [0.10 sin(0.5 t); 0.06 sin(t)].
struct ReferenceSignals {
    std::vector<double> t;
    std::vector<Vector> q_d, q_dot_d, q_ddot_d;
};
ReferenceSignals reference_signals(double horizon, double dt);

/// Disturbance of the error system for one vertex: reference model and
/// passive-trailer desired trajectory integrated as auxiliary states, an
/// exogenous force on the actuated trailers, and the resulting f(t) in
/// sigma-dynamics coordinates. f(0) = 0 by construction.
class TrailerDisturbance final : public sim::DisturbanceSpec {
  public:
    TrailerDisturbance(const TrailerParams& p, const VertexInfo& v);

    int aug_dim() const override { return 8; }
    Vector aug_initial() const override;
    Vector aug_rhs(double t, const Vector& aug) const override;
    Vector f(double t, const Vector& aug) const override;
    Vector f_dot(double t, const Vector& aug) const override;

    /// Reference input r_d(t).
    static Vector reference_input(double t);
    /// Exogenous force f_d(t) = [cos t - 1; cos t - 1].
    static Vector exogenous_force(double t);

  private:
    TrailerParams p_;
    VertexInfo v_;
    Matrix A21_, A22_;
};

/// Initial error state of the benchmark: q_a(0) = [0.04, -0.06],
/// q_a'(0) = [-0.03, 0.04], reference and passive states at zero.
sim::InitialState benchmark_initial_state(const TrailerParams& p = {});

struct VertexRunSummary {
    int vertex = 0;
    VertexInfo info;
    std::optional<double> t_s;
    double max_u = 0.0;
    double u0 = 0.0;
    double cost = 0.0;
    double final_tracking_error = 0.0; // ||zeta|| at the horizon
    double max_fdot = 0.0;
    bool fdot_compliant = true;
    bool completed = true; // false when the integration blew up
    std::string note;
};

struct BenchmarkResult {
    std::vector<sim::TrajectoryRecord> records; // one per vertex
    std::vector<VertexRunSummary> summary;
};

/// Runs the closed loop at every vertex (or a single one when `vertex` is
/// set) with the supplied gains. A blown-up run is reported in the summary
/// instead of propagating.
BenchmarkResult run_benchmark(const TrailerParams& p, const sim::Gains& gains,
                              const sim::SimConfig& config,
                              const analysis::Certificates* certs = nullptr,
                              std::optional<int> vertex = std::nullopt,
                              int threads = 0);

} // namespace mgsta::trailer
