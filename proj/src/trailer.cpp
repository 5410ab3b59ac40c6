#include "mgsta/trailer.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace mgsta::trailer {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

void TrailerParams::validate() const {
    require(m1 > 0 && m2_min > 0 && m3_min > 0, "TrailerParams: masses must be positive");
    require(m2_min <= m2_max && m3_min <= m3_max, "TrailerParams: mass ranges inverted");
    require(k13 > 0 && k32 > 0 && b13 > 0 && b32 > 0,
            "TrailerParams: stiffness and damping must be positive");
    require(F1_min >= 0 && F1_max <= 1 && F1_min <= F1_max &&
                F2 >= 0 && F2 <= 1 && F3 >= 0 && F3 <= 1,
            "TrailerParams: fault indices must lie in [0, 1]");
    require(gamma_e1 > 0 && gamma_e2 > 0, "TrailerParams: surface slopes must be positive");
}

model::VertexMatrices make_vertex(const TrailerParams& p, double F1, double m2,
                                  double m3) {
    const double ge1 = p.gamma_e1, ge2 = p.gamma_e2;
    model::VertexMatrices v;
    v.A = Matrix{{-ge1, 0, 0, 0},
                 {0, -ge2, 0, 0},
                 {0, 0, 0, 1},
                 {(p.k13 - ge1 * p.b13) / m3, (p.k32 - ge2 * p.b32) / m3,
                  -(p.k13 + p.k32) / m3, -(p.b13 + p.b32) / m3}};
    v.E = Matrix{{1, 0}, {0, 1}, {0, 0}, {p.b13 / m3, p.b32 / m3}};
    v.D = Matrix{{ge1 - p.b13 / p.m1, 0}, {0, ge2 - p.b32 / m2}};
    v.C = Matrix{{-ge1 * ge1 - p.k13 / p.m1 + ge1 * p.b13 / p.m1, 0,
                  p.k13 / p.m1, p.b13 / p.m1},
                 {0, -ge2 * ge2 - p.k32 / m2 + ge2 * p.b32 / m2, p.k32 / m2,
                  p.b32 / m2}};
    // mixer already applied: B maps the two design inputs onto the
    // redundant actuator set through S_a F S_a'
    v.B = Matrix{{(F1 + p.F2) / p.m1, -p.F2 / p.m1},
                 {-p.F2 / m2, (p.F2 + p.F3) / m2}};
    return v;
}

std::vector<VertexInfo> vertex_table(const TrailerParams& p) {
    std::vector<VertexInfo> table;
    for (double F1 : {p.F1_min, p.F1_max})
        for (double m2 : {p.m2_min, p.m2_max})
            for (double m3 : {p.m3_min, p.m3_max})
                table.push_back({F1, m2, m3});
    return table;
}

model::PolytopicPlant build_trailer_polytope(const TrailerParams& p) {
    p.validate();
    std::vector<model::VertexMatrices> vertices;
    for (const auto& info : vertex_table(p))
        vertices.push_back(make_vertex(p, info.F1, info.m2, info.m3));
    return model::make_polytope(std::move(vertices));
}

sim::InitialState benchmark_initial_state(const TrailerParams& p) {
    sim::InitialState init;
    const Vector qa0{{0.04, -0.06}};
    const Vector qa_dot0{{-0.03, 0.04}};
    // reference and passive-trailer states start at zero, so the tracking
    // errors at t = 0 equal the physical states
    init.zeta0 = Vector::Zero(4);
    init.zeta0.head(2) = qa0;
    Vector e_v = qa_dot0;
    init.sigma0 = Vector(2);
    init.sigma0[0] = p.gamma_e1 * qa0[0] + e_v[0];
    init.sigma0[1] = p.gamma_e2 * qa0[1] + e_v[1];
    init.eta0 = Vector::Zero(2);
    return init;
}

model::DesignConfig default_design(const TrailerParams& p) {
    model::DesignConfig cfg;
    cfg.gamma = 4.0;
    cfg.omega = 50.0;
    cfg.alpha = 11.0;
    cfg.rho = 2.1;
    cfg.H = Matrix::Zero(6, 4);
    cfg.H.topRows(4) = Matrix::Identity(4, 4);
    cfg.J = Matrix::Zero(6, 2);
    cfg.J.bottomRows(2) = Matrix::Identity(2, 2);
    const auto init = benchmark_initial_state(p);
    cfg.zeta0 = init.zeta0;
    cfg.sigma0 = init.sigma0;
    cfg.eta0 = init.eta0;
    return cfg;
}

sim::Gains benchmark_gains() {
    sim::Gains g;
    g.K0 = Matrix{{26.0754, -33.4036, -29.2428, -23.2136},
                  {35.1140, -50.1011, -13.8645, -19.8209}};
    g.K1 = Matrix{{-49.5226, -52.2890}, {-5.8613, -49.4501}};
    g.K2 = Matrix{{-109.3804, -72.3834}, {14.8000, -115.8515}};
    g.alpha = 11.0;
    return g;
}

// --- reference model -------------------------------------------------------
//
// Each output channel follows a third-order low-pass with unit DC gain and
// a triple pole at -5: state (q_d, q_d', q_d''), input r_d.

namespace {

constexpr double kPole = 5.0;

inline void chain_rhs(const double* x, double rdrive, double* dx) {
    dx[0] = x[1];
    dx[1] = x[2];
    dx[2] = -kPole * kPole * kPole * x[0] - 3.0 * kPole * kPole * x[1] -
            3.0 * kPole * x[2] + kPole * kPole * kPole * rdrive;
}

} // namespace

Vector TrailerDisturbance::reference_input(double t) {
    return Vector{{0.10 * std::sin(0.5 * t), 0.06 * std::sin(t)}};
}

Vector TrailerDisturbance::exogenous_force(double t) {
    const double v = std::cos(t) - 1.0;
    return Vector{{v, v}};
}

ReferenceSignals reference_signals(double horizon, double dt) {
    require(dt > 0 && horizon > 0, "reference_signals: bad grid");
    const int steps = static_cast<int>(std::llround(horizon / dt));
    ReferenceSignals out;
    out.t.reserve(steps + 1);
    out.q_d.reserve(steps + 1);
    out.q_dot_d.reserve(steps + 1);
    out.q_ddot_d.reserve(steps + 1);

    Vector x = Vector::Zero(6); // two channels, three states each
    auto deriv = [](double t, const Vector& s) {
        const Vector r = TrailerDisturbance::reference_input(t);
        Vector dx(6);
        chain_rhs(s.data(), r[0], dx.data());
        chain_rhs(s.data() + 3, r[1], dx.data() + 3);
        return dx;
    };
    auto push = [&](double t, const Vector& s) {
        out.t.push_back(t);
        out.q_d.push_back(Vector{{s[0], s[3]}});
        out.q_dot_d.push_back(Vector{{s[1], s[4]}});
        out.q_ddot_d.push_back(Vector{{s[2], s[5]}});
    };
    push(0.0, x);
    for (int i = 1; i <= steps; ++i) {
        const double t = (i - 1) * dt;
        const Vector k1 = deriv(t, x);
        const Vector k2 = deriv(t + dt / 2, x + dt / 2 * k1);
        const Vector k3 = deriv(t + dt / 2, x + dt / 2 * k2);
        const Vector k4 = deriv(t + dt, x + dt * k3);
        x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        push(i * dt, x);
    }
    return out;
}

TrailerDisturbance::TrailerDisturbance(const TrailerParams& p,
                                       const VertexInfo& v)
    : p_(p), v_(v) {
    A21_ = Matrix{{-p.k13 / p.m1, 0, p.k13 / p.m1, p.b13 / p.m1},
                  {0, -p.k32 / v.m2, p.k32 / v.m2, p.b32 / v.m2}};
    A22_ = Matrix{{-p.b13 / p.m1, 0}, {0, -p.b32 / v.m2}};
    declared_bound = 6.0;
}

Vector TrailerDisturbance::aug_initial() const { return Vector::Zero(8); }

Vector TrailerDisturbance::aug_rhs(double t, const Vector& aug) const {
    // aug = [channel 1 chain (3), channel 2 chain (3), q_pd, q_pd']
    const Vector r = reference_input(t);
    Vector dx(8);
    chain_rhs(aug.data(), r[0], dx.data());
    chain_rhs(aug.data() + 3, r[1], dx.data() + 3);
    const double m3 = v_.m3;
    dx[6] = aug[7];
    dx[7] = -(p_.k13 + p_.k32) / m3 * aug[6] - (p_.b13 + p_.b32) / m3 * aug[7] +
            (p_.k13 / m3) * aug[0] + (p_.k32 / m3) * aug[3] +
            (p_.b13 / m3) * aug[1] + (p_.b32 / m3) * aug[4];
    return dx;
}

Vector TrailerDisturbance::f(double t, const Vector& aug) const {
    const Vector desired{{aug[0], aug[3], aug[6], aug[7]}}; // [q_d; q_pd; q_pd']
    const Vector q_dot_d{{aug[1], aug[4]}};
    const Vector q_ddot_d{{aug[2], aug[5]}};
    return A21_ * desired + A22_ * q_dot_d - q_ddot_d + exogenous_force(t);
}

Vector TrailerDisturbance::f_dot(double t, const Vector& aug) const {
    const double m3 = v_.m3;
    const double q_pd_ddot =
        -(p_.k13 + p_.k32) / m3 * aug[6] - (p_.b13 + p_.b32) / m3 * aug[7] +
        (p_.k13 / m3) * aug[0] + (p_.k32 / m3) * aug[3] +
        (p_.b13 / m3) * aug[1] + (p_.b32 / m3) * aug[4];
    const Vector desired_dot{{aug[1], aug[4], aug[7], q_pd_ddot}};
    const Vector q_ddot_d{{aug[2], aug[5]}};
    const Vector r = reference_input(t);
    Vector q_dddot_d(2);
    {
        double dx[3];
        chain_rhs(aug.data(), r[0], dx);
        q_dddot_d[0] = dx[2];
        chain_rhs(aug.data() + 3, r[1], dx);
        q_dddot_d[1] = dx[2];
    }
    const double s = -std::sin(t);
    const Vector fd_dot{{s, s}};
    return A21_ * desired_dot + A22_ * q_ddot_d - q_dddot_d + fd_dot;
}

BenchmarkResult run_benchmark(const TrailerParams& p, const sim::Gains& gains,
                              const sim::SimConfig& config,
                              const analysis::Certificates* certs,
                              std::optional<int> vertex, int threads) {
    const auto table = vertex_table(p);
    const model::DesignConfig design = default_design(p);
    const auto init = benchmark_initial_state(p);

    std::vector<int> todo;
    if (vertex.has_value()) {
        require(*vertex >= 0 && *vertex < static_cast<int>(table.size()),
                "run_benchmark: vertex index out of range");
        todo.push_back(*vertex);
    } else {
        for (int i = 0; i < static_cast<int>(table.size()); ++i)
            todo.push_back(i);
    }

    BenchmarkResult result;
    result.records.resize(todo.size());
    result.summary.resize(todo.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t slot = next.fetch_add(1);
            if (slot >= todo.size()) return;
            const int i = todo[slot];
            const auto vtx = make_vertex(p, table[i].F1, table[i].m2, table[i].m3);
            TrailerDisturbance dist(p, table[i]);
            VertexRunSummary& s = result.summary[slot];
            s.vertex = i;
            s.info = table[i];
            try {
                auto rec = sim::simulate(vtx, gains, dist, config, init,
                                         design.H, design.J, certs);
                s.t_s = rec.t_s;
                s.max_u = rec.max_u_norm;
                s.u0 = rec.u0_norm;
                s.cost = rec.final_cost;
                s.final_tracking_error = rec.zeta.back().norm();
                s.max_fdot = rec.max_fdot;
                s.fdot_compliant = rec.fdot_compliant;
                s.completed = true;
                result.records[slot] = std::move(rec);
            } catch (const std::exception& ex) {
                s.completed = false;
                s.note = ex.what();
            }
        }
    };
    int workers = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(todo.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return result;
}

} // namespace mgsta::trailer
