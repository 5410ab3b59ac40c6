#include <doctest.h>

#include <cmath>
#include <complex>

#include "mgsta/scaling.hpp"
#include "mgsta/sim.hpp"
#include "mgsta/trailer.hpp"
#include "test_helpers.hpp"

using namespace mgsta;

namespace {

// Oracle: simulate the chain in physical coordinates (actuated positions,
// passive trailer, reference and desired-trajectory states) and map to the
// tracking-error coordinates afterwards. Independent of sim::simulate.
struct PhysicalSim {
    trailer::TrailerParams p;
    trailer::VertexInfo v;
    sim::Gains gains;
    double sigma_reg;

    // state: [q_a(2), q_a'(2), q_p, q_p', eta(2), ref(6), q_pd, q_pd']
    static constexpr int kDim = 16;

    Vector errors(const Vector& s, Vector* sigma_out) const {
        const Vector q_a = s.segment(0, 2);
        const Vector q_a_dot = s.segment(2, 2);
        const Vector q_d{{s[8], s[11]}};
        const Vector q_d_dot{{s[9], s[12]}};
        Vector zeta(4);
        zeta.head(2) = q_a - q_d;
        zeta[2] = s[4] - s[14];
        zeta[3] = s[5] - s[15];
        if (sigma_out != nullptr) {
            const Vector e_v = q_a_dot - q_d_dot;
            (*sigma_out) = Vector(2);
            (*sigma_out)[0] = p.gamma_e1 * zeta[0] + e_v[0];
            (*sigma_out)[1] = p.gamma_e2 * zeta[1] + e_v[1];
        }
        return zeta;
    }

    Vector deriv(double t, const Vector& s) const {
        Vector sigma;
        const Vector zeta = errors(s, &sigma);
        const Vector eta = s.segment(6, 2);
        const double c = c_sigma(sigma.norm(), gains.alpha, sigma_reg);
        const Vector u =
            gains.K0 * zeta + c * (gains.K1 * sigma) + gains.K2 * eta;

        const double m1 = p.m1, m2 = v.m2, m3 = v.m3;
        const Matrix B{{(v.F1 + p.F2) / m1, -p.F2 / m1},
                       {-p.F2 / m2, (p.F2 + p.F3) / m2}};
        const Vector fd = trailer::TrailerDisturbance::exogenous_force(t);

        Vector d(kDim);
        // actuated trailers
        d.segment(0, 2) = s.segment(2, 2);
        d[2] = (-p.k13 * s[0] + p.k13 * s[4] + p.b13 * s[5]) / m1 -
               (p.b13 / m1) * s[2] + (B * u)[0] + fd[0];
        d[3] = (-p.k32 * s[1] + p.k32 * s[4] + p.b32 * s[5]) / m2 -
               (p.b32 / m2) * s[3] + (B * u)[1] + fd[1];
        // passive trailer
        d[4] = s[5];
        d[5] = (p.k13 * s[0] + p.k32 * s[1] - (p.k13 + p.k32) * s[4] -
                (p.b13 + p.b32) * s[5] + p.b13 * s[2] + p.b32 * s[3]) /
               m3;
        // controller integrator
        d.segment(6, 2) = (c * c) * sigma;
        // reference chains (triple pole at -5, unit DC gain)
        const Vector r = trailer::TrailerDisturbance::reference_input(t);
        auto chain = [](const double* x, double rin, double* dx) {
            dx[0] = x[1];
            dx[1] = x[2];
            dx[2] = -125.0 * x[0] - 75.0 * x[1] - 15.0 * x[2] + 125.0 * rin;
        };
        chain(s.data() + 8, r[0], d.data() + 8);
        chain(s.data() + 11, r[1], d.data() + 11);
        // desired trajectory of the passive trailer
        d[14] = s[15];
        d[15] = -(p.k13 + p.k32) / m3 * s[14] - (p.b13 + p.b32) / m3 * s[15] +
                (p.k13 / m3) * s[8] + (p.k32 / m3) * s[11] +
                (p.b13 / m3) * s[9] + (p.b32 / m3) * s[12];
        return d;
    }

    std::vector<Vector> run(double horizon, double dt, int stride) const {
        Vector s = Vector::Zero(kDim);
        s.segment(0, 2) = Vector{{0.04, -0.06}};
        s.segment(2, 2) = Vector{{-0.03, 0.04}};
        std::vector<Vector> samples;
        samples.push_back(s);
        const int steps = static_cast<int>(std::llround(horizon / dt));
        for (int k = 1; k <= steps; ++k) {
            const double t = (k - 1) * dt;
            const Vector k1 = deriv(t, s);
            const Vector k2 = deriv(t + dt / 2, s + dt / 2 * k1);
            const Vector k3 = deriv(t + dt / 2, s + dt / 2 * k2);
            const Vector k4 = deriv(t + dt, s + dt * k3);
            s += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (k % stride == 0 || k == steps) samples.push_back(s);
        }
        return samples;
    }
};

} // namespace

TEST_CASE("trailer polytope structure") {
    const auto plant = trailer::build_trailer_polytope();
    CHECK(plant.vertex_count() == 8);
    CHECK(plant.r == 4);
    CHECK(plant.n == 2);
    CHECK(plant.m == 2);

    const auto table = trailer::vertex_table();
    // order: F1 outer, then m2, then m3
    CHECK(table[4].F1 == 1.0);
    CHECK(table[4].m2 == 2.0);
    const Matrix expectedB{{2.0, -1.0}, {-0.5, 1.0}};
    CHECK((plant.vertices[4].B - expectedB).norm() == 0.0);

    for (const auto& v : plant.vertices) {
        CHECK((v.E.topRows(2) - Matrix::Identity(2, 2)).norm() == 0.0);
        CHECK(v.E.row(2).norm() == 0.0);
        // off-diagonal asymmetry of the actuation map (shared actuator
        // divided by different masses)
        CHECK(v.B(0, 1) != v.B(1, 0));
    }
}

TEST_CASE("benchmark initial state") {
    const auto init = trailer::benchmark_initial_state();
    CHECK(init.zeta0[0] == doctest::Approx(0.04));
    CHECK(init.zeta0[1] == doctest::Approx(-0.06));
    CHECK(init.zeta0.tail(2).norm() == 0.0);
    CHECK(init.sigma0[0] == doctest::Approx(0.05));  // 2*0.04 - 0.03
    CHECK(init.sigma0[1] == doctest::Approx(-0.20)); // 4*(-0.06) + 0.04
    CHECK(init.eta0.norm() == 0.0);
}

TEST_CASE("reference signals match the frequency-response oracle") {
    const auto ref = trailer::reference_signals(40.0, 1e-3);
    CHECK(ref.q_d.front().norm() == 0.0);
    CHECK(ref.q_dot_d.front().norm() == 0.0);

    // steady-state amplitude: |125 / (jw + 5)^3| per channel
    auto gain = [](double w) {
        const std::complex<double> pole(5.0, w);
        return std::abs(125.0 / (pole * pole * pole));
    };
    double amp1 = 0.0, amp2 = 0.0;
    for (std::size_t k = ref.t.size() / 2; k < ref.t.size(); ++k) {
        amp1 = std::max(amp1, std::abs(ref.q_d[k][0]));
        amp2 = std::max(amp2, std::abs(ref.q_d[k][1]));
    }
    CHECK(amp1 == doctest::Approx(0.10 * gain(0.5)).epsilon(0.01));
    CHECK(amp2 == doctest::Approx(0.06 * gain(1.0)).epsilon(0.01));
}

TEST_CASE("disturbance construction") {
    const trailer::TrailerParams p;
    const auto table = trailer::vertex_table(p);

    SUBCASE("exogenous force at specific times") {
        const Vector f0 = trailer::TrailerDisturbance::exogenous_force(0.0);
        CHECK(f0.norm() == 0.0);
        const Vector fpi =
            trailer::TrailerDisturbance::exogenous_force(std::acos(-1.0));
        CHECK(fpi[0] == doctest::Approx(-2.0));
        CHECK(fpi[1] == doctest::Approx(-2.0));
    }

    SUBCASE("starts at zero and respects the declared rate bound") {
        for (const auto& info : table) {
            trailer::TrailerDisturbance dist(p, info);
            CHECK(dist.f(0.0, dist.aug_initial()).norm() == 0.0);
            CHECK(dist.declared_bound == doctest::Approx(6.0));

            // integrate the auxiliary states and sample ||f_dot||
            Vector aug = dist.aug_initial();
            const double dt = 1e-3;
            double max_fdot = 0.0;
            for (int k = 0; k < 20000; ++k) {
                const double t = k * dt;
                max_fdot = std::max(max_fdot, dist.f_dot(t, aug).norm());
                const Vector k1 = dist.aug_rhs(t, aug);
                const Vector k2 = dist.aug_rhs(t + dt / 2, aug + dt / 2 * k1);
                const Vector k3 = dist.aug_rhs(t + dt / 2, aug + dt / 2 * k2);
                const Vector k4 = dist.aug_rhs(t + dt, aug + dt * k3);
                aug += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            }
            CHECK(max_fdot <= 6.0);
            CHECK(max_fdot > 1.0); // the bound is loose but not vacuous
        }
    }

    SUBCASE("f_dot matches finite differences of f") {
        trailer::TrailerDisturbance dist(p, table[3]);
        Vector aug = dist.aug_initial();
        const double dt = 1e-4;
        std::vector<Vector> augs{aug};
        for (int k = 1; k <= 2000; ++k) {
            const double t = (k - 1) * dt;
            const Vector k1 = dist.aug_rhs(t, aug);
            const Vector k2 = dist.aug_rhs(t + dt / 2, aug + dt / 2 * k1);
            const Vector k3 = dist.aug_rhs(t + dt / 2, aug + dt / 2 * k2);
            const Vector k4 = dist.aug_rhs(t + dt, aug + dt * k3);
            aug += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            augs.push_back(aug);
        }
        for (int k = 500; k <= 1500; k += 250) {
            const Vector fd = dist.f_dot(k * dt, augs[k]);
            const Vector central = (dist.f((k + 1) * dt, augs[k + 1]) -
                                    dist.f((k - 1) * dt, augs[k - 1])) /
                                   (2 * dt);
            CHECK((fd - central).norm() < 1e-6 * (1.0 + fd.norm()));
        }
    }
}

TEST_CASE("perfect tracking is a fixed point of the passive trailer") {
    // when the actuated trailers track exactly and the passive trailer sits
    // on its desired trajectory, the physical acceleration equals the
    // desired-trajectory acceleration
    const trailer::TrailerParams p;
    std::mt19937 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const double m3 = 2.0 + (trial % 2);
        const Vector q_d = test_helpers::random_vector(2, rng);
        const Vector q_d_dot = test_helpers::random_vector(2, rng);
        const double q_pd = test_helpers::random_vector(1, rng)[0];
        const double q_pd_dot = test_helpers::random_vector(1, rng)[0];

        const double physical =
            (p.k13 * q_d[0] + p.k32 * q_d[1] - (p.k13 + p.k32) * q_pd -
             (p.b13 + p.b32) * q_pd_dot + p.b13 * q_d_dot[0] +
             p.b32 * q_d_dot[1]) /
            m3;
        const double desired = -(p.k13 + p.k32) / m3 * q_pd -
                               (p.b13 + p.b32) / m3 * q_pd_dot +
                               (p.k13 / m3) * q_d[0] + (p.k32 / m3) * q_d[1] +
                               (p.b13 / m3) * q_d_dot[0] +
                               (p.b32 / m3) * q_d_dot[1];
        CHECK(physical == doctest::Approx(desired).epsilon(1e-12));
    }
}

TEST_CASE("error-coordinate simulation equals the physical-coordinate oracle") {
    const trailer::TrailerParams p;
    const auto table = trailer::vertex_table(p);
    const auto gains = trailer::benchmark_gains();
    const auto design = trailer::default_design(p);
    const auto init = trailer::benchmark_initial_state(p);

    for (int vi : {0, 5}) {
        const auto vertex = trailer::make_vertex(p, table[vi].F1, table[vi].m2,
                                                 table[vi].m3);
        trailer::TrailerDisturbance dist(p, table[vi]);
        sim::SimConfig cfg;
        cfg.dt = 1e-3;
        cfg.horizon = 5.0;
        cfg.record_stride = 100;
        const auto rec = sim::simulate(vertex, gains, dist, cfg, init,
                                       design.H, design.J);

        PhysicalSim phys{p, table[vi], gains, cfg.sigma_reg};
        const auto samples = phys.run(cfg.horizon, cfg.dt, cfg.record_stride);
        REQUIRE(samples.size() == rec.t.size());
        for (std::size_t k = 0; k < samples.size(); ++k) {
            Vector sigma;
            const Vector zeta = phys.errors(samples[k], &sigma);
            const Vector eta = samples[k].segment(6, 2);
            CHECK((zeta - rec.zeta[k]).norm() < 1e-8);
            CHECK((sigma - rec.sigma[k]).norm() < 1e-8);
            CHECK((eta - rec.eta[k]).norm() < 1e-8);
        }

        // record invariants: monotone time, nondecreasing running cost,
        // and the algebraic link between the two sliding coordinates
        REQUIRE(rec.has_z);
        const Matrix BK2inv = (vertex.B * gains.K2).inverse();
        const Matrix C0 = vertex.C + vertex.B * gains.K0;
        for (std::size_t k = 0; k < rec.t.size(); ++k) {
            if (k > 0) {
                CHECK(rec.t[k] > rec.t[k - 1]);
                CHECK(rec.cost_integral[k] >= rec.cost_integral[k - 1]);
            }
            const Vector expect_zbar =
                rec.z[k] + BK2inv * (C0 * rec.zeta[k]);
            CHECK((rec.zbar[k] - expect_zbar).norm() <
                  1e-10 * (1.0 + expect_zbar.norm()));
        }
    }
}

TEST_CASE("initial control effort stays below the actuator budget") {
    const auto gains = trailer::benchmark_gains();
    const auto init = trailer::benchmark_initial_state();
    const Vector u0 =
        sim::control_law(init.zeta0, init.sigma0, init.eta0, gains.K0,
                         gains.K1, gains.K2, gains.alpha, 1e-12);
    // largest per-channel force at t = 0 under 150 force units
    CHECK(u0.cwiseAbs().maxCoeff() < 150.0);
    CHECK(u0.cwiseAbs().maxCoeff() > 50.0); // and the start is genuinely hard
}

TEST_CASE("benchmark with the shipped gains slides at every vertex") {
    const trailer::TrailerParams p;
    sim::SimConfig cfg;
    cfg.dt = 2e-4;
    cfg.horizon = 5.0;
    cfg.record_stride = 20;
    const auto bench =
        trailer::run_benchmark(p, trailer::benchmark_gains(), cfg);
    REQUIRE(bench.summary.size() == 8);
    for (const auto& s : bench.summary) {
        CHECK(s.completed);
        REQUIRE(s.t_s.has_value());
        CHECK(*s.t_s < 1.0);
        CHECK(s.fdot_compliant);
        CHECK(s.final_tracking_error < 1e-3);
        CHECK(s.max_fdot < 6.0);
    }
}

TEST_CASE("benchmark tolerates useless gains without crashing") {
    const trailer::TrailerParams p;
    sim::Gains zero{Matrix::Zero(2, 4), Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                    11.0};
    sim::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 2.0;
    const auto bench = trailer::run_benchmark(p, zero, cfg, nullptr, 0);
    REQUIRE(bench.summary.size() == 1);
    // no sliding is reported, but the run must not throw
    CHECK_FALSE(bench.summary[0].t_s.has_value());
}

TEST_CASE("single-vertex benchmark selection") {
    const trailer::TrailerParams p;
    sim::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 1.0;
    const auto bench =
        trailer::run_benchmark(p, trailer::benchmark_gains(), cfg, nullptr, 3);
    REQUIRE(bench.summary.size() == 1);
    CHECK(bench.summary[0].vertex == 3);
    CHECK(bench.summary[0].info.m3 == 3.0);
}
