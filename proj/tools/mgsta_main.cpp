// Command-line front end: controller synthesis, certificate analysis and
// closed-loop simulation for polytopic plants in regular form, plus the
// built-in chain-of-trailers benchmark.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgsta/io.hpp"
#include "mgsta/model.hpp"
#include "mgsta/sim.hpp"
#include "mgsta/synthesis.hpp"
#include "mgsta/trailer.hpp"

namespace fs = std::filesystem;
using namespace mgsta;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    int threads = 0;
    int verbosity = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "JSON config file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--set", opts.overrides,
                    "dotted-key override, e.g. design.alpha=12.5");
    cmd->add_option("--threads", opts.threads, "worker thread cap (0 = auto)");
    cmd->add_flag("-v", opts.verbosity, "increase verbosity");
}

io::RunConfig load(const CommonOpts& opts) {
    io::RunConfig cfg =
        opts.config_path.empty()
            ? io::parse_config(io::default_trailer_config_text(), opts.overrides)
            : io::load_config(opts.config_path, opts.overrides);
    // backend selection: hsd (double) or hsd-ld (long double iteration)
    if (const char* backend = std::getenv("MGSTA_BACKEND")) {
        const std::string b = backend;
        if (b == "hsd-ld")
            cfg.solver.extended_precision = true;
        else if (b != "hsd")
            throw std::runtime_error("MGSTA_BACKEND must be hsd or hsd-ld");
    }
    return cfg;
}

const model::PolytopicPlant& need_plant(const io::RunConfig& cfg) {
    if (!cfg.plant)
        throw std::runtime_error("config has neither a plant nor a trailer section");
    return *cfg.plant;
}

const model::DesignConfig& need_design(const io::RunConfig& cfg) {
    if (!cfg.design) throw std::runtime_error("config has no design section");
    return *cfg.design;
}

void report_synthesis(const synthesis::SynthesisResult& r, std::ostream& os) {
    os << "status: " << sdp::to_string(r.status) << "\n";
    if (r.feasible()) {
        os << "theta: " << r.theta << " (alpha " << r.alpha << ", rho " << r.rho
           << ")\n";
        os << "delta_min: " << r.delta_min << "\n";
    } else if (!r.message.empty()) {
        os << "note: " << r.message << "\n";
    }
}

std::unique_ptr<sim::DisturbanceSpec> make_disturbance(const io::RunConfig& cfg,
                                                       int n) {
    if (cfg.disturbance_type == "zero")
        return std::make_unique<sim::ZeroDisturbance>(n);
    if (cfg.disturbance_type == "sine") {
        auto d = std::make_unique<sim::SineDisturbance>(
            cfg.disturbance_amplitude, cfg.disturbance_frequency);
        if (cfg.disturbance_bound > 0.0) d->declared_bound = cfg.disturbance_bound;
        return d;
    }
    throw std::runtime_error("unknown disturbance type: " + cfg.disturbance_type);
}

int cmd_synth(const CommonOpts& opts) {
    const auto cfg = load(opts);
    const auto& plant = need_plant(cfg);
    const auto& design = need_design(cfg);

    const auto report = model::check_assumptions(plant);
    if (!report.pass)
        std::cerr << "warning: a plant vertex fails the Hurwitz or input-rank check\n";
    else if (report.common_lyapunov && !*report.common_lyapunov)
        std::cerr << "warning: no common quadratic Lyapunov certificate found; "
                     "vertex checks passed\n";

    const auto result = synthesis::solve_inner(plant, design, cfg.solver);
    fs::create_directories(opts.out_dir);
    io::write_result(result, fs::path(opts.out_dir) / "result.json");
    report_synthesis(result, std::cout);
    if (result.status == sdp::SolveStatus::Infeasible) {
        std::cerr << "infeasible at alpha " << design.alpha << ", rho "
                  << design.rho << "\n";
        return kExitInfeasible;
    }
    if (!result.feasible()) {
        std::cerr << "solver failed: " << result.message << "\n";
        return kExitError;
    }
    const auto certs = analysis::certificates_from_synthesis(result);
    const auto rows = analysis::verify_all(plant, certs, result.K0, result.K1,
                                           result.K2, design.H, design.J);
    io::write_verification_csv(rows,
                               fs::path(opts.out_dir) / "verification.csv");
    return kExitOk;
}

int cmd_search(const CommonOpts& opts) {
    const auto cfg = load(opts);
    const auto& plant = need_plant(cfg);
    const auto& design = need_design(cfg);
    fs::create_directories(opts.out_dir);
    synthesis::SearchOutcome outcome;
    try {
        outcome = synthesis::outer_search(plant, design, cfg.grid, cfg.solver,
                                          opts.threads);
    } catch (const std::runtime_error& e) {
        std::cerr << e.what() << "\n";
        return kExitInfeasible;
    }
    io::write_landscape_csv(outcome.landscape,
                            fs::path(opts.out_dir) / "landscape.csv");
    io::write_result(outcome.best, fs::path(opts.out_dir) / "result.json");
    report_synthesis(outcome.best, std::cout);
    return outcome.best.feasible() ? kExitOk : kExitInfeasible;
}

int cmd_analyze(const CommonOpts& opts, const std::string& result_path) {
    const auto cfg = load(opts);
    const auto& plant = need_plant(cfg);
    const auto& design = need_design(cfg);
    const auto result = io::read_result(result_path);
    if (!result.feasible()) {
        std::cerr << "result file does not contain a feasible synthesis\n";
        return kExitInfeasible;
    }
    fs::create_directories(opts.out_dir);

    bool ok = true;
    analysis::Certificates certs;
    try {
        certs = analysis::certificates_from_synthesis(result);
    } catch (const std::invalid_argument& e) {
        std::cerr << "certificates unusable: " << e.what() << "\n";
        return kExitInfeasible;
    }
    const auto rows = analysis::verify_all(plant, certs, result.K0, result.K1,
                                           result.K2, design.H, design.J);
    io::write_verification_csv(rows,
                               fs::path(opts.out_dir) / "verification.csv");
    for (const auto& row : rows) ok = ok && row.pass;
    std::cout << (ok ? "all inequalities verified\n"
                     : "verification failures recorded\n");

    try {
        const auto [dmin, deltas] =
            synthesis::compute_delta(plant, result.K2, result.gamma);
        std::cout << "delta per vertex:";
        for (double d : deltas) std::cout << " " << d;
        std::cout << "\ndelta_min: " << dmin << "\n";
    } catch (const std::invalid_argument& e) {
        std::cerr << "disturbance bound unavailable: " << e.what() << "\n";
        ok = false;
    }
    if (ok) {
        const auto constants = analysis::stability_constants(
            plant, certs, result.K0, result.K1, result.K2, design.H, design.J);
        std::cout << "eps_L: " << constants.eps_L
                  << " eps_N: " << constants.eps_N
                  << " theta_N: " << constants.theta_N
                  << " nu_star: " << constants.nu_star << "\n";
    }
    return ok ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const CommonOpts& opts, const std::string& result_path,
                 std::optional<int> vertex) {
    const auto cfg = load(opts);
    const auto& plant = need_plant(cfg);
    const auto& design = need_design(cfg);

    sim::Gains gains;
    std::optional<analysis::Certificates> certs;
    if (!result_path.empty()) {
        const auto result = io::read_result(result_path);
        if (!result.feasible())
            throw std::runtime_error("result file is not a feasible synthesis");
        gains = {result.K0, result.K1, result.K2, result.alpha};
        certs = analysis::certificates_from_synthesis(result);
    } else if (cfg.gains) {
        gains = *cfg.gains;
    } else {
        throw std::runtime_error("simulate needs gains: pass --result or a gains section");
    }

    const auto dist = make_disturbance(cfg, plant.n);
    const sim::InitialState init{design.zeta0, design.sigma0, design.eta0};
    fs::create_directories(opts.out_dir);

    if (vertex && (*vertex < 0 || *vertex >= plant.vertex_count()))
        throw std::runtime_error("vertex index out of range");
    int first = vertex.value_or(0);
    int last = vertex ? *vertex + 1 : plant.vertex_count();
    for (int i = first; i < last; ++i) {
        const auto rec = sim::simulate(plant.vertices[i], gains, *dist, cfg.sim,
                                       init, design.H, design.J,
                                       certs ? &*certs : nullptr);
        std::ostringstream name;
        name << "vertex_" << i << ".csv";
        io::write_trajectory_csv(rec, fs::path(opts.out_dir) / name.str());
        std::cout << "vertex " << i << ": cost " << rec.final_cost << ", t_s ";
        if (rec.t_s)
            std::cout << *rec.t_s;
        else
            std::cout << "none";
        std::cout << ", max |u| " << rec.max_u_norm << "\n";
    }
    return kExitOk;
}

int cmd_trailer(const CommonOpts& opts, bool synthesize,
                std::optional<int> vertex, bool plots) {
    const auto cfg = load(opts);
    const auto& params = cfg.trailer_params;
    const auto plant = trailer::build_trailer_polytope(params);
    const auto design =
        cfg.design ? *cfg.design : trailer::default_design(params);

    sim::Gains gains;
    std::optional<analysis::Certificates> certs;
    fs::create_directories(opts.out_dir);
    if (synthesize) {
        synthesis::SearchOutcome outcome;
        try {
            outcome = synthesis::outer_search(plant, design, cfg.grid,
                                              cfg.solver, opts.threads);
        } catch (const std::runtime_error& e) {
            std::cerr << e.what() << "\n";
            return kExitInfeasible;
        }
        io::write_landscape_csv(outcome.landscape,
                                fs::path(opts.out_dir) / "landscape.csv");
        io::write_result(outcome.best, fs::path(opts.out_dir) / "result.json");
        report_synthesis(outcome.best, std::cout);
        if (!outcome.best.feasible()) return kExitInfeasible;
        gains = {outcome.best.K0, outcome.best.K1, outcome.best.K2,
                 outcome.best.alpha};
        certs = analysis::certificates_from_synthesis(outcome.best);
    } else if (cfg.gains) {
        gains = *cfg.gains;
    } else {
        gains = trailer::benchmark_gains();
    }

    sim::SimConfig sim_cfg = cfg.sim;
    if (sim_cfg.horizon <= sim_cfg.dt) sim_cfg.horizon = 30.0;
    // rate bound admitted by the gains in use; the certified cost bound is
    // only claimed for runs whose measured disturbance rate stays below it
    double delta_min = 0.0;
    try {
        delta_min = synthesis::compute_delta(plant, gains.K2,
                                             design.gamma).first;
    } catch (const std::invalid_argument&) {
        delta_min = 0.0;
    }
    const auto bench = trailer::run_benchmark(params, gains, sim_cfg,
                                              certs ? &*certs : nullptr, vertex,
                                              opts.threads);
    for (std::size_t k = 0; k < bench.records.size(); ++k) {
        if (!bench.summary[k].completed) continue;
        std::ostringstream name;
        name << "vertex_" << bench.summary[k].vertex << ".csv";
        io::write_trajectory_csv(bench.records[k],
                                 fs::path(opts.out_dir) / name.str());
    }
    io::write_summary_csv(bench.summary, fs::path(opts.out_dir) / "summary.csv");
    if (plots) io::write_plot_script(opts.out_dir, plant.vertex_count());

    bool all_ok = true;
    for (const auto& s : bench.summary) {
        std::cout << "vertex " << s.vertex << " (F1 " << s.info.F1 << ", m2 "
                  << s.info.m2 << ", m3 " << s.info.m3 << "): ";
        if (!s.completed) {
            std::cout << "diverged (" << s.note << ")\n";
            all_ok = false;
            continue;
        }
        std::cout << "t_s ";
        if (s.t_s)
            std::cout << *s.t_s;
        else {
            std::cout << "none";
            all_ok = false;
        }
        std::cout << ", max |u| " << s.max_u << ", cost " << s.cost
                  << ", final error " << s.final_tracking_error;
        if (delta_min > 0.0 && s.max_fdot > delta_min)
            std::cout << " [cost guarantee not claimed: disturbance rate "
                      << s.max_fdot << " exceeds delta " << delta_min << "]";
        std::cout << "\n";
    }
    return all_ok ? kExitOk : kExitError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"MGSTA gain synthesis, verification and simulation"};
    app.require_subcommand(1);

    CommonOpts synth_opts, search_opts, analyze_opts, simulate_opts, trailer_opts;
    std::string analyze_result, simulate_result;
    std::optional<int> simulate_vertex, trailer_vertex;
    bool trailer_synthesize = false, trailer_plots = false;

    auto* synth = app.add_subcommand("synth", "solve the inner program at fixed (alpha, rho)");
    add_common(synth, synth_opts, true);

    auto* search = app.add_subcommand("search", "grid + refinement over (alpha, rho)");
    add_common(search, search_opts, true);

    auto* analyze = app.add_subcommand("analyze", "verify certificates of a result file");
    add_common(analyze, analyze_opts, true);
    analyze->add_option("--result", analyze_result, "synthesis result JSON")->required();

    auto* simulate = app.add_subcommand("simulate", "closed-loop simulation of a configured plant");
    add_common(simulate, simulate_opts, true);
    simulate->add_option("--result", simulate_result, "synthesis result JSON");
    int sim_vertex_raw = -1;
    simulate->add_option("--vertex", sim_vertex_raw, "simulate a single vertex");

    auto* trailer_cmd = app.add_subcommand("trailer", "chain-of-trailers benchmark");
    add_common(trailer_cmd, trailer_opts, false);
    trailer_cmd->add_flag("--synthesize", trailer_synthesize,
                          "synthesize gains before simulating");
    int trailer_vertex_raw = -1;
    trailer_cmd->add_option("--vertex", trailer_vertex_raw, "run a single vertex");
    trailer_cmd->add_flag("--plots", trailer_plots, "emit a gnuplot script");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_opts);
        if (search->parsed()) return cmd_search(search_opts);
        if (analyze->parsed()) return cmd_analyze(analyze_opts, analyze_result);
        if (simulate->parsed()) {
            if (sim_vertex_raw >= 0) simulate_vertex = sim_vertex_raw;
            return cmd_simulate(simulate_opts, simulate_result, simulate_vertex);
        }
        if (trailer_cmd->parsed()) {
            if (trailer_vertex_raw >= 0) trailer_vertex = trailer_vertex_raw;
            return cmd_trailer(trailer_opts, trailer_synthesize, trailer_vertex,
                               trailer_plots);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
