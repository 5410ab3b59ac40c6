#include "mgsta/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mgsta::io {

using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

json to_json(const Matrix& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from(const json& j, const std::string& name) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::runtime_error("config: " + name +
                                 " must be a nested array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.front().size());
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols)
            throw std::runtime_error("config: ragged rows in " + name);
        for (int c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
    }
    return M;
}

Vector vector_from(const json& j, const std::string& name) {
    if (!j.is_array())
        throw std::runtime_error("config: " + name + " must be an array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_overrides(json& root, const std::vector<std::string>& overrides) {
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("override must look like key.path=value: " + ov);
        const std::string path = ov.substr(0, eq);
        const std::string value = ov.substr(eq + 1);
        json* node = &root;
        std::size_t pos = 0;
        for (;;) {
            const auto dot = path.find('.', pos);
            const std::string key = path.substr(pos, dot - pos);
            if (dot == std::string::npos) {
                json parsed = json::parse(value, nullptr, false);
                (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
                break;
            }
            node = &(*node)[key];
            pos = dot + 1;
        }
    }
}

trailer::TrailerParams trailer_from(const json& j) {
    trailer::TrailerParams p;
    maybe(j, "m1", p.m1);
    maybe(j, "m2_min", p.m2_min);
    maybe(j, "m2_max", p.m2_max);
    maybe(j, "m3_min", p.m3_min);
    maybe(j, "m3_max", p.m3_max);
    maybe(j, "k13", p.k13);
    maybe(j, "k32", p.k32);
    maybe(j, "b13", p.b13);
    maybe(j, "b32", p.b32);
    maybe(j, "F1_min", p.F1_min);
    maybe(j, "F1_max", p.F1_max);
    maybe(j, "F2", p.F2);
    maybe(j, "F3", p.F3);
    maybe(j, "gamma_e1", p.gamma_e1);
    maybe(j, "gamma_e2", p.gamma_e2);
    return p;
}

} // namespace

RunConfig parse_config(const std::string& text,
                       const std::vector<std::string>& overrides) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("config: JSON parse error: ") +
                                 e.what());
    }
    apply_overrides(root, overrides);

    RunConfig cfg;
    if (root.contains("trailer")) {
        cfg.has_trailer_section = true;
        cfg.trailer_params = trailer_from(root["trailer"]);
    }
    if (root.contains("plant")) {
        const auto& jp = root["plant"];
        std::vector<model::VertexMatrices> vertices;
        for (const auto& jv : jp.at("vertices")) {
            model::VertexMatrices v;
            v.A = matrix_from(jv.at("A"), "plant.A");
            v.E = matrix_from(jv.at("E"), "plant.E");
            v.C = matrix_from(jv.at("C"), "plant.C");
            v.D = matrix_from(jv.at("D"), "plant.D");
            v.B = matrix_from(jv.at("B"), "plant.B");
            vertices.push_back(std::move(v));
        }
        cfg.plant = model::make_polytope(std::move(vertices));
    } else if (cfg.has_trailer_section) {
        cfg.plant = trailer::build_trailer_polytope(cfg.trailer_params);
    }

    model::DesignConfig design = cfg.has_trailer_section
                                     ? trailer::default_design(cfg.trailer_params)
                                     : model::DesignConfig{};
    bool has_design = cfg.has_trailer_section;
    if (root.contains("design")) {
        has_design = true;
        const auto& jd = root["design"];
        maybe(jd, "gamma", design.gamma);
        maybe(jd, "alpha", design.alpha);
        maybe(jd, "rho", design.rho);
        maybe(jd, "omega", design.omega);
        if (jd.contains("H")) design.H = matrix_from(jd["H"], "design.H");
        if (jd.contains("J")) design.J = matrix_from(jd["J"], "design.J");
        if (jd.contains("zeta0")) design.zeta0 = vector_from(jd["zeta0"], "design.zeta0");
        if (jd.contains("sigma0"))
            design.sigma0 = vector_from(jd["sigma0"], "design.sigma0");
        if (jd.contains("eta0")) design.eta0 = vector_from(jd["eta0"], "design.eta0");
    }
    if (has_design) cfg.design = std::move(design);

    if (root.contains("search")) {
        const auto& js = root["search"];
        maybe(js, "alpha_min", cfg.grid.alpha_min);
        maybe(js, "alpha_max", cfg.grid.alpha_max);
        maybe(js, "alpha_points", cfg.grid.alpha_points);
        maybe(js, "rho_min", cfg.grid.rho_min);
        maybe(js, "rho_max", cfg.grid.rho_max);
        maybe(js, "rho_points", cfg.grid.rho_points);
        maybe(js, "log_spaced", cfg.grid.log_spaced);
        maybe(js, "refine_passes", cfg.grid.refine_passes);
    }
    if (root.contains("sim")) {
        const auto& js = root["sim"];
        maybe(js, "dt", cfg.sim.dt);
        maybe(js, "horizon", cfg.sim.horizon);
        maybe(js, "sigma_reg", cfg.sim.sigma_reg);
        maybe(js, "record_stride", cfg.sim.record_stride);
    }
    if (root.contains("solver")) {
        const auto& js = root["solver"];
        maybe(js, "feas_tol", cfg.solver.feas_tol);
        maybe(js, "gap_tol", cfg.solver.gap_tol);
        maybe(js, "max_iterations", cfg.solver.max_iterations);
        maybe(js, "extended_precision", cfg.solver.extended_precision);
    }
    if (root.contains("disturbance")) {
        const auto& jd = root["disturbance"];
        maybe(jd, "type", cfg.disturbance_type);
        if (jd.contains("amplitude"))
            cfg.disturbance_amplitude =
                vector_from(jd["amplitude"], "disturbance.amplitude");
        if (jd.contains("frequency"))
            cfg.disturbance_frequency =
                vector_from(jd["frequency"], "disturbance.frequency");
        maybe(jd, "bound", cfg.disturbance_bound);
    }
    if (root.contains("gains")) {
        const auto& jg = root["gains"];
        sim::Gains g;
        g.K0 = matrix_from(jg.at("K0"), "gains.K0");
        g.K1 = matrix_from(jg.at("K1"), "gains.K1");
        g.K2 = matrix_from(jg.at("K2"), "gains.K2");
        g.alpha = jg.value("alpha", cfg.design ? cfg.design->alpha : 1.0);
        cfg.gains = std::move(g);
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("config: cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string default_trailer_config_text() {
    return R"({
  "trailer": {
    "m1": 1.0, "m2_min": 2.0, "m2_max": 3.0, "m3_min": 2.0, "m3_max": 3.0,
    "k13": 30.0, "k32": 45.0, "b13": 15.0, "b32": 30.0,
    "F1_min": 0.0, "F1_max": 1.0, "F2": 1.0, "F3": 1.0,
    "gamma_e1": 2.0, "gamma_e2": 4.0
  },
  "design": { "gamma": 4.0, "omega": 50.0, "alpha": 11.0, "rho": 2.1 },
  "search": {
    "alpha_min": 1.0, "alpha_max": 100.0, "alpha_points": 8,
    "rho_min": 0.1, "rho_max": 10.0, "rho_points": 8,
    "log_spaced": true, "refine_passes": 3
  },
  "sim": { "dt": 1e-4, "horizon": 30.0, "sigma_reg": 1e-12, "record_stride": 10 },
  "solver": { "feas_tol": 1e-8, "gap_tol": 1e-8, "max_iterations": 200 }
}
)";
}

std::string to_json(const synthesis::SynthesisResult& r) {
    json j;
    j["status"] = sdp::to_string(r.status);
    j["theta"] = r.theta;
    j["alpha"] = r.alpha;
    j["rho"] = r.rho;
    j["gamma"] = r.gamma;
    j["omega"] = r.omega;
    j["iterations"] = r.iterations;
    if (!r.message.empty()) j["message"] = r.message;
    if (r.feasible()) {
        j["Q"] = to_json(r.Q);
        j["X"] = to_json(r.X);
        j["Y"] = to_json(r.Y);
        j["W"] = to_json(r.W);
        j["zd"] = {{"mu", r.mu}, {"beta", r.beta}, {"pi", r.pi}, {"kappa", r.kappa}};
        j["K0"] = to_json(r.K0);
        j["K1"] = to_json(r.K1);
        j["K2"] = to_json(r.K2);
        j["delta"] = {{"min", r.delta_min}, {"vertex", r.delta_vertex}};
        j["bk2_condition"] = r.bk2_condition;
        json margins = json::array();
        for (const auto& m : r.margins)
            margins.push_back({{"index", m.index}, {"margin", m.margin}, {"pass", m.pass}});
        j["margins"] = std::move(margins);
    }
    return j.dump(2) + "\n";
}

synthesis::SynthesisResult result_from_json(const std::string& text) {
    json j = json::parse(text);
    synthesis::SynthesisResult r;
    const std::string status = j.value("status", "numerical_trouble");
    if (status == "optimal")
        r.status = sdp::SolveStatus::Optimal;
    else if (status == "infeasible")
        r.status = sdp::SolveStatus::Infeasible;
    else
        r.status = sdp::SolveStatus::NumericalTrouble;
    r.theta = j.value("theta", 0.0);
    r.alpha = j.value("alpha", 0.0);
    r.rho = j.value("rho", 0.0);
    r.gamma = j.value("gamma", 0.0);
    r.omega = j.value("omega", 0.0);
    r.iterations = j.value("iterations", 0);
    if (j.contains("Q")) r.Q = matrix_from(j["Q"], "result.Q");
    if (j.contains("X")) r.X = matrix_from(j["X"], "result.X");
    if (j.contains("Y")) r.Y = matrix_from(j["Y"], "result.Y");
    if (j.contains("W")) r.W = matrix_from(j["W"], "result.W");
    if (j.contains("zd")) {
        r.mu = j["zd"].value("mu", 0.0);
        r.beta = j["zd"].value("beta", 0.0);
        r.pi = j["zd"].value("pi", 0.0);
        r.kappa = j["zd"].value("kappa", 0.0);
    }
    if (j.contains("K0")) r.K0 = matrix_from(j["K0"], "result.K0");
    if (j.contains("K1")) r.K1 = matrix_from(j["K1"], "result.K1");
    if (j.contains("K2")) r.K2 = matrix_from(j["K2"], "result.K2");
    if (j.contains("delta")) {
        r.delta_min = j["delta"].value("min", 0.0);
        if (j["delta"].contains("vertex"))
            r.delta_vertex = j["delta"]["vertex"].get<std::vector<double>>();
    }
    return r;
}

void write_result(const synthesis::SynthesisResult& result,
                  const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(result);
}

synthesis::SynthesisResult read_result(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return result_from_json(ss.str());
}

void write_landscape_csv(const std::vector<synthesis::SearchPoint>& points,
                         const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# mgsta landscape v1\n";
    out << "alpha,rho,theta,status\n";
    for (const auto& p : points) {
        out << num(p.alpha) << "," << num(p.rho) << ","
            << (std::isfinite(p.theta) ? num(p.theta) : "inf") << ","
            << sdp::to_string(p.status) << "\n";
    }
}

void write_trajectory_csv(const sim::TrajectoryRecord& rec,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# mgsta trajectory v1\n";
    const int r = rec.zeta.empty() ? 0 : static_cast<int>(rec.zeta.front().size());
    const int n = rec.sigma.empty() ? 0 : static_cast<int>(rec.sigma.front().size());
    const int m = rec.u.empty() ? 0 : static_cast<int>(rec.u.front().size());
    const int q = rec.xi.empty() ? 0 : static_cast<int>(rec.xi.front().size());
    out << "t";
    for (int i = 1; i <= r; ++i) out << ",zeta_" << i;
    for (int i = 1; i <= n; ++i) out << ",sigma_" << i;
    for (int i = 1; i <= n; ++i) out << ",eta_" << i;
    for (int i = 1; i <= m; ++i) out << ",u_" << i;
    for (int i = 1; i <= q; ++i) out << ",xi_" << i;
    out << ",v,V,nu,cost_integral";
    if (rec.has_z) {
        for (int i = 1; i <= n; ++i) out << ",z_" << i;
        for (int i = 1; i <= n; ++i) out << ",zbar_" << i;
    }
    out << "\n";
    for (std::size_t k = 0; k < rec.t.size(); ++k) {
        out << num(rec.t[k]);
        for (int i = 0; i < r; ++i) out << "," << num(rec.zeta[k][i]);
        for (int i = 0; i < n; ++i) out << "," << num(rec.sigma[k][i]);
        for (int i = 0; i < n; ++i) out << "," << num(rec.eta[k][i]);
        for (int i = 0; i < m; ++i) out << "," << num(rec.u[k][i]);
        for (int i = 0; i < q; ++i) out << "," << num(rec.xi[k][i]);
        if (rec.has_lyapunov)
            out << "," << num(rec.v[k]) << "," << num(rec.V[k]) << ","
                << num(rec.nu[k]);
        else
            out << ",,,";
        out << "," << num(rec.cost_integral[k]);
        if (rec.has_z) {
            for (int i = 0; i < n; ++i) out << "," << num(rec.z[k][i]);
            for (int i = 0; i < n; ++i) out << "," << num(rec.zbar[k][i]);
        }
        out << "\n";
    }
}

void write_summary_csv(const std::vector<trailer::VertexRunSummary>& rows,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# mgsta summary v1\n";
    out << "vertex,F1,m2,m3,t_s,max_u,u0,cost,final_tracking_error,max_fdot,"
           "fdot_compliant,completed,note\n";
    for (const auto& s : rows) {
        out << s.vertex << "," << num(s.info.F1) << "," << num(s.info.m2) << ","
            << num(s.info.m3) << ",";
        if (s.t_s)
            out << num(*s.t_s);
        else
            out << "none";
        out << "," << num(s.max_u) << "," << num(s.u0) << "," << num(s.cost)
            << "," << num(s.final_tracking_error) << "," << num(s.max_fdot)
            << "," << (s.fdot_compliant ? 1 : 0) << "," << (s.completed ? 1 : 0)
            << "," << s.note << "\n";
    }
}

void write_verification_csv(const std::vector<analysis::VerificationRow>& rows,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# mgsta verification v1\n";
    out << "point,inequality,margin,pass\n";
    for (const auto& row : rows)
        out << row.point << "," << row.inequality << "," << num(row.margin)
            << "," << (row.pass ? 1 : 0) << "\n";
}

void write_plot_script(const std::filesystem::path& out_dir, int vertices) {
    std::ofstream out(out_dir / "plot.gp");
    if (!out) throw std::runtime_error("cannot write plot script");
    out << "# gnuplot script: sliding variables, control effort, tracking errors\n";
    out << "set datafile separator ','\n";
    out << "set terminal pngcairo size 1200,900\n";
    out << "set output 'benchmark.png'\n";
    out << "set multiplot layout 2,2\n";
    auto series = [&](const char* title, int col1, int col2) {
        out << "set title '" << title << "'\nplot ";
        for (int v = 0; v < vertices; ++v) {
            out << "'vertex_" << v << ".csv' skip 2 using 1:" << col1
                << " with lines notitle, '' skip 2 using 1:" << col2
                << " with lines notitle";
            if (v + 1 < vertices) out << ", ";
        }
        out << "\n";
    };
    // column layout: t, zeta(4), sigma(2), eta(2), u(2), xi(6), v, V, nu,
    // cost, z(2), zbar(2)
    series("sliding variable sigma", 6, 7);
    series("sliding coordinate zbar", 24, 25);
    series("control input u", 10, 11);
    series("position tracking error e_y", 2, 3);
    out << "unset multiplot\n";
}

} // namespace mgsta::io
