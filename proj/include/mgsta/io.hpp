#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mgsta/analysis.hpp"
#include "mgsta/model.hpp"
#include "mgsta/sim.hpp"
#include "mgsta/synthesis.hpp"
#include "mgsta/trailer.hpp"

namespace mgsta::io {

/// Parsed run configuration. Matrices are row-major nested arrays in the
/// JSON file; dimensions are inferred and validated on load.
struct RunConfig {
    std::optional<model::PolytopicPlant> plant;
    std::optional<model::DesignConfig> design;
    synthesis::SearchGrid grid;
    sim::SimConfig sim;
    sdp::SolverSettings solver;
    trailer::TrailerParams trailer_params;
    bool has_trailer_section = false;
    // generic-disturbance description for the `simulate` command
    std::string disturbance_type = "zero"; // "zero" | "sine"
    Vector disturbance_amplitude, disturbance_frequency;
    double disturbance_bound = 0.0;        // declared ||f_dot|| bound; 0 = auto
    std::optional<sim::Gains> gains;       // optional fixed gains
};

/// Loads a JSON config file, applying dotted-key overrides
/// ("design.alpha=12.5") before parsing. Throws std::runtime_error with a
/// parse diagnostic on malformed input.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// In-memory variant used by the embedded defaults and tests.
RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides = {});

/// JSON text of the built-in trailer benchmark configuration.
std::string default_trailer_config_text();

std::string to_json(const synthesis::SynthesisResult& result);
synthesis::SynthesisResult result_from_json(const std::string& text);

void write_result(const synthesis::SynthesisResult& result,
                  const std::filesystem::path& path);
synthesis::SynthesisResult read_result(const std::filesystem::path& path);

/// alpha, rho, theta, status rows.
void write_landscape_csv(const std::vector<synthesis::SearchPoint>& points,
                         const std::filesystem::path& path);

/// Columns: t, zeta_*, sigma_*, eta_*, u_*, xi_*, v, V, nu, cost_integral
/// and, when available, z_*, zbar_*. The first line is a version header.
void write_trajectory_csv(const sim::TrajectoryRecord& record,
                          const std::filesystem::path& path);

void write_summary_csv(const std::vector<trailer::VertexRunSummary>& rows,
                       const std::filesystem::path& path);

void write_verification_csv(const std::vector<analysis::VerificationRow>& rows,
                            const std::filesystem::path& path);

/// gnuplot script reproducing the benchmark panels (sliding variables,
/// control effort, tracking) from the per-vertex CSV files.
void write_plot_script(const std::filesystem::path& out_dir, int vertices);

} // namespace mgsta::io
