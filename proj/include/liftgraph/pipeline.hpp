#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "liftgraph/core.hpp"
#include "liftgraph/eval.hpp"
#include "liftgraph/potentials.hpp"
#include "liftgraph/solver.hpp"
#include "liftgraph/superpixel.hpp"

namespace liftgraph::pipeline {

enum class Task { cartoon, scribble, stereo };
enum class Method { full, grid, slic, l0cp };
/// Field driving the cut pursuit. automatic = luma for images, argmin
/// disparity for stereo.
enum class Guide { automatic, luma, color, argmin };

Task parse_task(const std::string& name);
Method parse_method(const std::string& name);
Guide parse_guide(const std::string& name);
const char* to_string(Task task);
const char* to_string(Method method);

struct PipelineConfig {
    Task task = Task::cartoon;
    std::filesystem::path input;
    std::filesystem::path right;     ///< stereo
    std::filesystem::path scribbles; ///< scribble label map
    std::size_t labels = 8;          ///< cartoon palette size
    std::size_t d_max = 8;           ///< stereo
    std::size_t window = 5;          ///< stereo SAD window
    int kmeans_iters = 20;

    Method method = Method::l0cp;
    std::size_t factor = 4;
    std::size_t k = 1000;
    double compactness = 10.0;
    double alpha_c = 0.1;
    int cp_iters = 10;
    Guide guide = Guide::automatic;

    double lambda = 0.1;
    solver::SolverOptions solver;
    bool baseline = true; ///< also solve the full grid and report against it
    std::filesystem::path out;
    std::uint64_t seed = 0;

    /// Checks task-consistent field presence and value ranges.
    void validate() const;
};

/// Loaded images and pixel potentials of one labeling problem.
struct Problem {
    Task task = Task::cartoon;
    Image image;
    PotentialField field;
    std::optional<potentials::Palette> palette; ///< cartoon
    std::string identity;                       ///< hash of potentials and lambda
};

Problem load_problem(const PipelineConfig& config);
Problem make_problem(Task task, Image image, PotentialField field, double lambda,
                     std::optional<potentials::Palette> palette = std::nullopt);

/// Partition of the requested method (full = per pixel).
Partition build_partition(const Problem& problem, const PipelineConfig& config, Method method);

struct RunOutput {
    eval::RunRecord record;
    Partition partition;
    ReducedGraph graph;
    std::vector<std::uint32_t> node_labels;
    solver::SolveDiagnostics diagnostics;
};

/// Partition + reduce + solve + round + reassemble for one method; the
/// record's time covers everything except potential construction.
RunOutput run_method(const Problem& problem, const PipelineConfig& config, Method method);

/// Result image: palette color (cartoon), scaled disparity (stereo) or mean
/// input color of each label (scribble).
Image render(const Problem& problem, const std::vector<std::uint32_t>& labels);

struct PipelineResult {
    std::optional<RunOutput> baseline;
    RunOutput run;
    std::vector<eval::ReportRow> rows;
};

/// Runs baseline (if enabled) and the configured method, and writes
/// labels.png, result.png, graph.lgr, partition.pgm, diagnostics.csv,
/// report.csv, timing.csv, report.txt and run.json into config.out.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Run record serialization (label map stored alongside as a 16-bit PNG).
void write_run_record(const std::filesystem::path& path, const eval::RunRecord& record,
                      const std::filesystem::path& labels_png);
eval::RunRecord read_run_record(const std::filesystem::path& path);

/// Writes report.csv, timing.csv and report.txt for the given rows; the
/// settings lines are appended to report.txt only.
void write_reports(const std::filesystem::path& dir, const std::vector<eval::ReportRow>& rows,
                   const std::vector<std::string>& settings = {});

} // namespace liftgraph::pipeline
