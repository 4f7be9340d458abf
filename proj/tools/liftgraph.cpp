#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "liftgraph/error.hpp"
#include "liftgraph/io.hpp"
#include "liftgraph/pipeline.hpp"

namespace fs = std::filesystem;
using namespace liftgraph;

namespace {

enum Exit { ok = 0, other = 1, usage = 2, io_failure = 3, numerical = 4 };

struct Flags {
    pipeline::PipelineConfig config;
    std::string task = "cartoon";
    std::string method = "l0cp";
    std::string guide = "auto";
    std::string scaling = "weighted";
    bool no_baseline = false;
};

void add_problem_flags(CLI::App& app, Flags& f)
{
    auto& c = f.config;
    app.add_option("--task", f.task, "cartoon | scribble | stereo")
        ->check(CLI::IsMember({"cartoon", "scribble", "stereo"}));
    app.add_option("--input", c.input, "Input (left) image, PNG or PGM/PPM");
    app.add_option("--right", c.right, "Right image (stereo)");
    app.add_option("--scribbles", c.scribbles, "Scribble label image, 0 = none, v = label v-1");
    app.add_option("--labels", c.labels, "Palette size L (cartoon)");
    app.add_option("--dmax", c.d_max, "Largest disparity (stereo)");
    app.add_option("--window", c.window, "SAD window, odd (stereo)");
    app.add_option("--kmeans-iters", c.kmeans_iters, "Lloyd iterations for the palette");
    app.add_option("--lambda", c.lambda, "Regularization weight");
    app.add_option("--seed", c.seed, "Seed for k-means++ and random solver starts");
}

void add_method_flags(CLI::App& app, Flags& f)
{
    auto& c = f.config;
    app.add_option("--method", f.method, "full | grid | slic | l0cp")
        ->check(CLI::IsMember({"full", "grid", "slic", "l0cp"}));
    app.add_option("--factor", c.factor, "Block size (grid)");
    app.add_option("--k", c.k, "Requested superpixel count (slic)");
    app.add_option("--compactness", c.compactness, "SLIC compactness m");
    app.add_option("--alpha-c", c.alpha_c, "Cut-pursuit boundary cost");
    app.add_option("--cp-iters", c.cp_iters, "Cut-pursuit iteration limit");
    app.add_option("--guide", f.guide, "auto | luma | color | argmin (l0cp)")
        ->check(CLI::IsMember({"auto", "luma", "color", "argmin"}));
}

void add_solver_flags(CLI::App& app, Flags& f)
{
    auto& s = f.config.solver;
    app.add_option("--max-iters", s.max_iters, "Primal-dual iteration limit");
    app.add_option("--tol", s.tolerance, "Relative primal-dual gap tolerance");
    app.add_option("--check-every", s.check_every, "Iterations between gap checks");
    app.add_option("--precondition-alpha", s.precondition_alpha, "Preconditioner exponent in [0,2]");
    app.add_option("--scaling", f.scaling, "weighted | incidence")
        ->check(CLI::IsMember({"weighted", "incidence"}));
    app.add_option("--threads", s.threads, "OpenMP threads for the solver");
}

void finish_flags(Flags& f)
{
    f.config.task = pipeline::parse_task(f.task);
    f.config.method = pipeline::parse_method(f.method);
    f.config.guide = pipeline::parse_guide(f.guide);
    f.config.solver.scaling = f.scaling == "incidence" ? solver::OperatorScaling::incidence
                                                       : solver::OperatorScaling::weighted;
    f.config.solver.seed = f.config.seed;
    f.config.baseline = !f.no_baseline;
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

void print_rows(const std::vector<eval::ReportRow>& rows)
{
    eval::write_report_table(std::cout, rows);
}

int cmd_pipeline(Flags& f)
{
    finish_flags(f);
    const auto result = pipeline::run_pipeline(f.config);
    print_rows(result.rows);
    return ok;
}

int cmd_superpixel(Flags& f)
{
    finish_flags(f);
    auto& c = f.config;
    if (c.out.empty()) throw InvalidInput("--out is required");
    ensure_dir(c.out);
    const auto problem = pipeline::load_problem(c);
    const Partition partition = pipeline::build_partition(problem, c, c.method);
    const ReducedGraph graph = reduce(partition, problem.field);
    io::write_partition(c.out / "partition.pgm", partition);
    io::write_potentials(c.out / "unary.lpot", problem.field);
    io::write_graph(c.out / "graph.lgr", graph);
    fmt::print("{} segments, {} edges, reduction {:.2f}%\n", graph.node_count(),
               graph.edge_count(),
               100.0 * static_cast<double>(graph.node_count()) /
                   static_cast<double>(partition.pixel_count()));
    return ok;
}

struct SolveFlags {
    fs::path graph, partition, unary;
};

int cmd_solve(Flags& f, const SolveFlags& s)
{
    finish_flags(f);
    auto& c = f.config;
    if (c.out.empty()) throw InvalidInput("--out is required");
    if (s.unary.empty() != s.partition.empty())
        throw InvalidInput("--partition and --unary must be given together");
    ensure_dir(c.out);
    const ReducedGraph graph = io::read_graph(s.graph);
    const auto solved = solver::solve_relaxation(graph, c.lambda, c.solver);
    if (solved.diagnostics.status == solver::SolveStatus::numerical_failure)
        throw NumericalError("solver produced non-finite iterates");
    const auto node_labels = solver::round_assignment(solved.assignment);
    {
        std::ofstream out(c.out / "diagnostics.csv", std::ios::binary);
        solver::write_diagnostics_csv(out, solved.diagnostics);
    }
    {
        std::ofstream out(c.out / "node_labels.txt", std::ios::binary);
        for (auto l : node_labels) out << l << '\n';
        if (!out) throw IoError("cannot write node_labels.txt");
    }
    fmt::print("status {} after {} iterations, relaxed energy {:.10g}, rounded {:.10g}\n",
               solver::to_string(solved.diagnostics.status), solved.diagnostics.iterations,
               solved.diagnostics.primal, labeling_energy(graph, node_labels, c.lambda));
    if (s.partition.empty()) return ok;

    const Partition partition = io::read_partition(s.partition);
    const PotentialField field = io::read_potentials(s.unary);
    if (partition.segment_count() != graph.node_count())
        throw InvalidInput("partition segment count does not match the graph");
    if (field.width() != partition.width() || field.height() != partition.height())
        throw InvalidInput("unary and partition differ in size");
    eval::RunRecord rec;
    rec.method = pipeline::to_string(c.method);
    rec.nodes = graph.node_count();
    rec.width = partition.width();
    rec.height = partition.height();
    rec.seconds = solved.diagnostics.seconds;
    rec.memory_bytes = eval::estimate_memory(graph.node_count(), graph.edge_count(),
                                             graph.labels(), partition.pixel_count());
    rec.labels.resize(partition.pixel_count());
    for (std::size_t p = 0; p < rec.labels.size(); ++p)
        rec.labels[p] = node_labels[partition.label(p)];
    rec.energy = labeling_energy(build_grid_graph(field), rec.labels, c.lambda);
    Image gray(partition.width(), partition.height(), 1, 0.0);
    rec.problem = pipeline::make_problem(c.task, std::move(gray), field, c.lambda).identity;
    pipeline::write_run_record(c.out / "run.json", rec, c.out / "labels.png");
    return ok;
}

struct CompareFlags {
    fs::path baseline;
    std::vector<fs::path> runs;
    fs::path out;
};

int cmd_compare(const CompareFlags& f)
{
    const auto base = pipeline::read_run_record(f.baseline);
    std::vector<eval::ReportRow> rows{eval::compare(base, base)};
    for (const auto& r : f.runs) rows.push_back(eval::compare(base, pipeline::read_run_record(r)));
    if (!f.out.empty()) {
        ensure_dir(f.out);
        pipeline::write_reports(f.out, rows);
    }
    print_rows(rows);
    return ok;
}

// Splices the entries of a flat "key = value" config file in front of the
// subcommand's own arguments; with take-last semantics explicit flags win.
std::vector<std::string> expand_config(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string file;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
    }
    if (file.empty()) return args;
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_file(file);
    } catch (const CLI::FileError& e) {
        throw IoError(e.what());
    }
    std::vector<std::string> spliced;
    for (const auto& item : items) {
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == args[0]))
            throw InvalidInput(fmt::format("config: unexpected section for key '{}'", item.name));
        for (const auto& value : item.inputs) spliced.push_back(fmt::format("--{}={}", item.name, value));
    }
    args.insert(args.begin() + 1, spliced.begin(), spliced.end());
    return args;
}

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("liftgraph");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("LIFTGRAPH_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off")
            spdlog::warn("LIFTGRAPH_LOG='{}' is not a log level", env);
        else
            spdlog::set_level(level);
    }
}

} // namespace

int main(int argc, char** argv)
{
    setup_logging();
    CLI::App app{"Convex multi-label relaxations on reduced superpixel graphs"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_file;

    Flags pipe_flags, sp_flags, solve_flags;
    SolveFlags solve_paths;
    CompareFlags compare_flags;

    auto* pipe = app.add_subcommand("pipeline", "Potentials, superpixels, solve and report");
    pipe->add_option("--config", config_file, "Flat key = value config file; flags override it");
    add_problem_flags(*pipe, pipe_flags);
    add_method_flags(*pipe, pipe_flags);
    add_solver_flags(*pipe, pipe_flags);
    pipe->add_option("--out", pipe_flags.config.out, "Output directory")->required();
    pipe->add_flag("--no-baseline", pipe_flags.no_baseline, "Skip the full-grid reference run");

    auto* sp = app.add_subcommand("superpixel", "Write partition, unary and reduced graph");
    sp->add_option("--config", config_file, "Flat key = value config file; flags override it");
    add_problem_flags(*sp, sp_flags);
    add_method_flags(*sp, sp_flags);
    sp->add_option("--out", sp_flags.config.out, "Output directory")->required();

    auto* solve = app.add_subcommand("solve", "Solve a reduced graph file");
    solve->add_option("--config", config_file, "Flat key = value config file; flags override it");
    solve->add_option("--graph", solve_paths.graph, "LGR1 graph file")->required();
    solve->add_option("--partition", solve_paths.partition, "Partition file for reassembly");
    solve->add_option("--unary", solve_paths.unary, "Pixel unary file for the full-grid energy");
    solve->add_option("--lambda", solve_flags.config.lambda, "Regularization weight");
    solve->add_option("--method", solve_flags.method, "Tag recorded in run.json")
        ->check(CLI::IsMember({"full", "grid", "slic", "l0cp"}));
    solve->add_option("--task", solve_flags.task, "Tag recorded in run.json")
        ->check(CLI::IsMember({"cartoon", "scribble", "stereo"}));
    solve->add_option("--seed", solve_flags.config.seed, "Seed for random starts");
    add_solver_flags(*solve, solve_flags);
    solve->add_option("--out", solve_flags.config.out, "Output directory")->required();

    auto* cmp = app.add_subcommand("compare", "Report runs against a baseline run");
    cmp->add_option("--baseline", compare_flags.baseline, "Baseline run.json")->required();
    cmp->add_option("--run", compare_flags.runs, "Run record(s) to compare")->required();
    cmp->add_option("--out", compare_flags.out, "Directory for report.csv/timing.csv");

    try {
        std::vector<std::string> args;
        try {
            args = argc > 1 ? expand_config(argc, argv) : std::vector<std::string>{};
        } catch (const IoError& e) {
            spdlog::error("{}", e.what());
            return io_failure;
        } catch (const std::exception& e) {
            spdlog::error("{}", e.what());
            return usage;
        }
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*pipe) return cmd_pipeline(pipe_flags);
        if (*sp) return cmd_superpixel(sp_flags);
        if (*solve) return cmd_solve(solve_flags, solve_paths);
        if (*cmp) return cmd_compare(compare_flags);
    } catch (const InvalidInput& e) {
        spdlog::error("{}", e.what());
        return usage;
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return io_failure;
    } catch (const NumericalError& e) {
        spdlog::error("{}", e.what());
        return numerical;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return other;
    }
    return other;
}
