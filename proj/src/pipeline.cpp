#include "liftgraph/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "liftgraph/error.hpp"
#include "liftgraph/io.hpp"

namespace liftgraph::pipeline {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

Task parse_task(const std::string& name)
{
    if (name == "cartoon") return Task::cartoon;
    if (name == "scribble") return Task::scribble;
    if (name == "stereo") return Task::stereo;
    throw InvalidInput(fmt::format("unknown task '{}'", name));
}

Method parse_method(const std::string& name)
{
    if (name == "full") return Method::full;
    if (name == "grid") return Method::grid;
    if (name == "slic") return Method::slic;
    if (name == "l0cp") return Method::l0cp;
    throw InvalidInput(fmt::format("unknown method '{}'", name));
}

Guide parse_guide(const std::string& name)
{
    if (name == "auto") return Guide::automatic;
    if (name == "luma") return Guide::luma;
    if (name == "color") return Guide::color;
    if (name == "argmin") return Guide::argmin;
    throw InvalidInput(fmt::format("unknown guide '{}'", name));
}

const char* to_string(Task task)
{
    switch (task) {
    case Task::cartoon: return "cartoon";
    case Task::scribble: return "scribble";
    case Task::stereo: return "stereo";
    }
    return "unknown";
}

const char* to_string(Method method)
{
    switch (method) {
    case Method::full: return "full";
    case Method::grid: return "grid";
    case Method::slic: return "slic";
    case Method::l0cp: return "l0cp";
    }
    return "unknown";
}

void PipelineConfig::validate() const
{
    if (input.empty()) throw InvalidInput("config: input image is required");
    if (task == Task::stereo && right.empty())
        throw InvalidInput("config: stereo task needs a right image");
    if (task == Task::scribble && scribbles.empty())
        throw InvalidInput("config: scribble task needs a scribble map");
    if (task == Task::cartoon && labels < 1) throw InvalidInput("config: labels must be >= 1");
    if (task == Task::stereo && window % 2 == 0)
        throw InvalidInput("config: stereo window must be odd");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidInput("config: lambda must be finite and >= 0");
    if (method == Method::grid && factor < 1) throw InvalidInput("config: factor must be >= 1");
    if (method == Method::slic && (k < 1 || !(compactness > 0.0)))
        throw InvalidInput("config: slic needs k >= 1 and compactness > 0");
    if (method == Method::l0cp && !(alpha_c > 0.0))
        throw InvalidInput("config: alpha_c must be > 0");
    if (cp_iters < 0) throw InvalidInput("config: cp_iters must be >= 0");
    if (kmeans_iters < 0) throw InvalidInput("config: kmeans_iters must be >= 0");
    if (solver.threads < 1) throw InvalidInput("config: threads must be >= 1");
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t size)
{
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

double elapsed(clock_type::time_point start)
{
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

fs::path sibling(const fs::path& json_path, const std::string& name)
{
    return json_path.parent_path() / name;
}

} // namespace

Problem make_problem(Task task, Image image, PotentialField field, double lambda,
                     std::optional<potentials::Palette> palette)
{
    if (image.width() != field.width() || image.height() != field.height())
        throw InvalidInput("problem: image and potentials differ in size");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const std::uint64_t dims[3] = {field.width(), field.height(), field.labels()};
    h = fnv1a(h, dims, sizeof dims);
    h = fnv1a(h, field.costs().data(), field.costs().size_bytes());
    Problem p;
    p.task = task;
    p.identity = fmt::format("{}:{}x{}x{}:{:016x}:lambda={:.17g}", to_string(task), field.width(),
                             field.height(), field.labels(), h, lambda);
    p.image = std::move(image);
    p.field = std::move(field);
    p.palette = std::move(palette);
    return p;
}

Problem load_problem(const PipelineConfig& config)
{
    config.validate();
    Image image = io::read_image(config.input);
    switch (config.task) {
    case Task::cartoon: {
        auto palette = potentials::kmeans_palette(image, config.labels, config.kmeans_iters,
                                                  config.seed);
        auto field = potentials::cartoon_costs(image, palette);
        return make_problem(config.task, std::move(image), std::move(field), config.lambda,
                            std::move(palette));
    }
    case Task::scribble: {
        const io::LabelMap map = io::read_label_map(config.scribbles);
        if (map.width != image.width() || map.height != image.height())
            throw InvalidInput("scribble map and image differ in size");
        const auto set = potentials::ScribbleSet::from_label_map(map.width, map.height, map.labels);
        auto field = potentials::scribble_costs(image, set);
        return make_problem(config.task, std::move(image), std::move(field), config.lambda);
    }
    case Task::stereo: {
        const Image right = io::read_image(config.right);
        auto field = potentials::stereo_cost_volume(image, right, config.d_max, config.window);
        return make_problem(config.task, std::move(image), std::move(field), config.lambda);
    }
    }
    throw InvalidInput("unknown task");
}

Partition build_partition(const Problem& problem, const PipelineConfig& config, Method method)
{
    const std::size_t w = problem.field.width(), h = problem.field.height();
    switch (method) {
    case Method::full: return Partition::per_pixel(w, h);
    case Method::grid:
        if (config.factor > std::min(w, h))
            throw InvalidInput(fmt::format("grid factor {} exceeds image size", config.factor));
        return superpixel::grid_subsample(w, h, config.factor);
    case Method::slic: {
        superpixel::SlicParams params;
        params.superpixels = config.k;
        params.compactness = config.compactness;
        return superpixel::slic(problem.image, params);
    }
    case Method::l0cp: {
        Guide guide = config.guide;
        if (guide == Guide::automatic)
            guide = problem.task == Task::stereo ? Guide::argmin : Guide::luma;
        superpixel::GuideField field;
        switch (guide) {
        case Guide::argmin:
            field = superpixel::guide_from_scalar(w, h, potentials::argmin_map(problem.field));
            break;
        case Guide::color: field = superpixel::guide_from_image(problem.image); break;
        default: field = superpixel::guide_from_image(to_gray(problem.image)); break;
        }
        return superpixel::l0_cut_pursuit(field, config.alpha_c, config.cp_iters);
    }
    }
    throw InvalidInput("unknown method");
}

RunOutput run_method(const Problem& problem, const PipelineConfig& config, Method method)
{
    const auto start = clock_type::now();
    RunOutput out;
    out.partition = build_partition(problem, config, method);
    out.graph = method == Method::full ? build_grid_graph(problem.field)
                                       : reduce(out.partition, problem.field);
    auto solved = solver::solve_relaxation(out.graph, config.lambda, config.solver);
    out.diagnostics = std::move(solved.diagnostics);
    if (out.diagnostics.status == solver::SolveStatus::numerical_failure)
        throw NumericalError(fmt::format("solver produced non-finite iterates on the {} graph",
                                         to_string(method)));
    if (out.diagnostics.status == solver::SolveStatus::max_iterations)
        spdlog::warn("{}: solver stopped at max_iters={} (gap {:.3g})", to_string(method),
                     out.diagnostics.iterations,
                     out.diagnostics.history.empty() ? 0.0 : out.diagnostics.history.back().gap);
    out.node_labels = solver::round_assignment(solved.assignment);

    auto& rec = out.record;
    rec.labels.resize(out.partition.pixel_count());
    for (std::size_t p = 0; p < rec.labels.size(); ++p)
        rec.labels[p] = out.node_labels[out.partition.label(p)];
    rec.seconds = elapsed(start);

    rec.method = to_string(method);
    rec.problem = problem.identity;
    rec.nodes = out.graph.node_count();
    rec.width = problem.field.width();
    rec.height = problem.field.height();
    rec.memory_bytes = eval::estimate_memory(out.graph.node_count(), out.graph.edge_count(),
                                             out.graph.labels(), problem.field.pixel_count());
    rec.energy = method == Method::full
                     ? labeling_energy(out.graph, out.node_labels, config.lambda)
                     : labeling_energy(build_grid_graph(problem.field), rec.labels, config.lambda);
    spdlog::info("{}: nodes={} edges={} energy={:.6g} iters={} status={} t={:.3f}s", rec.method,
                 rec.nodes, out.graph.edge_count(), rec.energy, out.diagnostics.iterations,
                 solver::to_string(out.diagnostics.status), rec.seconds);
    return out;
}

Image render(const Problem& problem, const std::vector<std::uint32_t>& labels)
{
    const std::size_t w = problem.field.width(), h = problem.field.height();
    const std::size_t nl = problem.field.labels();
    if (labels.size() != w * h) throw InvalidInput("render: label map size mismatch");
    if (problem.task == Task::stereo) {
        std::vector<double> v(labels.size());
        const double top = nl > 1 ? static_cast<double>(nl - 1) : 1.0;
        for (std::size_t p = 0; p < v.size(); ++p) v[p] = labels[p] / top;
        return Image(w, h, 1, std::move(v));
    }
    const std::size_t nc = problem.image.channels();
    std::vector<double> colors(nl * nc, 0.0);
    if (problem.palette) {
        colors = problem.palette->colors;
    } else {
        std::vector<std::size_t> counts(nl, 0);
        for (std::size_t p = 0; p < labels.size(); ++p) {
            auto px = problem.image.pixel(p);
            for (std::size_t c = 0; c < nc; ++c) colors[labels[p] * nc + c] += px[c];
            ++counts[labels[p]];
        }
        for (std::size_t k = 0; k < nl; ++k)
            for (std::size_t c = 0; c < nc; ++c)
                if (counts[k]) colors[k * nc + c] /= static_cast<double>(counts[k]);
    }
    std::vector<double> v(labels.size() * nc);
    for (std::size_t p = 0; p < labels.size(); ++p)
        for (std::size_t c = 0; c < nc; ++c) v[p * nc + c] = colors[labels[p] * nc + c];
    return Image(w, h, nc, std::move(v));
}

void write_run_record(const fs::path& path, const eval::RunRecord& record,
                      const fs::path& labels_png)
{
    io::write_label_png(labels_png, record.width, record.height, record.labels);
    nlohmann::ordered_json j;
    j["method"] = record.method;
    j["problem"] = record.problem;
    j["nodes"] = record.nodes;
    j["seconds"] = record.seconds;
    j["memory_bytes"] = record.memory_bytes;
    j["energy"] = record.energy;
    j["width"] = record.width;
    j["height"] = record.height;
    j["labels"] = labels_png.filename().string();
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << j.dump(2) << '\n';
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

eval::RunRecord read_run_record(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
    eval::RunRecord r;
    try {
        const auto j = nlohmann::json::parse(in);
        r.method = j.at("method").get<std::string>();
        r.problem = j.at("problem").get<std::string>();
        r.nodes = j.at("nodes").get<std::size_t>();
        r.seconds = j.at("seconds").get<double>();
        r.memory_bytes = j.at("memory_bytes").get<std::size_t>();
        r.energy = j.at("energy").get<double>();
        r.width = j.at("width").get<std::size_t>();
        r.height = j.at("height").get<std::size_t>();
        const auto map = io::read_label_map(sibling(path, j.at("labels").get<std::string>()));
        if (map.width != r.width || map.height != r.height)
            throw IoError(fmt::format("{}: label map size does not match record", path.string()));
        r.labels = map.labels;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(fmt::format("{}: malformed run record: {}", path.string(), e.what()));
    }
    r.validate();
    return r;
}

void write_reports(const fs::path& dir, const std::vector<eval::ReportRow>& rows,
                   const std::vector<std::string>& settings)
{
    auto open = [&](const char* name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw IoError(fmt::format("cannot write {}", (dir / name).string()));
        return f;
    };
    {
        auto f = open("report.csv");
        eval::write_report_csv(f, rows);
    }
    {
        auto f = open("timing.csv");
        eval::write_timing_csv(f, rows);
    }
    {
        auto f = open("report.txt");
        eval::write_report_table(f, rows);
        if (!settings.empty()) {
            f << "\nsettings:\n";
            for (const auto& s : settings) f << "  " << s << '\n';
        }
    }
}

namespace {

// Choices the numbers depend on, echoed under the report table.
std::vector<std::string> report_settings(const PipelineConfig& c)
{
    std::vector<std::string> s;
    s.push_back(fmt::format("task {}, method {}, lambda {}", to_string(c.task), to_string(c.method), c.lambda));
    if (c.method == Method::grid) s.push_back(fmt::format("grid factor {}", c.factor));
    if (c.method == Method::slic)
        s.push_back(fmt::format("slic k {}, compactness {}", c.k, c.compactness));
    if (c.method == Method::l0cp)
        s.push_back(fmt::format("cut pursuit alpha_c {}, max cuts {}", c.alpha_c, c.cp_iters));
    if (c.task == Task::stereo)
        s.push_back(fmt::format("stereo cost: truncated SAD on luma, d_max {}, window {}, truncation {}",
                                c.d_max, c.window, 0.5 * static_cast<double>(c.window * c.window)));
    if (c.task == Task::cartoon)
        s.push_back(fmt::format("palette: k-means++ with {} colors, {} Lloyd iterations, seed {}", c.labels,
                                c.kmeans_iters, c.seed));
    s.push_back(fmt::format("solver: stop at relative gap (P-D)/(|P|+1) <= {} checked every {} iterations, "
                            "max {} iterations, {} scaling",
                            c.solver.tolerance, c.solver.check_every, c.solver.max_iters,
                            c.solver.scaling == solver::OperatorScaling::weighted ? "weighted" : "incidence"));
    s.push_back("energies: rounded labels evaluated on the full pixel grid");
    s.push_back("memory: 8 bytes x (pixels*L + nodes*(4L+2) + edges*(L+2)) + 8 bytes x edges (indices) "
                "+ 4 bytes x pixels");
    s.push_back("wall-clock times are in timing.csv");
    return s;
}

} // namespace

PipelineResult run_pipeline(const PipelineConfig& config)
{
    config.validate();
    if (config.out.empty()) throw InvalidInput("config: output directory is required");
    std::error_code ec;
    fs::create_directories(config.out, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", config.out.string(), ec.message()));

    const Problem problem = load_problem(config);
    PipelineResult result;
    if (config.baseline && config.method != Method::full)
        result.baseline = run_method(problem, config, Method::full);
    result.run = run_method(problem, config, config.method);
    if (config.baseline && config.method == Method::full) result.baseline = result.run;

    const fs::path& dir = config.out;
    const RunOutput& run = result.run;
    write_run_record(dir / "run.json", run.record, dir / "labels.png");
    io::write_image(dir / "result.png", render(problem, run.record.labels));
    io::write_graph(dir / "graph.lgr", run.graph);
    io::write_partition(dir / "partition.pgm", run.partition);
    {
        std::ofstream f(dir / "diagnostics.csv", std::ios::binary);
        solver::write_diagnostics_csv(f, run.diagnostics);
    }
    if (result.baseline && config.method != Method::full) {
        write_run_record(dir / "baseline_run.json", result.baseline->record,
                         dir / "baseline_labels.png");
        std::ofstream f(dir / "baseline_diagnostics.csv", std::ios::binary);
        solver::write_diagnostics_csv(f, result.baseline->diagnostics);
    }

    if (result.baseline) {
        result.rows.push_back(eval::compare(result.baseline->record, result.baseline->record));
        if (config.method != Method::full)
            result.rows.push_back(eval::compare(result.baseline->record, run.record));
    } else {
        eval::ReportRow row;
        row.method = run.record.method;
        row.nodes = run.record.nodes;
        row.reduction_rate = static_cast<double>(run.record.nodes) /
                             static_cast<double>(problem.field.pixel_count());
        row.time_saved = std::numeric_limits<double>::quiet_NaN();
        row.memory_bytes = run.record.memory_bytes;
        row.energy = run.record.energy;
        row.energy_offset = std::numeric_limits<double>::quiet_NaN();
        row.seconds = run.record.seconds;
        result.rows.push_back(row);
    }
    write_reports(dir, result.rows, report_settings(config));
    return result;
}

} // namespace liftgraph::pipeline
