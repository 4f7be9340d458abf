#include "liftgraph/eval.hpp"

#include <cmath>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "liftgraph/error.hpp"

namespace liftgraph::eval {

void RunRecord::validate() const
{
    if (nodes < 1) throw InvalidInput("run record: node count must be >= 1");
    if (!std::isfinite(energy)) throw InvalidInput("run record: energy is not finite");
    if (!std::isfinite(seconds) || seconds < 0.0)
        throw InvalidInput("run record: invalid wall-clock time");
    if (!labels.empty() && labels.size() != width * height)
        throw InvalidInput("run record: label map does not match its dimensions");
}

ReportRow compare(const RunRecord& baseline, const RunRecord& run)
{
    baseline.validate();
    run.validate();
    if (baseline.problem != run.problem)
        throw InvalidInput(fmt::format("compare: problem '{}' differs from baseline '{}'",
                                       run.problem, baseline.problem));
    if (baseline.width != run.width || baseline.height != run.height)
        throw InvalidInput("compare: image dimensions differ");

    ReportRow row;
    row.method = run.method;
    row.nodes = run.nodes;
    row.reduction_rate = static_cast<double>(run.nodes) / static_cast<double>(baseline.nodes);
    row.time_saved = baseline.seconds > 0.0 ? 1.0 - run.seconds / baseline.seconds : 0.0;
    row.memory_bytes = run.memory_bytes;
    row.energy = run.energy;
    const double diff = run.energy - baseline.energy;
    row.energy_offset = diff == 0.0 ? 0.0 : diff / std::abs(baseline.energy);
    row.seconds = run.seconds;
    return row;
}

std::size_t estimate_memory(std::size_t nodes, std::size_t edges, std::size_t labels,
                            std::size_t pixels)
{
    const std::size_t d = sizeof(double);
    const std::size_t unaries = pixels * labels * d;
    const std::size_t node_arrays = nodes * (labels * d * 4 + 2 * d); // f, c, c_prev, c_bar; area, tau
    const std::size_t edge_arrays = edges * (labels * d + 2 * sizeof(std::uint32_t) + 2 * d);
    const std::size_t partition = pixels * sizeof(std::uint32_t);
    return unaries + node_arrays + edge_arrays + partition;
}

namespace {

void check_same_shape(const Image& a, const Image& b)
{
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
        throw InvalidInput(fmt::format("image metric: {}x{}x{} vs {}x{}x{}", a.width(),
                                       a.height(), a.channels(), b.width(), b.height(),
                                       b.channels()));
    if (a.pixel_count() == 0) throw InvalidInput("image metric: empty images");
}

} // namespace

double psnr(const Image& a, const Image& b)
{
    check_same_shape(a, b);
    const auto va = a.values(), vb = b.values();
    double sse = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) sse += (va[i] - vb[i]) * (va[i] - vb[i]);
    const double mse = sse / static_cast<double>(va.size());
    if (mse < 1e-10) return 99.0;
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b)
{
    check_same_shape(a, b);
    constexpr std::size_t win = 8;
    constexpr double c1 = (0.01 * 0.01), c2 = (0.03 * 0.03);
    const std::size_t w = a.width(), h = a.height(), nc = a.channels();
    const std::size_t ww = std::min(win, w), wh = std::min(win, h);
    const double n = static_cast<double>(ww * wh);
    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t y0 = 0; y0 + wh <= h; ++y0)
            for (std::size_t x0 = 0; x0 + ww <= w; ++x0) {
                double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
                for (std::size_t y = y0; y < y0 + wh; ++y)
                    for (std::size_t x = x0; x < x0 + ww; ++x) {
                        const double pa = a.at(x, y, c), pb = b.at(x, y, c);
                        sa += pa;
                        sb += pb;
                        saa += pa * pa;
                        sbb += pb * pb;
                        sab += pa * pb;
                    }
                const double ma = sa / n, mb = sb / n;
                const double va = saa / n - ma * ma, vb = sbb / n - mb * mb;
                const double cov = sab / n - ma * mb;
                total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                         ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++windows;
            }
    return total / static_cast<double>(windows);
}

double dice(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b)
{
    if (a.size() != b.size())
        throw InvalidInput(fmt::format("dice: label maps of size {} and {}", a.size(), b.size()));
    if (a.empty()) throw InvalidInput("dice: empty label maps");
    struct Counts {
        std::size_t in_a = 0, in_b = 0, both = 0;
    };
    std::unordered_map<std::uint32_t, Counts> counts;
    for (std::size_t p = 0; p < a.size(); ++p) {
        ++counts[a[p]].in_a;
        ++counts[b[p]].in_b;
        if (a[p] == b[p]) ++counts[a[p]].both;
    }
    double sum = 0.0;
    for (const auto& [label, c] : counts)
        sum += 2.0 * static_cast<double>(c.both) / static_cast<double>(c.in_a + c.in_b);
    return sum / static_cast<double>(counts.size());
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows)
{
    out << "method,nodes,reduction_rate,memory_bytes,energy,energy_offset\n";
    for (const auto& r : rows)
        fmt::print(out, "{},{},{:.17g},{},{:.17g},{:.17g}\n", r.method, r.nodes,
                   r.reduction_rate, r.memory_bytes, r.energy, r.energy_offset);
}

void write_timing_csv(std::ostream& out, std::span<const ReportRow> rows)
{
    out << "method,seconds,time_saved\n";
    for (const auto& r : rows)
        fmt::print(out, "{},{:.6f},{:.6f}\n", r.method, r.seconds, r.time_saved);
}

void write_report_table(std::ostream& out, std::span<const ReportRow> rows)
{
    fmt::print(out, "{:<8} {:>9} {:>10} {:>10} {:>10} {:>16} {:>10}\n", "method", "nodes",
               "reduction", "time", "memory", "energy", "offset");
    for (const auto& r : rows)
        fmt::print(out, "{:<8} {:>9} {:>9.2f}% {:>9.2f}% {:>8.2f}MB {:>16.6g} {:>9.3f}%\n",
                   r.method, r.nodes, 100.0 * r.reduction_rate, 100.0 * r.time_saved,
                   static_cast<double>(r.memory_bytes) / 1048576.0, r.energy,
                   100.0 * r.energy_offset);
}

} // namespace liftgraph::eval
