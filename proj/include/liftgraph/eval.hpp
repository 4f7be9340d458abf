#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "liftgraph/core.hpp"

namespace liftgraph::eval {

/// One solved discretization of a labeling problem.
struct RunRecord {
    std::string method;       ///< grid | slic | l0cp | full
    std::string problem;      ///< identity of image, potentials and lambda
    std::size_t nodes = 0;
    double seconds = 0.0;     ///< graph construction + solve
    std::size_t memory_bytes = 0;
    double energy = 0.0;      ///< rounded labeling, full-grid energy after reassembly
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint32_t> labels; ///< per pixel

    void validate() const;
};

struct ReportRow {
    std::string method;
    std::size_t nodes = 0;
    double reduction_rate = 1.0;
    double time_saved = 0.0;
    std::size_t memory_bytes = 0;
    double energy = 0.0;
    double energy_offset = 0.0;
    double seconds = 0.0;
};

/// reduction_rate = M_run / M_base, time_saved = 1 - t_run / t_base,
/// energy_offset = (E_run - E_base) / |E_base| (0 when both energies are 0).
ReportRow compare(const RunRecord& baseline, const RunRecord& run);

/// Byte estimate for potentials, primal, dual and graph arrays of a solve.
std::size_t estimate_memory(std::size_t nodes, std::size_t edges, std::size_t labels,
                            std::size_t pixels);

/// 10 log10(1 / MSE) for values in [0,1], 99 dB when MSE < 1e-10.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over all 8x8 windows (stride 1), channel-averaged.
double ssim(const Image& a, const Image& b);

/// Mean over labels present in either map of 2|A_k & B_k| / (|A_k| + |B_k|).
double dice(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Deterministic columns: method,nodes,reduction_rate,memory_bytes,energy,energy_offset.
void write_report_csv(std::ostream& out, std::span<const ReportRow> rows);
/// Wall-clock columns: method,seconds,time_saved.
void write_timing_csv(std::ostream& out, std::span<const ReportRow> rows);
/// Aligned table of all columns.
void write_report_table(std::ostream& out, std::span<const ReportRow> rows);

} // namespace liftgraph::eval
