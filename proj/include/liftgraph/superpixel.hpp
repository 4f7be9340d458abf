#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "liftgraph/core.hpp"

namespace liftgraph::superpixel {

/// Axis-aligned factor x factor blocks (ragged at the right/bottom border),
/// ids in raster order of blocks.
Partition grid_subsample(std::size_t width, std::size_t height, std::size_t factor);

/// Maximal 4-connected regions of equal value, ids in raster order of each
/// region's first pixel.
Partition connected_components(std::size_t width, std::size_t height,
                               std::span<const std::uint32_t> values);
Partition connected_components(std::size_t width, std::size_t height,
                               const std::vector<bool>& mask);

struct SlicParams {
    std::size_t superpixels = 100;   ///< requested count K
    double compactness = 10.0;       ///< m, on [0,1]-scaled color
    int iterations = 10;
    double min_size_fraction = 0.25; ///< fragments below this * (N/K) are merged
};

/// SLIC clustering with distance d = |color - c| + (m / S) |xy - c_xy|,
/// S = sqrt(N / K), searched in a 2S x 2S window around each center, followed
/// by connectivity enforcement.
Partition slic(const Image& image, const SlicParams& params);

/// Scalar or multi-channel field driving the cut pursuit. Values may be any
/// finite reals (e.g. disparity indices).
struct GuideField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;
    std::vector<double> values; ///< pixel-major, channels interleaved
};

GuideField guide_from_image(const Image& image);
GuideField guide_from_scalar(std::size_t width, std::size_t height,
                             std::vector<double> values);

struct BinaryCut {
    std::vector<bool> in_set; ///< B
    double objective = 0.0;   ///< sum_x unary(x) 1_B(x) + alpha * |cut edges|
};

/// Exact minimizer of sum_x unary(x) 1_B(x) + alpha * (number of 4-neighbor
/// pairs separated by B) via one max-flow. Among minimizers, B is the
/// smallest one (source-reachable set).
BinaryCut binary_cut(std::size_t width, std::size_t height,
                     std::span<const double> unary, double alpha);

/// Objective of an arbitrary set B for the same problem.
double binary_cut_objective(std::size_t width, std::size_t height,
                            std::span<const double> unary, double alpha,
                            const std::vector<bool>& in_set);

struct CutPursuitState {
    Partition partition;
    std::vector<double> means; ///< segment-major, guide channels interleaved
    int iteration = 0;
};

/// L0 cut pursuit: alternates a global binary cut against the current
/// piecewise-constant approximation with per-segment averaging. New segments
/// are the connected components of B and its complement inside each current
/// segment, so every iterate refines the previous one.
class L0CutPursuit {
public:
    static constexpr double improvement_tolerance = 1e-12;

    L0CutPursuit(GuideField guide, double alpha_c);

    /// Runs one cut + refine + average step. Returns false when the pursuit
    /// has converged (no strictly improving cut, or the cut did not split
    /// any segment); the state is then unchanged.
    bool step();

    /// Steps until convergence or until `max_iters` cuts have been computed.
    void run(int max_iters);

    const CutPursuitState& state() const noexcept { return state_; }
    const GuideField& guide() const noexcept { return guide_; }
    bool converged() const noexcept { return converged_; }

    /// Unary of the next cut: sum over channels of (u(x) - g(x)).
    std::vector<double> cut_unary() const;
    /// The cut computed by the most recent step().
    const BinaryCut& last_cut() const noexcept { return last_cut_; }
    /// sum_x |u(x) - g(x)|^2 for the current approximation.
    double approximation_error() const;

private:
    void recompute_means();

    GuideField guide_;
    double alpha_c_;
    CutPursuitState state_;
    BinaryCut last_cut_;
    bool converged_ = false;
};

Partition l0_cut_pursuit(const GuideField& guide, double alpha_c, int max_iters = 10);

} // namespace liftgraph::superpixel
