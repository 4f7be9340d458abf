#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "liftgraph/core.hpp"

namespace liftgraph::potentials {

/// L target colors, each a vector of `channels` values in [0,1].
struct Palette {
    std::size_t channels = 0;
    std::vector<double> colors; ///< color-major

    std::size_t size() const noexcept { return channels ? colors.size() / channels : 0; }
    std::span<const double> color(std::size_t k) const
    {
        return {colors.data() + k * channels, channels};
    }
};

/// k-means++ seeding (driven by `seed`) followed by Lloyd iterations on
/// pixel colors. With fewer distinct colors than `labels` duplicate centers
/// are emitted and a warning is logged. If `cost_history` is given it
/// receives the within-cluster squared error after seeding and after each
/// Lloyd iteration.
Palette kmeans_palette(const Image& image, std::size_t labels, int iterations,
                       std::uint64_t seed, std::vector<double>* cost_history = nullptr);

/// Sum over pixels of the squared distance to the nearest palette color.
double kmeans_cost(const Image& image, const Palette& palette);

/// rho_k(x) = |color(x) - palette_k|_1.
PotentialField cartoon_costs(const Image& image, const Palette& palette);

/// Scribbled pixel indices per label.
struct ScribbleSet {
    std::vector<std::vector<std::size_t>> pixels;

    std::size_t labels() const noexcept { return pixels.size(); }

    /// Label map convention: 0 = not scribbled, value v > 0 = label v - 1.
    static ScribbleSet from_label_map(std::size_t width, std::size_t height,
                                      std::span<const std::uint32_t> map);
};

/// Per label a Gaussian over (color, x / (w-1), y / (h-1)) of its scribbles,
/// covariance regularized by 1e-4 I (diagonal when a label has fewer than 4
/// scribbles). Costs are negative log-densities shifted so that
/// min_k rho_k(x) = 0.
PotentialField scribble_costs(const Image& image, const ScribbleSet& scribbles);

/// Truncated SAD on luma: rho_d(x,y) = min(T, sum_window |L(x,y) - R(x-d,y)|),
/// out-of-range samples replicate the border. A negative truncation selects
/// T = 0.5 * window^2.
PotentialField stereo_cost_volume(const Image& left, const Image& right,
                                  std::size_t d_max, std::size_t window,
                                  double truncation = -1.0);

/// g(x) = argmin_k rho_k(x), ties to the smallest k.
std::vector<double> argmin_map(const PotentialField& costs);

/// Values at 0..L-1 of the lower convex hull of {(k, samples_k)}.
std::vector<double> convex_envelope(std::span<const double> samples);

/// envelope(sum_{x in P_i} rho(x)) for every node of a reduced graph.
std::vector<double> node_envelopes(const ReducedGraph& graph);

} // namespace liftgraph::potentials
