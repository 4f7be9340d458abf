#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace liftgraph {

/// Pixel image with interleaved channels, values in [0,1].
/// Pixel (x, y), channel c lives at ((y * width + x) * channels + c).
class Image {
public:
    Image() = default;
    Image(std::size_t width, std::size_t height, std::size_t channels,
          std::vector<double> values);
    Image(std::size_t width, std::size_t height, std::size_t channels,
          double fill = 0.0);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }

    double at(std::size_t x, std::size_t y, std::size_t c = 0) const
    {
        return values_[(y * width_ + x) * channels_ + c];
    }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> pixel(std::size_t index) const noexcept
    {
        return {values_.data() + index * channels_, channels_};
    }

    bool operator==(const Image&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> values_;
};

/// Rec. 601 luma of a color image; gray images are returned unchanged.
Image to_gray(const Image& image);

/// Per-pixel, per-label costs rho_k(x); lower is better.
/// Pixel index p, label k lives at (p * labels + k).
class PotentialField {
public:
    PotentialField() = default;
    PotentialField(std::size_t width, std::size_t height, std::size_t labels,
                   std::vector<double> costs);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t labels() const noexcept { return labels_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }

    double cost(std::size_t pixel, std::size_t label) const
    {
        return costs_[pixel * labels_ + label];
    }
    std::span<const double> costs() const noexcept { return costs_; }
    std::span<const double> pixel(std::size_t index) const noexcept
    {
        return {costs_.data() + index * labels_, labels_};
    }

    bool operator==(const PotentialField&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t labels_ = 0;
    std::vector<double> costs_;
};

/// Pixel -> segment map. Every id in [0, M) occurs and every segment is
/// 4-connected. Disconnected ids are split on construction: the component
/// holding the first raster pixel of an id keeps it, the remaining
/// components get fresh ids M, M+1, ... in raster order.
class Partition {
public:
    Partition() = default;
    Partition(std::size_t width, std::size_t height,
              std::vector<std::uint32_t> labels);

    /// One segment per pixel, id = y * width + x.
    static Partition per_pixel(std::size_t width, std::size_t height);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }
    std::size_t segment_count() const noexcept { return segments_; }

    std::uint32_t label(std::size_t pixel) const { return labels_[pixel]; }
    std::uint32_t label(std::size_t x, std::size_t y) const
    {
        return labels_[y * width_ + x];
    }
    std::span<const std::uint32_t> labels() const noexcept { return labels_; }
    std::vector<std::size_t> segment_sizes() const;

    /// True if every segment of *this lies inside one segment of coarser.
    bool refines(const Partition& coarser) const;

    bool operator==(const Partition&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t segments_ = 0;
    std::vector<std::uint32_t> labels_;
};

/// 4-connected components of equal values; ids are assigned in raster order
/// of each component's first pixel. Returns the component count.
std::size_t label_components(std::size_t width, std::size_t height,
                             std::span<const std::uint32_t> values,
                             std::vector<std::uint32_t>& components);

struct Edge {
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    double weight = 0.0;

    bool operator==(const Edge&) const = default;
};

/// Weighted region adjacency graph G = (V, E, w) with aggregated costs.
/// Edges are stored sorted by (i, j) with i < j; weights are shared boundary
/// lengths in pixel-edge units.
class ReducedGraph {
public:
    ReducedGraph() = default;
    ReducedGraph(std::size_t labels, std::vector<double> node_area,
                 std::vector<double> node_potentials, std::vector<Edge> edges);

    std::size_t node_count() const noexcept { return node_area_.size(); }
    std::size_t labels() const noexcept { return labels_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    std::span<const double> node_area() const noexcept { return node_area_; }
    std::span<const double> node_potentials() const noexcept
    {
        return node_potentials_;
    }
    std::span<const double> potentials(std::size_t node) const noexcept
    {
        return {node_potentials_.data() + node * labels_, labels_};
    }
    std::span<const Edge> edges() const noexcept { return edges_; }

    bool operator==(const ReducedGraph&) const = default;

private:
    std::size_t labels_ = 0;
    std::vector<double> node_area_;
    std::vector<double> node_potentials_;
    std::vector<Edge> edges_;
};

/// Relaxed labeling c: one unit-simplex vector per node (tolerance 1e-9).
class Assignment {
public:
    static constexpr double simplex_tolerance = 1e-9;

    Assignment() = default;
    Assignment(std::size_t nodes, std::size_t labels, std::vector<double> values);

    /// Barycenter (1/L, ..., 1/L) everywhere.
    static Assignment uniform(std::size_t nodes, std::size_t labels);
    static Assignment one_hot(std::span<const std::uint32_t> node_labels,
                              std::size_t labels);

    std::size_t node_count() const noexcept { return nodes_; }
    std::size_t labels() const noexcept { return labels_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> node(std::size_t i) const noexcept
    {
        return {values_.data() + i * labels_, labels_};
    }

    bool operator==(const Assignment&) const = default;

private:
    std::size_t nodes_ = 0;
    std::size_t labels_ = 0;
    std::vector<double> values_;
};

/// Full-grid discretization: one node per pixel, unit area, unit-weight
/// edges between 4-neighbors.
ReducedGraph build_grid_graph(const PotentialField& field);

/// Aggregates costs over each segment and counts shared pixel edges between
/// adjacent segments.
ReducedGraph reduce(const Partition& partition, const PotentialField& field);

/// Expands per-node vectors (components values per node) to per-pixel
/// vectors. Output layout is pixel-major.
std::vector<double> reassemble(const Partition& partition,
                               std::span<const double> node_values,
                               std::size_t components = 1);

/// Per-pixel assignment that copies c_i to every pixel of segment i.
Assignment lift(const Partition& partition, const Assignment& assignment);

/// F(c) = sum_i <c_i, f_i> + (lambda / 2) sum_{(i,j)} w_ij sum_k |c_ik - c_jk|.
double energy(const ReducedGraph& graph, const Assignment& assignment,
              double lambda);

/// Energy of a discrete labeling (the one-hot assignment of node_labels).
double labeling_energy(const ReducedGraph& graph,
                       std::span<const std::uint32_t> node_labels,
                       double lambda);

} // namespace liftgraph
