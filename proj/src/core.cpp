#include "liftgraph/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "liftgraph/error.hpp"

namespace liftgraph {

namespace {

bool all_finite(std::span<const double> values)
{
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

} // namespace

Image::Image(std::size_t width, std::size_t height, std::size_t channels,
             std::vector<double> values)
    : width_(width), height_(height), channels_(channels),
      values_(std::move(values))
{
    if (channels_ != 1 && channels_ != 3)
        throw InvalidInput(fmt::format("image: {} channels, expected 1 or 3",
                                       channels_));
    if (values_.size() != width_ * height_ * channels_)
        throw InvalidInput(fmt::format(
            "image: {} values for {}x{}x{}", values_.size(), width_, height_,
            channels_));
    for (double v : values_)
        if (!(v >= 0.0 && v <= 1.0))
            throw InvalidInput("image: value outside [0,1]");
}

Image::Image(std::size_t width, std::size_t height, std::size_t channels,
             double fill)
    : Image(width, height, channels,
            std::vector<double>(width * height * channels, fill))
{
}

Image to_gray(const Image& image)
{
    if (image.channels() == 1) return image;
    std::vector<double> gray(image.pixel_count());
    for (std::size_t p = 0; p < gray.size(); ++p) {
        auto px = image.pixel(p);
        gray[p] = std::clamp(0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2],
                             0.0, 1.0);
    }
    return Image(image.width(), image.height(), 1, std::move(gray));
}

PotentialField::PotentialField(std::size_t width, std::size_t height,
                               std::size_t labels, std::vector<double> costs)
    : width_(width), height_(height), labels_(labels), costs_(std::move(costs))
{
    if (labels_ < 1) throw InvalidInput("potential field: zero labels");
    if (costs_.size() != width_ * height_ * labels_)
        throw InvalidInput(fmt::format(
            "potential field: {} costs for {}x{} pixels and {} labels",
            costs_.size(), width_, height_, labels_));
    if (!all_finite(costs_))
        throw InvalidInput("potential field: non-finite cost");
}

std::size_t label_components(std::size_t width, std::size_t height,
                             std::span<const std::uint32_t> values,
                             std::vector<std::uint32_t>& components)
{
    constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
    const std::size_t n = width * height;
    components.assign(n, unset);
    std::vector<std::size_t> stack;
    std::uint32_t next = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (components[seed] != unset) continue;
        const std::uint32_t value = values[seed];
        components[seed] = next;
        stack.push_back(seed);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const std::size_t x = p % width, y = p / width;
            auto visit = [&](std::size_t q) {
                if (components[q] == unset && values[q] == value) {
                    components[q] = next;
                    stack.push_back(q);
                }
            };
            if (x > 0) visit(p - 1);
            if (x + 1 < width) visit(p + 1);
            if (y > 0) visit(p - width);
            if (y + 1 < height) visit(p + width);
        }
        ++next;
    }
    return next;
}

Partition::Partition(std::size_t width, std::size_t height,
                     std::vector<std::uint32_t> labels)
    : width_(width), height_(height), labels_(std::move(labels))
{
    if (width_ == 0 || height_ == 0)
        throw InvalidInput("partition: empty domain");
    if (labels_.size() != width_ * height_)
        throw InvalidInput(fmt::format("partition: {} labels for {}x{} pixels",
                                       labels_.size(), width_, height_));

    const std::uint32_t max_id = *std::max_element(labels_.begin(), labels_.end());
    if (max_id == std::numeric_limits<std::uint32_t>::max())
        throw InvalidInput("partition: segment id out of range");
    std::size_t count = static_cast<std::size_t>(max_id) + 1;
    std::vector<char> seen(count, 0);
    for (auto id : labels_) seen[id] = 1;
    for (std::size_t id = 0; id < count; ++id)
        if (!seen[id])
            throw InvalidInput(fmt::format("partition: segment id {} unused", id));

    std::vector<std::uint32_t> comp;
    const std::size_t ncomp = label_components(width_, height_, labels_, comp);
    if (ncomp != count) {
        // Split: first component of each id keeps the id.
        constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
        std::vector<std::uint32_t> comp_id(ncomp, unset);
        std::vector<char> id_taken(count, 0);
        auto next = static_cast<std::uint32_t>(count);
        for (std::size_t p = 0; p < labels_.size(); ++p) {
            const auto c = comp[p];
            if (comp_id[c] != unset) continue;
            const auto id = labels_[p];
            if (!id_taken[id]) {
                id_taken[id] = 1;
                comp_id[c] = id;
            } else {
                comp_id[c] = next++;
            }
        }
        for (std::size_t p = 0; p < labels_.size(); ++p)
            labels_[p] = comp_id[comp[p]];
        count = ncomp;
    }
    segments_ = count;
}

Partition Partition::per_pixel(std::size_t width, std::size_t height)
{
    std::vector<std::uint32_t> labels(width * height);
    for (std::size_t p = 0; p < labels.size(); ++p)
        labels[p] = static_cast<std::uint32_t>(p);
    return Partition(width, height, std::move(labels));
}

std::vector<std::size_t> Partition::segment_sizes() const
{
    std::vector<std::size_t> sizes(segments_, 0);
    for (auto id : labels_) ++sizes[id];
    return sizes;
}

bool Partition::refines(const Partition& coarser) const
{
    if (coarser.width_ != width_ || coarser.height_ != height_) return false;
    constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> parent(segments_, unset);
    for (std::size_t p = 0; p < labels_.size(); ++p) {
        auto& owner = parent[labels_[p]];
        if (owner == unset)
            owner = coarser.labels_[p];
        else if (owner != coarser.labels_[p])
            return false;
    }
    return true;
}

ReducedGraph::ReducedGraph(std::size_t labels, std::vector<double> node_area,
                           std::vector<double> node_potentials,
                           std::vector<Edge> edges)
    : labels_(labels), node_area_(std::move(node_area)),
      node_potentials_(std::move(node_potentials)), edges_(std::move(edges))
{
    const std::size_t m = node_area_.size();
    if (m == 0) throw InvalidInput("graph: no nodes");
    if (labels_ < 1) throw InvalidInput("graph: zero labels");
    if (m > std::numeric_limits<std::uint32_t>::max())
        throw InvalidInput("graph: too many nodes");
    if (node_potentials_.size() != m * labels_)
        throw InvalidInput(fmt::format(
            "graph: {} potentials for {} nodes and {} labels",
            node_potentials_.size(), m, labels_));
    if (!all_finite(node_potentials_))
        throw InvalidInput("graph: non-finite node potential");
    for (double a : node_area_)
        if (!(a > 0.0) || !std::isfinite(a))
            throw InvalidInput("graph: node area must be positive");
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Edge& edge = edges_[e];
        if (edge.i >= edge.j)
            throw InvalidInput(fmt::format(
                "graph: edge {} is ({}, {}), expected i < j", e, edge.i, edge.j));
        if (edge.j >= m)
            throw InvalidInput(fmt::format("graph: edge {} endpoint out of range", e));
        if (!(edge.weight > 0.0) || !std::isfinite(edge.weight))
            throw InvalidInput(fmt::format("graph: edge {} weight not positive", e));
    }
    std::vector<std::uint64_t> keys(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e)
        keys[e] = edge_key(edges_[e].i, edges_[e].j);
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
        throw InvalidInput("graph: duplicate edge");
}

Assignment::Assignment(std::size_t nodes, std::size_t labels,
                       std::vector<double> values)
    : nodes_(nodes), labels_(labels), values_(std::move(values))
{
    if (labels_ < 1) throw InvalidInput("assignment: zero labels");
    if (values_.size() != nodes_ * labels_)
        throw InvalidInput(fmt::format(
            "assignment: {} values for {} nodes and {} labels", values_.size(),
            nodes_, labels_));
    for (std::size_t i = 0; i < nodes_; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < labels_; ++k) {
            const double v = values_[i * labels_ + k];
            if (!(v >= -simplex_tolerance && v <= 1.0 + simplex_tolerance))
                throw InvalidInput(fmt::format(
                    "assignment: node {} component {} = {} outside [0,1]", i,
                    k, v));
            sum += v;
        }
        if (std::abs(sum - 1.0) > simplex_tolerance)
            throw InvalidInput(fmt::format(
                "assignment: node {} sums to {}", i, sum));
    }
}

Assignment Assignment::uniform(std::size_t nodes, std::size_t labels)
{
    if (labels < 1) throw InvalidInput("assignment: zero labels");
    return Assignment(nodes, labels,
                      std::vector<double>(nodes * labels, 1.0 / labels));
}

Assignment Assignment::one_hot(std::span<const std::uint32_t> node_labels,
                               std::size_t labels)
{
    std::vector<double> values(node_labels.size() * labels, 0.0);
    for (std::size_t i = 0; i < node_labels.size(); ++i) {
        if (node_labels[i] >= labels)
            throw InvalidInput(fmt::format("assignment: label {} out of range",
                                           node_labels[i]));
        values[i * labels + node_labels[i]] = 1.0;
    }
    return Assignment(node_labels.size(), labels, std::move(values));
}

ReducedGraph build_grid_graph(const PotentialField& field)
{
    const std::size_t w = field.width(), h = field.height();
    if (w == 0 || h == 0) throw InvalidInput("grid graph: empty field");
    std::vector<Edge> edges;
    edges.reserve(2 * w * h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const auto p = static_cast<std::uint32_t>(y * w + x);
            if (x + 1 < w) edges.push_back({p, p + 1, 1.0});
            if (y + 1 < h) edges.push_back({p, static_cast<std::uint32_t>(p + w), 1.0});
        }
    }
    std::vector<double> costs(field.costs().begin(), field.costs().end());
    return ReducedGraph(field.labels(), std::vector<double>(w * h, 1.0),
                        std::move(costs), std::move(edges));
}

ReducedGraph reduce(const Partition& partition, const PotentialField& field)
{
    const std::size_t w = partition.width(), h = partition.height();
    if (field.width() != w || field.height() != h)
        throw InvalidInput(fmt::format(
            "reduce: partition is {}x{}, field is {}x{}", w, h, field.width(),
            field.height()));
    const std::size_t m = partition.segment_count();
    const std::size_t nl = field.labels();
    auto labels = partition.labels();

    std::vector<double> area(m, 0.0);
    std::vector<double> potentials(m * nl, 0.0);
    for (std::size_t p = 0; p < labels.size(); ++p) {
        const std::size_t id = labels[p];
        area[id] += 1.0;
        auto src = field.pixel(p);
        double* dst = potentials.data() + id * nl;
        for (std::size_t k = 0; k < nl; ++k) dst[k] += src[k];
    }

    std::vector<std::uint64_t> keys;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t p = y * w + x;
            if (x + 1 < w && labels[p] != labels[p + 1])
                keys.push_back(edge_key(labels[p], labels[p + 1]));
            if (y + 1 < h && labels[p] != labels[p + w])
                keys.push_back(edge_key(labels[p], labels[p + w]));
        }
    }
    std::sort(keys.begin(), keys.end());
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < keys.size();) {
        std::size_t b = a;
        while (b < keys.size() && keys[b] == keys[a]) ++b;
        edges.push_back({static_cast<std::uint32_t>(keys[a] >> 32),
                         static_cast<std::uint32_t>(keys[a] & 0xffffffffu),
                         static_cast<double>(b - a)});
        a = b;
    }
    return ReducedGraph(nl, std::move(area), std::move(potentials),
                        std::move(edges));
}

std::vector<double> reassemble(const Partition& partition,
                               std::span<const double> node_values,
                               std::size_t components)
{
    if (components == 0) throw InvalidInput("reassemble: zero components");
    if (node_values.size() != partition.segment_count() * components)
        throw InvalidInput(fmt::format(
            "reassemble: {} values for {} segments x {} components",
            node_values.size(), partition.segment_count(), components));
    std::vector<double> out(partition.pixel_count() * components);
    auto labels = partition.labels();
    for (std::size_t p = 0; p < labels.size(); ++p)
        std::copy_n(node_values.data() + labels[p] * components, components,
                    out.data() + p * components);
    return out;
}

Assignment lift(const Partition& partition, const Assignment& assignment)
{
    if (assignment.node_count() != partition.segment_count())
        throw InvalidInput("lift: assignment does not match partition");
    return Assignment(partition.pixel_count(), assignment.labels(),
                      reassemble(partition, assignment.values(),
                                 assignment.labels()));
}

double energy(const ReducedGraph& graph, const Assignment& assignment,
              double lambda)
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw InvalidInput("energy: lambda must be finite and non-negative");
    if (assignment.node_count() != graph.node_count() ||
        assignment.labels() != graph.labels())
        throw InvalidInput("energy: assignment does not match graph");
    const std::size_t nl = graph.labels();
    double data = 0.0;
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        auto f = graph.potentials(i);
        auto c = assignment.node(i);
        for (std::size_t k = 0; k < nl; ++k) data += c[k] * f[k];
    }
    double jumps = 0.0;
    for (const Edge& e : graph.edges()) {
        auto ci = assignment.node(e.i);
        auto cj = assignment.node(e.j);
        double d = 0.0;
        for (std::size_t k = 0; k < nl; ++k) d += std::abs(ci[k] - cj[k]);
        jumps += e.weight * d;
    }
    return data + 0.5 * lambda * jumps;
}

double labeling_energy(const ReducedGraph& graph,
                       std::span<const std::uint32_t> node_labels,
                       double lambda)
{
    return energy(graph, Assignment::one_hot(node_labels, graph.labels()),
                  lambda);
}

} // namespace liftgraph
