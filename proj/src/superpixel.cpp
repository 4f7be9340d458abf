#include "liftgraph/superpixel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "liftgraph/error.hpp"
#include "liftgraph/maxflow.hpp"

namespace liftgraph::superpixel {

Partition grid_subsample(std::size_t width, std::size_t height, std::size_t factor)
{
    if (width == 0 || height == 0) throw InvalidInput("grid subsample: empty domain");
    if (factor < 1 || factor > std::min(width, height))
        throw InvalidInput(fmt::format(
            "grid subsample: factor {} outside [1, {}]", factor, std::min(width, height)));
    const std::size_t blocks_x = (width + factor - 1) / factor;
    std::vector<std::uint32_t> labels(width * height);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            labels[y * width + x] =
                static_cast<std::uint32_t>((y / factor) * blocks_x + x / factor);
    return Partition(width, height, std::move(labels));
}

Partition connected_components(std::size_t width, std::size_t height,
                               std::span<const std::uint32_t> values)
{
    if (values.size() != width * height)
        throw InvalidInput("connected components: size mismatch");
    std::vector<std::uint32_t> comp;
    label_components(width, height, values, comp);
    return Partition(width, height, std::move(comp));
}

Partition connected_components(std::size_t width, std::size_t height,
                               const std::vector<bool>& mask)
{
    std::vector<std::uint32_t> values(mask.begin(), mask.end());
    return connected_components(width, height, values);
}

namespace {

// Merges 4-connected fragments smaller than min_size into their largest
// neighboring fragment until none is left (or one fragment remains).
Partition enforce_connectivity(std::size_t width, std::size_t height,
                               std::vector<std::uint32_t> labels, double min_size)
{
    for (;;) {
        std::vector<std::uint32_t> comp;
        const std::size_t count = label_components(width, height, labels, comp);
        std::vector<std::size_t> size(count, 0);
        for (auto c : comp) ++size[c];

        std::vector<char> small(count, 0);
        bool any_small = false;
        for (std::size_t c = 0; c < count; ++c)
            if (static_cast<double>(size[c]) < min_size) small[c] = any_small = 1;
        if (!any_small || count == 1)
            return Partition(width, height, std::move(comp));

        std::vector<std::pair<std::uint32_t, std::uint32_t>> adjacent;
        auto note = [&](std::uint32_t a, std::uint32_t b) {
            if (a == b) return;
            if (small[a]) adjacent.emplace_back(a, b);
            if (small[b]) adjacent.emplace_back(b, a);
        };
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) {
                const std::size_t p = y * width + x;
                if (x + 1 < width) note(comp[p], comp[p + 1]);
                if (y + 1 < height) note(comp[p], comp[p + width]);
            }
        std::sort(adjacent.begin(), adjacent.end());
        adjacent.erase(std::unique(adjacent.begin(), adjacent.end()), adjacent.end());

        std::vector<std::uint32_t> parent(count);
        std::iota(parent.begin(), parent.end(), 0u);
        auto find = [&](std::uint32_t c) {
            while (parent[c] != c) c = parent[c] = parent[parent[c]];
            return c;
        };
        std::size_t merges = 0;
        for (std::size_t a = 0; a < adjacent.size();) {
            const std::uint32_t c = adjacent[a].first;
            std::size_t b = a;
            const std::uint32_t root = find(c);
            std::uint32_t best = root;
            std::size_t best_size = 0;
            for (; b < adjacent.size() && adjacent[b].first == c; ++b) {
                const std::uint32_t r = find(adjacent[b].second);
                if (r == root) continue;
                if (size[r] > best_size || (size[r] == best_size && r < best)) {
                    best = r;
                    best_size = size[r];
                }
            }
            a = b;
            if (best == root || static_cast<double>(size[root]) >= min_size) continue;
            parent[root] = best;
            size[best] += size[root];
            ++merges;
        }
        if (merges == 0) return Partition(width, height, std::move(comp));
        for (std::size_t p = 0; p < labels.size(); ++p) labels[p] = find(comp[p]);
    }
}

} // namespace

Partition slic(const Image& image, const SlicParams& params)
{
    const std::size_t w = image.width(), h = image.height(), n = w * h;
    const std::size_t nc = image.channels();
    if (n == 0) throw InvalidInput("slic: empty image");
    if (params.superpixels < 1 || params.superpixels > n)
        throw InvalidInput(fmt::format("slic: K = {} outside [1, {}]", params.superpixels, n));
    if (!(params.compactness > 0.0))
        throw InvalidInput("slic: compactness must be positive");
    if (params.iterations < 1) throw InvalidInput("slic: iterations must be >= 1");
    if (!(params.min_size_fraction > 0.0 && params.min_size_fraction <= 1.0))
        throw InvalidInput("slic: min_size_fraction must be in (0, 1]");

    const double k = static_cast<double>(params.superpixels);
    const double step = std::sqrt(static_cast<double>(n) / k);
    auto count_for = [&](std::size_t extent) {
        const auto c = static_cast<std::size_t>(std::lround(extent / step));
        return std::clamp<std::size_t>(c, 1, extent);
    };
    std::size_t nx = count_for(w), ny = count_for(h);
    while (nx * ny > params.superpixels) {
        if (static_cast<double>(w) / nx < static_cast<double>(h) / ny && nx > 1)
            --nx;
        else if (ny > 1)
            --ny;
        else
            --nx;
    }

    // center layout: x, y, then color channels
    const std::size_t stride = 2 + nc;
    std::vector<double> centers;
    centers.reserve(nx * ny * stride);
    auto gradient = [&](std::size_t x, std::size_t y) {
        auto px = [&](std::size_t xx, std::size_t yy) { return image.pixel(yy * w + xx); };
        const std::size_t xl = x > 0 ? x - 1 : x, xr = std::min(x + 1, w - 1);
        const std::size_t yu = y > 0 ? y - 1 : y, yd = std::min(y + 1, h - 1);
        double g = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
            const double dx = px(xr, y)[c] - px(xl, y)[c];
            const double dy = px(x, yd)[c] - px(x, yu)[c];
            g += dx * dx + dy * dy;
        }
        return g;
    };
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            double cx = (i + 0.5) * static_cast<double>(w) / nx - 0.5;
            double cy = (j + 0.5) * static_cast<double>(h) / ny - 0.5;
            auto px = static_cast<std::size_t>(std::lround(cx));
            auto py = static_cast<std::size_t>(std::lround(cy));
            // Move the seed to the lowest-gradient pixel of its 3x3
            // neighborhood; stay put unless strictly lower.
            double best = gradient(px, py);
            std::size_t bx = px, by = py;
            bool moved = false;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const long qx = static_cast<long>(px) + dx, qy = static_cast<long>(py) + dy;
                    if (qx < 0 || qy < 0 || qx >= static_cast<long>(w) || qy >= static_cast<long>(h))
                        continue;
                    const double g = gradient(static_cast<std::size_t>(qx), static_cast<std::size_t>(qy));
                    if (g < best) {
                        best = g;
                        bx = static_cast<std::size_t>(qx);
                        by = static_cast<std::size_t>(qy);
                        moved = true;
                    }
                }
            if (moved) {
                cx = static_cast<double>(bx);
                cy = static_cast<double>(by);
            }
            centers.push_back(cx);
            centers.push_back(cy);
            auto color = image.pixel(by * w + bx);
            centers.insert(centers.end(), color.begin(), color.end());
        }
    }
    const std::size_t kc = nx * ny;
    const double spatial = params.compactness / step;
    constexpr auto unassigned = std::numeric_limits<std::uint32_t>::max();

    std::vector<std::uint32_t> labels(n, unassigned);
    std::vector<double> dist(n);
    auto distance = [&](std::size_t c, std::size_t x, std::size_t y) {
        const double* ctr = centers.data() + c * stride;
        auto px = image.pixel(y * w + x);
        double dc = 0.0;
        for (std::size_t ch = 0; ch < nc; ++ch) {
            const double d = px[ch] - ctr[2 + ch];
            dc += d * d;
        }
        const double dx = static_cast<double>(x) - ctr[0];
        const double dy = static_cast<double>(y) - ctr[1];
        return std::sqrt(dc) + spatial * std::sqrt(dx * dx + dy * dy);
    };

    std::vector<double> sums(kc * stride);
    std::vector<std::size_t> counts(kc);
    for (int it = 0; it < params.iterations; ++it) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        std::fill(labels.begin(), labels.end(), unassigned);
        for (std::size_t c = 0; c < kc; ++c) {
            const double cx = centers[c * stride], cy = centers[c * stride + 1];
            const long x0 = std::max<long>(0, static_cast<long>(std::ceil(cx - step)));
            const long x1 = std::min<long>(static_cast<long>(w) - 1, static_cast<long>(std::floor(cx + step)));
            const long y0 = std::max<long>(0, static_cast<long>(std::ceil(cy - step)));
            const long y1 = std::min<long>(static_cast<long>(h) - 1, static_cast<long>(std::floor(cy + step)));
            for (long y = y0; y <= y1; ++y)
                for (long x = x0; x <= x1; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
                    const double d = distance(c, static_cast<std::size_t>(x), static_cast<std::size_t>(y));
                    if (d < dist[p]) {
                        dist[p] = d;
                        labels[p] = static_cast<std::uint32_t>(c);
                    }
                }
        }
        for (std::size_t p = 0; p < n; ++p) {
            if (labels[p] != unassigned) continue;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < kc; ++c) {
                const double d = distance(c, p % w, p / w);
                if (d < best) {
                    best = d;
                    labels[p] = static_cast<std::uint32_t>(c);
                }
            }
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t p = 0; p < n; ++p) {
            double* s = sums.data() + labels[p] * stride;
            s[0] += static_cast<double>(p % w);
            s[1] += static_cast<double>(p / w);
            auto px = image.pixel(p);
            for (std::size_t ch = 0; ch < nc; ++ch) s[2 + ch] += px[ch];
            ++counts[labels[p]];
        }
        for (std::size_t c = 0; c < kc; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t f = 0; f < stride; ++f)
                centers[c * stride + f] = sums[c * stride + f] / static_cast<double>(counts[c]);
        }
    }

    const double min_size = params.min_size_fraction * static_cast<double>(n) / k;
    return enforce_connectivity(w, h, std::move(labels), min_size);
}

GuideField guide_from_image(const Image& image)
{
    return {image.width(), image.height(), image.channels(),
            std::vector<double>(image.values().begin(), image.values().end())};
}

GuideField guide_from_scalar(std::size_t width, std::size_t height, std::vector<double> values)
{
    return {width, height, 1, std::move(values)};
}

BinaryCut binary_cut(std::size_t width, std::size_t height, std::span<const double> unary,
                     double alpha)
{
    const std::size_t n = width * height;
    if (unary.size() != n) throw InvalidInput("binary cut: unary size mismatch");
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
        throw InvalidInput("binary cut: alpha must be finite and non-negative");

    // B = source side. x in B pays unary(x) through x -> sink; x outside B
    // pays -unary(x) through source -> x (constant shift sum min(0, unary)).
    maxflow::FlowNetwork net(n);
    double shift = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double a = unary[p];
        if (!std::isfinite(a)) throw InvalidInput("binary cut: non-finite unary");
        if (a > 0.0)
            net.add_arc(p, maxflow::FlowNetwork::sink, a);
        else if (a < 0.0) {
            net.add_arc(maxflow::FlowNetwork::source, p, -a);
            shift += a;
        }
    }
    if (alpha > 0.0) {
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x) {
                const std::size_t p = y * width + x;
                if (x + 1 < width) net.add_edge(p, p + 1, alpha, alpha);
                if (y + 1 < height) net.add_edge(p, p + width, alpha, alpha);
            }
    }
    maxflow::CutResult cut = maxflow::max_flow(net);
    BinaryCut out;
    out.in_set = std::move(cut.source_side);
    out.objective = cut.flow_value + shift;
    return out;
}

double binary_cut_objective(std::size_t width, std::size_t height,
                            std::span<const double> unary, double alpha,
                            const std::vector<bool>& in_set)
{
    if (unary.size() != width * height || in_set.size() != width * height)
        throw InvalidInput("binary cut objective: size mismatch");
    double value = 0.0;
    for (std::size_t p = 0; p < in_set.size(); ++p)
        if (in_set[p]) value += unary[p];
    std::size_t cut_edges = 0;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const std::size_t p = y * width + x;
            if (x + 1 < width && in_set[p] != in_set[p + 1]) ++cut_edges;
            if (y + 1 < height && in_set[p] != in_set[p + width]) ++cut_edges;
        }
    return value + alpha * static_cast<double>(cut_edges);
}

L0CutPursuit::L0CutPursuit(GuideField guide, double alpha_c)
    : guide_(std::move(guide)), alpha_c_(alpha_c)
{
    const std::size_t n = guide_.width * guide_.height;
    if (n == 0) throw InvalidInput("cut pursuit: empty guide");
    if (guide_.channels < 1 || guide_.values.size() != n * guide_.channels)
        throw InvalidInput("cut pursuit: guide size mismatch");
    for (double v : guide_.values)
        if (!std::isfinite(v)) throw InvalidInput("cut pursuit: non-finite guide value");
    if (!(alpha_c > 0.0) || !std::isfinite(alpha_c))
        throw InvalidInput("cut pursuit: alpha_c must be positive");
    state_.partition = Partition(guide_.width, guide_.height, std::vector<std::uint32_t>(n, 0));
    recompute_means();
}

void L0CutPursuit::recompute_means()
{
    const std::size_t nc = guide_.channels;
    const std::size_t m = state_.partition.segment_count();
    state_.means.assign(m * nc, 0.0);
    std::vector<double> count(m, 0.0);
    auto labels = state_.partition.labels();
    for (std::size_t p = 0; p < labels.size(); ++p) {
        count[labels[p]] += 1.0;
        for (std::size_t c = 0; c < nc; ++c)
            state_.means[labels[p] * nc + c] += guide_.values[p * nc + c];
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c = 0; c < nc; ++c) state_.means[i * nc + c] /= count[i];
}

std::vector<double> L0CutPursuit::cut_unary() const
{
    const std::size_t nc = guide_.channels;
    auto labels = state_.partition.labels();
    std::vector<double> unary(labels.size());
    for (std::size_t p = 0; p < labels.size(); ++p) {
        double a = 0.0;
        for (std::size_t c = 0; c < nc; ++c)
            a += state_.means[labels[p] * nc + c] - guide_.values[p * nc + c];
        unary[p] = a;
    }
    return unary;
}

double L0CutPursuit::approximation_error() const
{
    const std::size_t nc = guide_.channels;
    auto labels = state_.partition.labels();
    double err = 0.0;
    for (std::size_t p = 0; p < labels.size(); ++p)
        for (std::size_t c = 0; c < nc; ++c) {
            const double d = state_.means[labels[p] * nc + c] - guide_.values[p * nc + c];
            err += d * d;
        }
    return err;
}

bool L0CutPursuit::step()
{
    if (converged_) return false;
    const std::vector<double> unary = cut_unary();
    last_cut_ = binary_cut(guide_.width, guide_.height, unary, alpha_c_);
    if (!(last_cut_.objective < -improvement_tolerance)) {
        converged_ = true;
        return false;
    }
    auto labels = state_.partition.labels();
    std::vector<std::uint32_t> split(labels.size());
    for (std::size_t p = 0; p < labels.size(); ++p)
        split[p] = labels[p] * 2u + (last_cut_.in_set[p] ? 1u : 0u);
    Partition refined = connected_components(guide_.width, guide_.height, split);
    if (refined.segment_count() == state_.partition.segment_count()) {
        converged_ = true;
        return false;
    }
    state_.partition = std::move(refined);
    ++state_.iteration;
    recompute_means();
    return true;
}

void L0CutPursuit::run(int max_iters)
{
    while (state_.iteration < max_iters && step()) {
    }
}

Partition l0_cut_pursuit(const GuideField& guide, double alpha_c, int max_iters)
{
    if (max_iters < 0) throw InvalidInput("cut pursuit: max_iters must be >= 0");
    L0CutPursuit pursuit(guide, alpha_c);
    pursuit.run(max_iters);
    return pursuit.state().partition;
}

} // namespace liftgraph::superpixel
