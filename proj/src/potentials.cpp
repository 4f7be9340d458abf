#include "liftgraph/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "liftgraph/error.hpp"

namespace liftgraph::potentials {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b)
{
    double d = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) d += (a[c] - b[c]) * (a[c] - b[c]);
    return d;
}

std::size_t nearest(std::span<const double> px, const Palette& palette, double* dist = nullptr)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < palette.size(); ++k) {
        const double d = squared_distance(px, palette.color(k));
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    if (dist) *dist = best_d;
    return best;
}

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

double kmeans_cost(const Image& image, const Palette& palette)
{
    double cost = 0.0;
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        double d = 0.0;
        nearest(image.pixel(p), palette, &d);
        cost += d;
    }
    return cost;
}

Palette kmeans_palette(const Image& image, std::size_t labels, int iterations,
                       std::uint64_t seed, std::vector<double>* cost_history)
{
    const std::size_t n = image.pixel_count();
    const std::size_t nc = image.channels();
    if (n == 0) throw InvalidInput("kmeans: empty image");
    if (labels < 1) throw InvalidInput("kmeans: need at least one label");
    if (iterations < 0) throw InvalidInput("kmeans: iterations must be >= 0");

    std::mt19937_64 rng(seed);
    Palette palette{nc, {}};
    palette.colors.reserve(labels * nc);
    auto first = image.pixel(static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
    palette.colors.insert(palette.colors.end(), first.begin(), first.end());

    std::vector<double> d2(n);
    for (std::size_t p = 0; p < n; ++p) d2[p] = squared_distance(image.pixel(p), palette.color(0));
    bool warned = false;
    while (palette.size() < labels) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t p = 0; p < n; ++p) {
                acc += d2[p];
                if (d2[p] > 0.0 && acc > target) {
                    pick = p;
                    break;
                }
            }
            while (d2[pick] == 0.0) --pick; // rounding at the tail
        } else {
            if (!warned) {
                spdlog::warn("kmeans: image has fewer than {} distinct colors; "
                             "palette contains duplicates", labels);
                warned = true;
            }
            pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
        }
        auto color = image.pixel(pick);
        palette.colors.insert(palette.colors.end(), color.begin(), color.end());
        const std::size_t k = palette.size() - 1;
        for (std::size_t p = 0; p < n; ++p)
            d2[p] = std::min(d2[p], squared_distance(image.pixel(p), palette.color(k)));
    }

    if (cost_history) cost_history->assign(1, kmeans_cost(image, palette));
    std::vector<std::size_t> assign(n, labels);
    std::vector<double> sums(labels * nc);
    std::vector<std::size_t> counts(labels);
    for (int it = 0; it < iterations; ++it) {
        bool changed = false;
        for (std::size_t p = 0; p < n; ++p) {
            const std::size_t k = nearest(image.pixel(p), palette);
            changed |= k != assign[p];
            assign[p] = k;
        }
        if (!changed) break;
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t p = 0; p < n; ++p) {
            auto px = image.pixel(p);
            for (std::size_t c = 0; c < nc; ++c) sums[assign[p] * nc + c] += px[c];
            ++counts[assign[p]];
        }
        for (std::size_t k = 0; k < labels; ++k) {
            if (counts[k] == 0) continue; // empty cluster keeps its center
            for (std::size_t c = 0; c < nc; ++c)
                palette.colors[k * nc + c] = sums[k * nc + c] / static_cast<double>(counts[k]);
        }
        if (cost_history) cost_history->push_back(kmeans_cost(image, palette));
    }
    return palette;
}

PotentialField cartoon_costs(const Image& image, const Palette& palette)
{
    if (palette.channels != image.channels())
        throw InvalidInput(fmt::format("cartoon costs: palette has {} channels, image {}",
                                       palette.channels, image.channels()));
    if (palette.size() == 0) throw InvalidInput("cartoon costs: empty palette");
    const std::size_t n = image.pixel_count(), nl = palette.size();
    std::vector<double> costs(n * nl);
    for (std::size_t p = 0; p < n; ++p) {
        auto px = image.pixel(p);
        for (std::size_t k = 0; k < nl; ++k) {
            auto col = palette.color(k);
            double d = 0.0;
            for (std::size_t c = 0; c < px.size(); ++c) d += std::abs(px[c] - col[c]);
            costs[p * nl + k] = d;
        }
    }
    return PotentialField(image.width(), image.height(), nl, std::move(costs));
}

ScribbleSet ScribbleSet::from_label_map(std::size_t width, std::size_t height,
                                        std::span<const std::uint32_t> map)
{
    if (map.size() != width * height) throw InvalidInput("scribbles: size mismatch");
    ScribbleSet set;
    for (std::size_t p = 0; p < map.size(); ++p) {
        if (map[p] == 0) continue;
        const std::size_t label = map[p] - 1;
        if (set.pixels.size() <= label) set.pixels.resize(label + 1);
        set.pixels[label].push_back(p);
    }
    for (std::size_t k = 0; k < set.pixels.size(); ++k)
        if (set.pixels[k].empty())
            throw InvalidInput(fmt::format("scribbles: label {} has no pixels", k));
    return set;
}

PotentialField scribble_costs(const Image& image, const ScribbleSet& scribbles)
{
    constexpr double ridge = 1e-4;
    const std::size_t w = image.width(), h = image.height(), n = w * h;
    const std::size_t nl = scribbles.labels();
    if (nl < 2) throw InvalidInput("scribble costs: need at least two scribbled labels");
    const auto dim = static_cast<Eigen::Index>(image.channels() + 2);

    std::vector<char> used(n, 0);
    for (std::size_t k = 0; k < nl; ++k) {
        if (scribbles.pixels[k].empty())
            throw InvalidInput(fmt::format("scribble costs: label {} is empty", k));
        for (std::size_t p : scribbles.pixels[k]) {
            if (p >= n) throw InvalidInput("scribble costs: pixel index out of range");
            if (used[p]) throw InvalidInput("scribble costs: labels overlap");
            used[p] = 1;
        }
    }

    const double sx = w > 1 ? 1.0 / static_cast<double>(w - 1) : 0.0;
    const double sy = h > 1 ? 1.0 / static_cast<double>(h - 1) : 0.0;
    auto feature = [&](std::size_t p) {
        Eigen::VectorXd v(dim);
        auto px = image.pixel(p);
        for (std::size_t c = 0; c < px.size(); ++c) v(static_cast<Eigen::Index>(c)) = px[c];
        v(dim - 2) = static_cast<double>(p % w) * sx;
        v(dim - 1) = static_cast<double>(p / w) * sy;
        return v;
    };

    struct Model {
        Eigen::VectorXd mean;
        Eigen::LLT<Eigen::MatrixXd> chol;
        double log_norm = 0.0;
    };
    std::vector<Model> models(nl);
    for (std::size_t k = 0; k < nl; ++k) {
        const auto& px = scribbles.pixels[k];
        const auto count = static_cast<double>(px.size());
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
        for (std::size_t p : px) mean += feature(p);
        mean /= count;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t p : px) {
            const Eigen::VectorXd d = feature(p) - mean;
            cov += d * d.transpose();
        }
        cov /= count;
        if (px.size() < 4) cov = Eigen::MatrixXd(cov.diagonal().asDiagonal());
        cov += ridge * Eigen::MatrixXd::Identity(dim, dim);
        models[k].mean = mean;
        models[k].chol.compute(cov);
        if (models[k].chol.info() != Eigen::Success)
            throw NumericalError(fmt::format("scribble costs: covariance of label {} not SPD", k));
        const auto& lower = models[k].chol.matrixLLT();
        double log_det = 0.0;
        for (Eigen::Index d = 0; d < dim; ++d) log_det += 2.0 * std::log(lower(d, d));
        models[k].log_norm = 0.5 * log_det + 0.5 * static_cast<double>(dim) *
                                                 std::log(2.0 * std::numbers::pi);
    }

    std::vector<double> costs(n * nl);
    for (std::size_t p = 0; p < n; ++p) {
        const Eigen::VectorXd x = feature(p);
        double lowest = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nl; ++k) {
            const Eigen::VectorXd d = x - models[k].mean;
            const Eigen::VectorXd z = models[k].chol.matrixL().solve(d);
            const double nll = 0.5 * z.squaredNorm() + models[k].log_norm;
            costs[p * nl + k] = nll;
            lowest = std::min(lowest, nll);
        }
        for (std::size_t k = 0; k < nl; ++k) costs[p * nl + k] -= lowest;
    }
    return PotentialField(w, h, nl, std::move(costs));
}

PotentialField stereo_cost_volume(const Image& left, const Image& right, std::size_t d_max,
                                  std::size_t window, double truncation)
{
    if (left.width() != right.width() || left.height() != right.height())
        throw InvalidInput("stereo: left and right images differ in size");
    const std::size_t w = left.width(), h = left.height();
    if (w == 0 || h == 0) throw InvalidInput("stereo: empty images");
    if (d_max >= w) throw InvalidInput(fmt::format("stereo: d_max {} must be < width {}", d_max, w));
    if (window % 2 == 0) throw InvalidInput("stereo: window must be odd");
    const double cap = truncation < 0.0 ? 0.5 * static_cast<double>(window * window) : truncation;

    const Image gl = to_gray(left), gr = to_gray(right);
    const std::size_t nl = d_max + 1;
    const long radius = static_cast<long>(window / 2);
    auto clampi = [](long v, std::size_t extent) {
        return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(extent) - 1));
    };

    std::vector<double> costs(w * h * nl);
    std::vector<double> diff(w * h), rows(w * h);
    for (std::size_t d = 0; d < nl; ++d) {
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                diff[y * w + x] =
                    std::abs(gl.at(x, y) - gr.at(clampi(static_cast<long>(x) - static_cast<long>(d), w), y));
        // Separable box sum with replicated borders.
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                double s = 0.0;
                for (long dx = -radius; dx <= radius; ++dx)
                    s += diff[y * w + clampi(static_cast<long>(x) + dx, w)];
                rows[y * w + x] = s;
            }
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                double s = 0.0;
                for (long dy = -radius; dy <= radius; ++dy)
                    s += rows[clampi(static_cast<long>(y) + dy, h) * w + x];
                costs[(y * w + x) * nl + d] = std::min(cap, s);
            }
    }
    return PotentialField(w, h, nl, std::move(costs));
}

std::vector<double> argmin_map(const PotentialField& costs)
{
    std::vector<double> g(costs.pixel_count());
    for (std::size_t p = 0; p < g.size(); ++p) {
        auto c = costs.pixel(p);
        g[p] = static_cast<double>(std::min_element(c.begin(), c.end()) - c.begin());
    }
    return g;
}

std::vector<double> convex_envelope(std::span<const double> samples)
{
    const std::size_t n = samples.size();
    if (n == 0) throw InvalidInput("convex envelope: no samples");
    for (double s : samples)
        if (!std::isfinite(s)) throw InvalidInput("convex envelope: non-finite sample");

    // Lower hull, monotone chain over x = 0..n-1.
    std::vector<std::size_t> hull;
    for (std::size_t k = 0; k < n; ++k) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2], b = hull.back();
            const double cross = static_cast<double>(b - a) * (samples[k] - samples[a]) -
                                 static_cast<double>(k - a) * (samples[b] - samples[a]);
            if (cross <= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(k);
    }
    std::vector<double> out(n);
    for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
        const std::size_t a = hull[s], b = hull[s + 1];
        const double slope = (samples[b] - samples[a]) / static_cast<double>(b - a);
        for (std::size_t k = a; k < b; ++k)
            out[k] = samples[a] + slope * static_cast<double>(k - a);
    }
    out[n - 1] = samples[n - 1];
    // Hull vertices keep their sample value exactly.
    for (std::size_t k : hull) out[k] = samples[k];
    return out;
}

std::vector<double> node_envelopes(const ReducedGraph& graph)
{
    const std::size_t nl = graph.labels();
    std::vector<double> out;
    out.reserve(graph.node_potentials().size());
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto env = convex_envelope(graph.potentials(i));
        out.insert(out.end(), env.begin(), env.end());
    }
    (void)nl;
    return out;
}

} // namespace liftgraph::potentials
