#pragma once

// Brute-force reference implementations used by the tests. None of them call
// into the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <vector>

namespace oracle {

constexpr int source = -1;
constexpr int sink = -2;

struct Arc {
    int from;
    int to;
    double cap;
};

/// min over all subsets S of internal nodes of the capacity of the cut
/// ({source} + S, rest).
inline double min_cut(int nodes, const std::vector<Arc>& arcs)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << nodes); ++mask) {
        auto on_source = [&](int v) {
            if (v == source) return true;
            if (v == sink) return false;
            return ((mask >> v) & 1u) != 0;
        };
        double cut = 0.0;
        for (const Arc& a : arcs)
            if (on_source(a.from) && !on_source(a.to)) cut += a.cap;
        best = std::min(best, cut);
    }
    return best;
}

/// Capacity of the cut with the given source-side mask.
inline double cut_value(const std::vector<Arc>& arcs, const std::vector<bool>& side)
{
    auto on_source = [&](int v) {
        if (v == source) return true;
        if (v == sink) return false;
        return bool(side[static_cast<std::size_t>(v)]);
    };
    double cut = 0.0;
    for (const Arc& a : arcs)
        if (on_source(a.from) && !on_source(a.to)) cut += a.cap;
    return cut;
}

struct GraphEdge {
    std::size_t i, j;
    double w;
};

/// Energy of a discrete labeling, written out directly.
inline double labeling_energy(std::size_t labels, const std::vector<double>& potentials,
                              const std::vector<GraphEdge>& edges,
                              const std::vector<std::size_t>& assignment, double lambda)
{
    double e = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) e += potentials[i * labels + assignment[i]];
    // |e_a - e_b|_1 of two distinct indicator vectors is 2.
    for (const auto& ed : edges)
        if (assignment[ed.i] != assignment[ed.j]) e += lambda * ed.w;
    return e;
}

/// Exhaustive minimum over all L^M labelings.
inline double min_labeling_energy(std::size_t nodes, std::size_t labels,
                                  const std::vector<double>& potentials,
                                  const std::vector<GraphEdge>& edges, double lambda)
{
    std::vector<std::size_t> a(nodes, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        best = std::min(best, labeling_energy(labels, potentials, edges, a, lambda));
        std::size_t pos = 0;
        while (pos < nodes && ++a[pos] == labels) a[pos++] = 0;
        if (pos == nodes) break;
    }
    return best;
}

/// Simplex projection by enumerating candidate supports and checking the
/// KKT conditions of min |x - v|^2 s.t. x >= 0, sum x = 1.
inline std::vector<double> project_simplex(const std::vector<double>& v)
{
    const std::size_t n = v.size();
    std::vector<double> best_x;
    double best_violation = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1u) {
                sum += v[i];
                ++count;
            }
        const double theta = (sum - 1.0) / count;
        double violation = 0.0;
        std::vector<double> x(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if ((mask >> i) & 1u) {
                x[i] = v[i] - theta;
                violation = std::max(violation, -x[i]);
            } else {
                violation = std::max(violation, v[i] - theta);
            }
        }
        if (violation < best_violation) {
            best_violation = violation;
            best_x = x;
        }
    }
    return best_x;
}

/// Full-grid energy of per-pixel relaxed assignments c (pixel-major).
inline double grid_energy(std::size_t w, std::size_t h, std::size_t labels,
                          const std::vector<double>& rho, const std::vector<double>& c,
                          double lambda)
{
    double e = 0.0;
    for (std::size_t p = 0; p < w * h; ++p)
        for (std::size_t k = 0; k < labels; ++k) e += rho[p * labels + k] * c[p * labels + k];
    auto pair = [&](std::size_t p, std::size_t q) {
        double s = 0.0;
        for (std::size_t k = 0; k < labels; ++k) s += std::abs(c[p * labels + k] - c[q * labels + k]);
        e += 0.5 * lambda * s;
    };
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            if (x + 1 < w) pair(y * w + x, y * w + x + 1);
            if (y + 1 < h) pair(y * w + x, (y + 1) * w + x);
        }
    return e;
}

/// BFS labeling of 4-connected equal-value regions, ids in raster order.
template <class T>
std::vector<std::uint32_t> components(std::size_t w, std::size_t h, const std::vector<T>& v)
{
    const auto unset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> id(w * h, unset);
    std::uint32_t next = 0;
    for (std::size_t s = 0; s < w * h; ++s) {
        if (id[s] != unset) continue;
        std::queue<std::size_t> q;
        q.push(s);
        id[s] = next;
        while (!q.empty()) {
            const std::size_t p = q.front();
            q.pop();
            const std::size_t x = p % w, y = p / w;
            const std::size_t nb[4] = {x > 0 ? p - 1 : p, x + 1 < w ? p + 1 : p,
                                       y > 0 ? p - w : p, y + 1 < h ? p + w : p};
            for (std::size_t n : nb)
                if (n != p && id[n] == unset && v[n] == v[p]) {
                    id[n] = next;
                    q.push(n);
                }
        }
        ++next;
    }
    return id;
}

/// min over all B of sum_x unary(x) 1_B(x) + alpha * #(4-neighbor pairs split by B),
/// enumerated in Gray-code order.
inline double min_binary_cut(std::size_t w, std::size_t h, const std::vector<double>& unary,
                             double alpha)
{
    const std::size_t n = w * h;
    std::vector<char> in(n, 0);
    auto exact = [&](const std::vector<char>& set) {
        double v = 0.0;
        for (std::size_t q = 0; q < n; ++q)
            if (set[q]) v += unary[q];
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const std::size_t q = y * w + x;
                if (x + 1 < w && set[q] != set[q + 1]) v += alpha;
                if (y + 1 < h && set[q] != set[q + w]) v += alpha;
            }
        return v;
    };
    double value = 0.0, best = 0.0;
    for (std::uint64_t g = 1; g < (std::uint64_t{1} << n); ++g) {
        const auto p = static_cast<std::size_t>(__builtin_ctzll(g));
        const std::size_t x = p % w, y = p / w;
        const double sign = in[p] ? -1.0 : 1.0;
        value += sign * unary[p];
        auto edge = [&](std::size_t q) { value += (in[q] == in[p] ? alpha : -alpha); };
        if (x > 0) edge(p - 1);
        if (x + 1 < w) edge(p + 1);
        if (y > 0) edge(p - w);
        if (y + 1 < h) edge(p + w);
        in[p] = !in[p];
        if (value < best + 1e-9) {
            // Incremental sums drift; settle candidates exactly.
            value = exact(in);
            best = std::min(best, value);
        }
    }
    return best;
}

/// Direct evaluation of the binary-cut objective for one set.
inline double binary_cut_value(std::size_t w, std::size_t h, const std::vector<double>& unary,
                               double alpha, const std::vector<bool>& in)
{
    double v = 0.0;
    for (std::size_t p = 0; p < w * h; ++p)
        if (in[p]) v += unary[p];
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t p = y * w + x;
            if (x + 1 < w && in[p] != in[p + 1]) v += alpha;
            if (y + 1 < h && in[p] != in[p + w]) v += alpha;
        }
    return v;
}

/// Random 4-connected partition: grows seeds by random BFS until every pixel
/// is claimed.
inline std::vector<std::uint32_t> random_partition(std::size_t w, std::size_t h,
                                                   std::size_t segments, std::mt19937_64& rng)
{
    const auto unset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> label(w * h, unset);
    std::vector<std::size_t> frontier;
    std::uniform_int_distribution<std::size_t> pick(0, w * h - 1);
    std::uint32_t next = 0;
    while (next < segments) {
        const std::size_t p = pick(rng);
        if (label[p] != unset) continue;
        label[p] = next++;
        frontier.push_back(p);
    }
    while (!frontier.empty()) {
        std::uniform_int_distribution<std::size_t> f(0, frontier.size() - 1);
        const std::size_t idx = f(rng);
        const std::size_t p = frontier[idx];
        const std::size_t x = p % w, y = p / w;
        std::vector<std::size_t> open;
        if (x > 0 && label[p - 1] == unset) open.push_back(p - 1);
        if (x + 1 < w && label[p + 1] == unset) open.push_back(p + 1);
        if (y > 0 && label[p - w] == unset) open.push_back(p - w);
        if (y + 1 < h && label[p + w] == unset) open.push_back(p + w);
        if (open.empty()) {
            frontier[idx] = frontier.back();
            frontier.pop_back();
            continue;
        }
        std::uniform_int_distribution<std::size_t> o(0, open.size() - 1);
        const std::size_t q = open[o(rng)];
        label[q] = label[p];
        frontier.push_back(q);
    }
    return label;
}

/// True if a and b describe the same grouping of pixels (ids may differ).
inline bool same_grouping(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b)
{
    if (a.size() != b.size()) return false;
    std::vector<std::int64_t> ab, ba;
    for (std::size_t p = 0; p < a.size(); ++p) {
        if (ab.size() <= a[p]) ab.resize(a[p] + 1, -1);
        if (ba.size() <= b[p]) ba.resize(b[p] + 1, -1);
        if (ab[a[p]] == -1) ab[a[p]] = b[p];
        if (ba[b[p]] == -1) ba[b[p]] = a[p];
        if (ab[a[p]] != b[p] || ba[b[p]] != a[p]) return false;
    }
    return true;
}

} // namespace oracle
