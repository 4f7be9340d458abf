#pragma once

// Synthetic test images.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "liftgraph/core.hpp"

namespace synthetic {

/// Four constant quadrants with distinct colors.
inline liftgraph::Image four_blocks(std::size_t w, std::size_t h)
{
    const double colors[4][3] = {{0.9, 0.1, 0.1}, {0.1, 0.8, 0.2}, {0.2, 0.2, 0.9}, {0.9, 0.9, 0.2}};
    std::vector<double> v(w * h * 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t b = (y >= h / 2 ? 2 : 0) + (x >= w / 2 ? 1 : 0);
            for (std::size_t c = 0; c < 3; ++c) v[(y * w + x) * 3 + c] = colors[b][c];
        }
    return liftgraph::Image(w, h, 3, std::move(v));
}

inline std::vector<std::uint32_t> four_block_labels(std::size_t w, std::size_t h)
{
    std::vector<std::uint32_t> l(w * h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) l[y * w + x] = (y >= h / 2 ? 2 : 0) + (x >= w / 2 ? 1 : 0);
    return l;
}

/// Random overlapping rectangles of random colors, box-blurred, plus
/// Gaussian noise.
inline liftgraph::Image natural_like(std::size_t w, std::size_t h, std::uint64_t seed,
                                     int rectangles = 40, double noise = 0.03)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(w * h * 3);
    for (std::size_t p = 0; p < w * h; ++p)
        for (std::size_t c = 0; c < 3; ++c) v[p * 3 + c] = 0.5;
    for (int r = 0; r < rectangles; ++r) {
        const auto x0 = static_cast<std::size_t>(u(rng) * w), y0 = static_cast<std::size_t>(u(rng) * h);
        const auto rw = static_cast<std::size_t>((0.1 + 0.4 * u(rng)) * w);
        const auto rh = static_cast<std::size_t>((0.1 + 0.4 * u(rng)) * h);
        const double col[3] = {u(rng), u(rng), u(rng)};
        for (std::size_t y = y0; y < std::min(h, y0 + rh); ++y)
            for (std::size_t x = x0; x < std::min(w, x0 + rw); ++x)
                for (std::size_t c = 0; c < 3; ++c) v[(y * w + x) * 3 + c] = col[c];
    }
    // 3x3 box blur
    std::vector<double> b(v.size());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                double s = 0.0;
                int n = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const long xx = static_cast<long>(x) + dx, yy = static_cast<long>(y) + dy;
                        if (xx < 0 || yy < 0 || xx >= static_cast<long>(w) || yy >= static_cast<long>(h))
                            continue;
                        s += v[(static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)) * 3 + c];
                        ++n;
                    }
                b[(y * w + x) * 3 + c] = s / n;
            }
    std::normal_distribution<double> nd(0.0, noise);
    for (double& x : b) x = std::clamp(x + nd(rng), 0.0, 1.0);
    return liftgraph::Image(w, h, 3, std::move(b));
}

/// Left view of a random textured scene whose right view is shifted by
/// `shift` pixels: left(x) = right(x - shift). Returns {left, right}.
inline std::pair<liftgraph::Image, liftgraph::Image> stereo_pair(std::size_t w, std::size_t h,
                                                                  std::size_t shift, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Texture of 2x2 random cells so the SAD minimum is unambiguous.
    std::vector<double> right(w * h), left(w * h);
    std::vector<double> cells((w / 2 + 1) * (h / 2 + 1));
    for (double& c : cells) c = u(rng);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) right[y * w + x] = cells[(y / 2) * (w / 2 + 1) + x / 2];
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            left[y * w + x] = right[y * w + (x >= shift ? x - shift : 0)];
    return {liftgraph::Image(w, h, 1, std::move(left)), liftgraph::Image(w, h, 1, std::move(right))};
}

} // namespace synthetic
