#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "liftgraph/core.hpp"

namespace liftgraph::io {

// Binary graph file, all fields little-endian:
//   "LGR1"  u32 M  u32 L  u32 E
//   M x f64 node area
//   M*L x f64 node potentials (node-major)
//   E x (u32 i, u32 j, f64 w)
void write_graph(const std::filesystem::path& path, const ReducedGraph& graph);
ReducedGraph read_graph(const std::filesystem::path& path);

// Unary / cost-volume file, little-endian:
//   "LPOT"  u32 width  u32 height  u32 L
//   width*height*L x f32, row-major over pixels, label fastest
// Costs are stored single precision; reading yields float-exact doubles.
void write_potentials(const std::filesystem::path& path,
                      const PotentialField& field);
PotentialField read_potentials(const std::filesystem::path& path);

// Partition label map: binary PGM ("P5") with maxval 65535 (16-bit samples)
// when M <= 65536, otherwise maxval 4294967295 with 32-bit samples; samples
// are big-endian as in PGM. The sidecar "<path>.hdr" is a text file:
//   LPART1
//   width <w>
//   height <h>
//   segments <M>
//   bits <16|32>
void write_partition(const std::filesystem::path& path,
                     const Partition& partition);
Partition read_partition(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& path);

/// Reads PNG (8/16-bit gray, gray+alpha, RGB, RGBA) or binary PGM/PPM
/// (P5/P6, maxval up to 65535). Alpha is dropped.
Image read_image(const std::filesystem::path& path);
/// Writes an 8-bit PNG, or PGM/PPM when the extension is .pgm/.ppm.
void write_image(const std::filesystem::path& path, const Image& image);

struct LabelMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint32_t> labels;
};

/// Integer label image (raw sample values) from an 8/16-bit gray PNG or PGM.
LabelMap read_label_map(const std::filesystem::path& path);
/// 16-bit gray PNG of raw label values; labels must be < 65536.
void write_label_png(const std::filesystem::path& path, std::size_t width,
                     std::size_t height, const std::vector<std::uint32_t>& labels);

} // namespace liftgraph::io
