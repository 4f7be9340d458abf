#include "liftgraph/io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "liftgraph/error.hpp"

namespace liftgraph::io {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

// Little-endian binary writer/reader over a byte buffer.
class ByteWriter {
public:
    void bytes(const char* data, std::size_t n) { buf_.append(data, n); }
    void u32(std::uint32_t v)
    {
        for (int s = 0; s < 32; s += 8) buf_.push_back(static_cast<char>((v >> s) & 0xff));
    }
    void u64(std::uint64_t v)
    {
        for (int s = 0; s < 64; s += 8) buf_.push_back(static_cast<char>((v >> s) & 0xff));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    const std::string& data() const { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    ByteReader(std::string data, fs::path path)
        : data_(std::move(data)), path_(std::move(path))
    {
    }

    void need(std::size_t n) const
    {
        if (data_.size() - pos_ < n)
            throw IoError(fmt::format("{}: truncated file", path_.string()));
    }
    std::string bytes(std::size_t n)
    {
        need(n);
        std::string out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * b);
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * b);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::string data_;
    std::size_t pos_ = 0;
    fs::path path_;
};

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump(const fs::path& path, const std::string& data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

// Raw integer samples of a gray/RGB raster.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 0;
    std::uint32_t maxval = 0;
    std::vector<std::uint32_t> samples;
};

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f)
        throw IoError(fmt::format("{}: cannot open ({})", path.string(),
                                  std::strerror(errno)));
    return f;
}

struct PngReadState {
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int channels = 0, bit_depth = 0;
};

Raster read_png(const fs::path& path)
{
    FilePtr file = open_file(path, "rb");
    std::array<png_byte, 8> sig{};
    if (std::fread(sig.data(), 1, sig.size(), file.get()) != sig.size() ||
        png_sig_cmp(sig.data(), 0, sig.size()) != 0)
        throw IoError(fmt::format("{}: not a PNG file", path.string()));

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             nullptr, nullptr);
    if (!png) throw IoError("libpng: cannot create read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng: cannot create info struct");
    }
    auto state = std::make_unique<PngReadState>();
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError(fmt::format("{}: corrupt PNG", path.string()));
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, static_cast<int>(sig.size()));
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    state->width = png_get_image_width(png, info);
    state->height = png_get_image_height(png, info);
    state->channels = png_get_channels(png, info);
    state->bit_depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    state->buffer.resize(rowbytes * state->height);
    state->rows.resize(state->height);
    for (png_uint_32 y = 0; y < state->height; ++y)
        state->rows[y] = state->buffer.data() + y * rowbytes;
    png_read_image(png, state->rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    // tRNS expansion may leave an alpha channel on gray/RGB inputs.
    const std::size_t in_channels = static_cast<std::size_t>(state->channels);
    const std::size_t out_channels = (in_channels >= 3) ? 3 : 1;
    Raster r;
    r.width = state->width;
    r.height = state->height;
    r.channels = out_channels;
    r.maxval = state->bit_depth == 16 ? 65535u : 255u;
    r.samples.resize(r.width * r.height * out_channels);
    const std::size_t bytes = state->bit_depth == 16 ? 2 : 1;
    for (std::size_t y = 0; y < r.height; ++y) {
        const png_byte* row = state->rows[y];
        for (std::size_t x = 0; x < r.width; ++x) {
            for (std::size_t c = 0; c < out_channels; ++c) {
                const png_byte* s = row + (x * in_channels + c) * bytes;
                r.samples[(y * r.width + x) * out_channels + c] =
                    bytes == 2 ? (static_cast<std::uint32_t>(s[0]) << 8) | s[1] : s[0];
            }
        }
    }
    return r;
}

struct PngWriteState {
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
};

void write_png(const fs::path& path, const Raster& r)
{
    if (r.width == 0 || r.height == 0)
        throw InvalidInput("png: empty raster");
    const int depth = r.maxval > 255 ? 16 : 8;
    const std::size_t bytes = depth == 16 ? 2 : 1;
    auto state = std::make_unique<PngWriteState>();
    const std::size_t rowbytes = r.width * r.channels * bytes;
    state->buffer.resize(rowbytes * r.height);
    state->rows.resize(r.height);
    for (std::size_t y = 0; y < r.height; ++y) {
        png_byte* row = state->buffer.data() + y * rowbytes;
        state->rows[y] = row;
        for (std::size_t i = 0; i < r.width * r.channels; ++i) {
            const std::uint32_t v = r.samples[y * r.width * r.channels + i];
            if (bytes == 2) {
                row[2 * i] = static_cast<png_byte>(v >> 8);
                row[2 * i + 1] = static_cast<png_byte>(v & 0xff);
            } else {
                row[i] = static_cast<png_byte>(v);
            }
        }
    }

    FilePtr file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    if (!png) throw IoError("libpng: cannot create write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng: cannot create info struct");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError(fmt::format("{}: PNG write failed", path.string()));
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(r.width),
                 static_cast<png_uint_32>(r.height), depth,
                 r.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, state->rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Netpbm header token reader (skips whitespace and '#' comments).
std::string pnm_token(const std::string& data, std::size_t& pos)
{
    for (;;) {
        while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        if (pos < data.size() && data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
}

std::uint64_t parse_uint(const std::string& token, const fs::path& path)
{
    if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos)
        throw IoError(fmt::format("{}: malformed header field '{}'", path.string(), token));
    return std::stoull(token);
}

Raster read_pnm(const fs::path& path)
{
    const std::string data = slurp(path);
    std::size_t pos = 0;
    const std::string magic = pnm_token(data, pos);
    if (magic != "P5" && magic != "P6")
        throw IoError(fmt::format("{}: unsupported netpbm type '{}'", path.string(), magic));
    Raster r;
    r.channels = magic == "P6" ? 3 : 1;
    r.width = parse_uint(pnm_token(data, pos), path);
    r.height = parse_uint(pnm_token(data, pos), path);
    const std::uint64_t maxval = parse_uint(pnm_token(data, pos), path);
    if (maxval == 0 || maxval > std::numeric_limits<std::uint32_t>::max())
        throw IoError(fmt::format("{}: bad maxval", path.string()));
    r.maxval = static_cast<std::uint32_t>(maxval);
    ++pos; // single whitespace before the raster
    const std::size_t bytes = maxval < 256 ? 1 : (maxval < 65536 ? 2 : 4);
    const std::size_t count = r.width * r.height * r.channels;
    if (r.width == 0 || r.height == 0 || data.size() < pos || data.size() - pos < count * bytes)
        throw IoError(fmt::format("{}: truncated raster", path.string()));
    r.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t v = 0;
        for (std::size_t b = 0; b < bytes; ++b)
            v = (v << 8) | static_cast<unsigned char>(data[pos + i * bytes + b]);
        if (v > maxval) throw IoError(fmt::format("{}: sample exceeds maxval", path.string()));
        r.samples[i] = v;
    }
    return r;
}

void write_pnm(const fs::path& path, const Raster& r)
{
    const std::size_t bytes = r.maxval < 256 ? 1 : (r.maxval < 65536 ? 2 : 4);
    std::string out = fmt::format("{}\n{} {}\n{}\n", r.channels == 3 ? "P6" : "P5",
                                  r.width, r.height, r.maxval);
    out.reserve(out.size() + r.samples.size() * bytes);
    for (std::uint32_t v : r.samples)
        for (std::size_t b = bytes; b-- > 0;)
            out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
    dump(path, out);
}

bool is_png(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
    std::array<char, 8> sig{};
    in.read(sig.data(), sig.size());
    return in.gcount() == 8 &&
           png_sig_cmp(reinterpret_cast<png_const_bytep>(sig.data()), 0, 8) == 0;
}

Raster read_raster(const fs::path& path)
{
    return is_png(path) ? read_png(path) : read_pnm(path);
}

bool has_pnm_extension(const fs::path& path)
{
    const auto ext = path.extension().string();
    return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

} // namespace

void write_graph(const fs::path& path, const ReducedGraph& graph)
{
    ByteWriter w;
    w.bytes("LGR1", 4);
    w.u32(static_cast<std::uint32_t>(graph.node_count()));
    w.u32(static_cast<std::uint32_t>(graph.labels()));
    w.u32(static_cast<std::uint32_t>(graph.edge_count()));
    for (double a : graph.node_area()) w.f64(a);
    for (double f : graph.node_potentials()) w.f64(f);
    for (const Edge& e : graph.edges()) {
        w.u32(e.i);
        w.u32(e.j);
        w.f64(e.weight);
    }
    dump(path, w.data());
}

ReducedGraph read_graph(const fs::path& path)
{
    ByteReader r(slurp(path), path);
    if (r.bytes(4) != "LGR1")
        throw IoError(fmt::format("{}: not an LGR1 graph file", path.string()));
    const std::size_t m = r.u32();
    const std::size_t labels = r.u32();
    const std::size_t edges = r.u32();
    r.need(m * 8 + m * labels * 8 + edges * 16);
    std::vector<double> area(m);
    for (auto& a : area) a = r.f64();
    std::vector<double> potentials(m * labels);
    for (auto& f : potentials) f = r.f64();
    std::vector<Edge> edge_list(edges);
    for (auto& e : edge_list) {
        e.i = r.u32();
        e.j = r.u32();
        e.weight = r.f64();
    }
    if (r.remaining() != 0)
        throw IoError(fmt::format("{}: trailing bytes after graph", path.string()));
    try {
        return ReducedGraph(labels, std::move(area), std::move(potentials),
                            std::move(edge_list));
    } catch (const InvalidInput& e) {
        throw IoError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_potentials(const fs::path& path, const PotentialField& field)
{
    ByteWriter w;
    w.bytes("LPOT", 4);
    w.u32(static_cast<std::uint32_t>(field.width()));
    w.u32(static_cast<std::uint32_t>(field.height()));
    w.u32(static_cast<std::uint32_t>(field.labels()));
    for (double c : field.costs()) w.f32(static_cast<float>(c));
    dump(path, w.data());
}

PotentialField read_potentials(const fs::path& path)
{
    ByteReader r(slurp(path), path);
    if (r.bytes(4) != "LPOT")
        throw IoError(fmt::format("{}: not an LPOT unary file", path.string()));
    const std::size_t width = r.u32();
    const std::size_t height = r.u32();
    const std::size_t labels = r.u32();
    r.need(width * height * labels * 4);
    std::vector<double> costs(width * height * labels);
    for (auto& c : costs) c = r.f32();
    if (r.remaining() != 0)
        throw IoError(fmt::format("{}: trailing bytes after costs", path.string()));
    try {
        return PotentialField(width, height, labels, std::move(costs));
    } catch (const InvalidInput& e) {
        throw IoError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

fs::path sidecar_path(const fs::path& path)
{
    fs::path out = path;
    out += ".hdr";
    return out;
}

void write_partition(const fs::path& path, const Partition& partition)
{
    const bool wide = partition.segment_count() > 65536;
    Raster r;
    r.width = partition.width();
    r.height = partition.height();
    r.channels = 1;
    r.maxval = wide ? std::numeric_limits<std::uint32_t>::max() : 65535u;
    r.samples.assign(partition.labels().begin(), partition.labels().end());
    write_pnm(path, r);
    dump(sidecar_path(path),
         fmt::format("LPART1\nwidth {}\nheight {}\nsegments {}\nbits {}\n",
                     partition.width(), partition.height(),
                     partition.segment_count(), wide ? 32 : 16));
}

Partition read_partition(const fs::path& path)
{
    const std::string header = slurp(sidecar_path(path));
    std::istringstream in(header);
    std::string magic;
    in >> magic;
    if (magic != "LPART1")
        throw IoError(fmt::format("{}: bad partition sidecar", sidecar_path(path).string()));
    std::size_t width = 0, height = 0, segments = 0, bits = 0;
    std::string key;
    while (in >> key) {
        std::size_t value = 0;
        if (!(in >> value))
            throw IoError(fmt::format("{}: malformed sidecar entry '{}'", path.string(), key));
        if (key == "width") width = value;
        else if (key == "height") height = value;
        else if (key == "segments") segments = value;
        else if (key == "bits") bits = value;
    }
    const Raster r = read_pnm(path);
    if (r.channels != 1 || r.width != width || r.height != height)
        throw IoError(fmt::format("{}: raster does not match sidecar", path.string()));
    if ((bits == 16 && r.maxval != 65535u) || (bits == 32 && r.maxval <= 65535u) ||
        (bits != 16 && bits != 32))
        throw IoError(fmt::format("{}: sample width does not match sidecar", path.string()));
    try {
        Partition p(width, height, r.samples);
        if (p.segment_count() != segments)
            throw IoError(fmt::format("{}: sidecar says {} segments, map has {}",
                                      path.string(), segments, p.segment_count()));
        return p;
    } catch (const InvalidInput& e) {
        throw IoError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

Image read_image(const fs::path& path)
{
    const Raster r = read_raster(path);
    if (r.maxval > 65535u)
        throw IoError(fmt::format("{}: sample depth too large for an image", path.string()));
    std::vector<double> values(r.samples.size());
    const double scale = 1.0 / r.maxval;
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = r.samples[i] * scale;
    return Image(r.width, r.height, r.channels, std::move(values));
}

void write_image(const fs::path& path, const Image& image)
{
    Raster r;
    r.width = image.width();
    r.height = image.height();
    r.channels = image.channels();
    r.maxval = 255;
    r.samples.resize(image.values().size());
    for (std::size_t i = 0; i < r.samples.size(); ++i)
        r.samples[i] = static_cast<std::uint32_t>(
            std::lround(std::clamp(image.values()[i], 0.0, 1.0) * 255.0));
    if (has_pnm_extension(path))
        write_pnm(path, r);
    else
        write_png(path, r);
}

LabelMap read_label_map(const fs::path& path)
{
    Raster r = read_raster(path);
    if (r.channels != 1)
        throw IoError(fmt::format("{}: label map must be single-channel", path.string()));
    return {r.width, r.height, std::move(r.samples)};
}

void write_label_png(const fs::path& path, std::size_t width, std::size_t height,
                     const std::vector<std::uint32_t>& labels)
{
    if (labels.size() != width * height)
        throw InvalidInput("label png: size mismatch");
    for (auto v : labels)
        if (v > 65535u) throw InvalidInput("label png: label exceeds 16 bits");
    Raster r{width, height, 1, 65535u, labels};
    write_png(path, r);
}

} // namespace liftgraph::io
