#pragma once

#include <zlib.h>

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "tactsim/core/error.hpp"
#include "tactsim/core/types.hpp"

namespace tactsim {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// number formatting

// Shortest decimal form that parses back to the same double. Used for every
// number we print, so reports are compact and byte-stable.
inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    require(res.ec == std::errc() && res.ptr == s.data() + s.size(), "io/bad-number",
            "not a number: '" + s + "'");
    return v;
}

// ---------------------------------------------------------------------------
// whole-file helpers

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "io/open", "cannot open " + path.string());
    f.seekg(0, std::ios::end);
    std::vector<std::uint8_t> data(std::size_t(f.tellg()));
    f.seekg(0);
    f.read(reinterpret_cast<char*>(data.data()), std::streamsize(data.size()));
    require(f.good() || data.empty(), "io/read", "short read on " + path.string());
    return data;
}

inline void write_file(const std::filesystem::path& path, const void* data, std::size_t n) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    require(f.good(), "io/open", "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(data), std::streamsize(n));
    require(f.good(), "io/write", "short write on " + path.string());
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    write_file(path, text.data(), text.size());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    auto bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
}

// ---------------------------------------------------------------------------
// little-endian packing (explicit bytes, host-order independent)

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v & 0xff));
    out.push_back(std::uint8_t((v >> 8) & 0xff));
    out.push_back(std::uint8_t((v >> 16) & 0xff));
    out.push_back(std::uint8_t((v >> 24) & 0xff));
}

inline void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t((v >> (8 * i)) & 0xff));
}

inline void put_f32le(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(out, bits);
}

inline void put_f64le(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64le(out, bits);
}

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t n) : data_(data), n_(n) {}
    explicit ByteReader(const std::vector<std::uint8_t>& v) : data_(v.data()), n_(v.size()) {}

    std::size_t remaining() const { return n_ - pos_; }
    std::size_t position() const { return pos_; }

    const std::uint8_t* take(std::size_t n) {
        require(pos_ + n <= n_, "io/truncated", "file truncated");
        const std::uint8_t* p = data_ + pos_;
        pos_ += n;
        return p;
    }

    std::uint8_t u8() { return *take(1); }

    std::uint32_t u32le() {
        const std::uint8_t* p = take(4);
        return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
               std::uint32_t(p[3]) << 24;
    }

    std::uint64_t u64le() {
        std::uint64_t v = 0;
        const std::uint8_t* p = take(8);
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
        return v;
    }

    float f32le() {
        std::uint32_t bits = u32le();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    double f64le() {
        std::uint64_t bits = u64le();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    std::uint32_t u32be() {
        const std::uint8_t* p = take(4);
        return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 |
               std::uint32_t(p[3]);
    }

private:
    const std::uint8_t* data_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// mesh + face sidecar files
//
// Both formats are a single JSON header line followed by a little-endian
// binary payload: float32 x,y,z per vertex for .vtx, uint32 triples for
// .faces. The header names the topology so readers can bind the sidecar.

inline constexpr const char* kMeshMagic = "TSMESH";
inline constexpr const char* kFacesMagic = "TSFACES";

namespace detail {

inline json read_header_line(ByteReader& r, const std::filesystem::path& path,
                             const char* expected_magic) {
    std::string line;
    while (r.remaining() > 0) {
        char c = char(r.u8());
        if (c == '\n') break;
        line.push_back(c);
        require(line.size() < 4096, "io/bad-header", "header line too long in " + path.string());
    }
    json h = json::parse(line, nullptr, false);
    require(!h.is_discarded() && h.is_object(), "io/bad-header",
            "unparsable header in " + path.string());
    require(h.contains("magic") && h["magic"].is_string() &&
                h["magic"].get<std::string>() == expected_magic,
            "io/bad-magic", "wrong magic in " + path.string());
    require(h.value("version", 0) == 1, "io/bad-version",
            "unsupported version in " + path.string());
    return h;
}

}  // namespace detail

inline void save_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
    require(mesh.topology != nullptr, "mesh/no-topology", "mesh has no topology");
    require(mesh.vertices.size() % 3 == 0 &&
                mesh.vertex_count() == mesh.topology->vertex_count,
            "mesh/vertex-count", "vertex array does not match topology");
    json h;
    h["magic"] = kMeshMagic;
    h["version"] = 1;
    h["topology_id"] = mesh.topology->id;
    h["V"] = mesh.vertex_count();
    std::string header = h.dump();
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.push_back('\n');
    out.reserve(out.size() + mesh.vertices.size() * 4);
    for (float v : mesh.vertices) put_f32le(out, v);
    write_file(path, out.data(), out.size());
}

// Returns a mesh whose topology holds only the id and vertex count; callers
// inside a dataset bind the face sidecar afterwards.
inline TriMesh load_mesh(const std::filesystem::path& path) {
    auto bytes = read_file(path);
    ByteReader r(bytes);
    json h = detail::read_header_line(r, path, kMeshMagic);
    const std::int64_t v_count = h.value("V", std::int64_t(0));
    require(v_count > 0, "io/bad-header", "missing vertex count in " + path.string());
    require(r.remaining() == std::size_t(v_count) * 12, "io/truncated",
            "vertex payload size mismatch in " + path.string());
    auto topo = std::make_shared<Topology>();
    topo->id = h.value("topology_id", std::string());
    topo->vertex_count = v_count;
    TriMesh mesh;
    mesh.topology = topo;
    mesh.vertices.resize(std::size_t(v_count) * 3);
    for (auto& v : mesh.vertices) v = r.f32le();
    return mesh;
}

inline void save_faces(const std::filesystem::path& path, const Topology& topo) {
    topo.validate();
    json h;
    h["magic"] = kFacesMagic;
    h["version"] = 1;
    h["topology_id"] = topo.id;
    h["V"] = topo.vertex_count;
    h["F"] = topo.face_count();
    std::string header = h.dump();
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.push_back('\n');
    for (std::uint32_t f : topo.faces) put_u32le(out, f);
    write_file(path, out.data(), out.size());
}

inline std::shared_ptr<Topology> load_faces(const std::filesystem::path& path) {
    auto bytes = read_file(path);
    ByteReader r(bytes);
    json h = detail::read_header_line(r, path, kFacesMagic);
    auto topo = std::make_shared<Topology>();
    topo->id = h.value("topology_id", std::string());
    topo->vertex_count = h.value("V", std::int64_t(0));
    const std::int64_t f_count = h.value("F", std::int64_t(0));
    require(r.remaining() == std::size_t(f_count) * 12, "io/truncated",
            "face payload size mismatch in " + path.string());
    topo->faces.resize(std::size_t(f_count) * 3);
    for (auto& f : topo->faces) f = r.u32le();
    topo->validate();
    return topo;
}

// ---------------------------------------------------------------------------
// PNG (8-bit, non-interlaced; we write RGB, read gray/RGB/RGBA)

namespace detail {

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::uint8_t* data, std::size_t n) {
    out.push_back(std::uint8_t(n >> 24));
    out.push_back(std::uint8_t(n >> 16));
    out.push_back(std::uint8_t(n >> 8));
    out.push_back(std::uint8_t(n));
    std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data, data + n);
    ::uLong crc = ::crc32(0L, out.data() + start, ::uInt(out.size() - start));
    out.push_back(std::uint8_t(crc >> 24));
    out.push_back(std::uint8_t(crc >> 16));
    out.push_back(std::uint8_t(crc >> 8));
    out.push_back(std::uint8_t(crc));
}

inline int png_paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace detail

// rgb: h*w*3 bytes, row-major.
inline std::vector<std::uint8_t> encode_png_rgb8(std::int32_t h, std::int32_t w,
                                                 const std::uint8_t* rgb) {
    require(h > 0 && w > 0, "image/empty", "png with zero extent");
    const std::size_t stride = std::size_t(w) * 3;
    std::vector<std::uint8_t> raw;
    raw.reserve(std::size_t(h) * (stride + 1));
    for (std::int32_t y = 0; y < h; ++y) {
        raw.push_back(0);  // filter: none
        raw.insert(raw.end(), rgb + y * stride, rgb + (y + 1) * stride);
    }
    ::uLongf comp_len = ::compressBound(::uLong(raw.size()));
    std::vector<std::uint8_t> comp(comp_len);
    int zrc = ::compress2(comp.data(), &comp_len, raw.data(), ::uLong(raw.size()), 6);
    require(zrc == Z_OK, "io/zlib", "zlib compression failed");
    comp.resize(comp_len);

    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<std::uint8_t> out(sig, sig + 8);
    std::uint8_t ihdr[13];
    ihdr[0] = std::uint8_t(std::uint32_t(w) >> 24);
    ihdr[1] = std::uint8_t(std::uint32_t(w) >> 16);
    ihdr[2] = std::uint8_t(std::uint32_t(w) >> 8);
    ihdr[3] = std::uint8_t(std::uint32_t(w));
    ihdr[4] = std::uint8_t(std::uint32_t(h) >> 24);
    ihdr[5] = std::uint8_t(std::uint32_t(h) >> 16);
    ihdr[6] = std::uint8_t(std::uint32_t(h) >> 8);
    ihdr[7] = std::uint8_t(std::uint32_t(h));
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // color type: truecolor
    ihdr[10] = 0;  // compression
    ihdr[11] = 0;  // filter method
    ihdr[12] = 0;  // no interlace
    detail::png_chunk(out, "IHDR", ihdr, 13);
    detail::png_chunk(out, "IDAT", comp.data(), comp.size());
    detail::png_chunk(out, "IEND", nullptr, 0);
    return out;
}

struct PngImage {
    std::int32_t height = 0;
    std::int32_t width = 0;
    std::vector<std::uint8_t> rgb;  // always expanded to 3 channels
};

inline PngImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
    static const std::uint8_t sig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    require(bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0, "io/bad-magic",
            "not a png: " + origin);
    ByteReader r(bytes);
    r.take(8);

    std::int64_t w = 0, h = 0;
    int color_type = -1;
    std::vector<std::uint8_t> idat;
    bool seen_end = false;
    while (r.remaining() > 0 && !seen_end) {
        std::uint32_t len = r.u32be();
        require(r.remaining() >= std::size_t(len) + 8, "io/truncated", "truncated png: " + origin);
        const std::uint8_t* type_ptr = r.take(4);
        char type[5] = {char(type_ptr[0]), char(type_ptr[1]), char(type_ptr[2]),
                        char(type_ptr[3]), 0};
        const std::uint8_t* data = r.take(len);
        std::uint32_t crc = r.u32be();
        ::uLong expect = ::crc32(0L, type_ptr, 4);
        expect = ::crc32(expect, data, len);
        require(crc == std::uint32_t(expect), "io/corrupt", "png crc mismatch in " + origin);

        if (std::strcmp(type, "IHDR") == 0) {
            require(len == 13, "io/corrupt", "bad IHDR in " + origin);
            ByteReader hr(data, len);
            w = hr.u32be();
            h = hr.u32be();
            int depth = hr.u8();
            color_type = hr.u8();
            hr.u8();  // compression
            hr.u8();  // filter
            int interlace = hr.u8();
            require(depth == 8, "io/unsupported", "only 8-bit pngs supported: " + origin);
            require(color_type == 0 || color_type == 2 || color_type == 6, "io/unsupported",
                    "unsupported png color type in " + origin);
            require(interlace == 0, "io/unsupported", "interlaced png unsupported: " + origin);
        } else if (std::strcmp(type, "IDAT") == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::strcmp(type, "IEND") == 0) {
            seen_end = true;
        }
        // ancillary chunks ignored
    }
    require(w > 0 && h > 0 && color_type >= 0, "io/corrupt", "png missing IHDR: " + origin);
    require(!idat.empty(), "io/corrupt", "png missing IDAT: " + origin);

    const int ch = color_type == 0 ? 1 : color_type == 2 ? 3 : 4;
    const std::size_t stride = std::size_t(w) * ch;
    std::vector<std::uint8_t> raw(std::size_t(h) * (stride + 1));
    ::uLongf raw_len = ::uLongf(raw.size());
    int zrc = ::uncompress(raw.data(), &raw_len, idat.data(), ::uLong(idat.size()));
    require(zrc == Z_OK && raw_len == raw.size(), "io/corrupt",
            "png inflate failed for " + origin);

    // undo per-row filters in place
    std::vector<std::uint8_t> prev(stride, 0);
    PngImage img;
    img.height = std::int32_t(h);
    img.width = std::int32_t(w);
    img.rgb.resize(std::size_t(h) * w * 3);
    std::vector<std::uint8_t> cur(stride);
    for (std::int64_t y = 0; y < h; ++y) {
        const std::uint8_t* row = raw.data() + std::size_t(y) * (stride + 1);
        int filter = row[0];
        const std::uint8_t* src = row + 1;
        for (std::size_t i = 0; i < stride; ++i) {
            int a = i >= std::size_t(ch) ? cur[i - ch] : 0;
            int b = prev[i];
            int c = i >= std::size_t(ch) ? prev[i - ch] : 0;
            int x = src[i];
            switch (filter) {
                case 0: cur[i] = std::uint8_t(x); break;
                case 1: cur[i] = std::uint8_t(x + a); break;
                case 2: cur[i] = std::uint8_t(x + b); break;
                case 3: cur[i] = std::uint8_t(x + (a + b) / 2); break;
                case 4: cur[i] = std::uint8_t(x + detail::png_paeth(a, b, c)); break;
                default: raise("io/corrupt", "bad png filter in " + origin);
            }
        }
        for (std::int64_t x = 0; x < w; ++x) {
            std::uint8_t r8, g8, b8;
            if (ch == 1) {
                r8 = g8 = b8 = cur[std::size_t(x)];
            } else {
                r8 = cur[std::size_t(x) * ch + 0];
                g8 = cur[std::size_t(x) * ch + 1];
                b8 = cur[std::size_t(x) * ch + 2];
            }
            std::size_t o = (std::size_t(y) * w + x) * 3;
            img.rgb[o + 0] = r8;
            img.rgb[o + 1] = g8;
            img.rgb[o + 2] = b8;
        }
        std::swap(prev, cur);
    }
    return img;
}

// ---------------------------------------------------------------------------
// tactile image <-> PNG with the affine pixel map p/127.5 - 1

inline std::uint8_t quantize_pixel(float v) {
    double p = std::lround((double(v) + 1.0) * 127.5);
    return std::uint8_t(std::min(255.0, std::max(0.0, p)));
}

inline float dequantize_pixel(std::uint8_t p) {
    return float(double(p) / 127.5 - 1.0);
}

inline void save_image(const std::filesystem::path& path, const TactileImage& im) {
    im.validate();
    for (float v : im.pixels)
        require(v >= -1.0f && v <= 1.0f, "image/range",
                "pixel outside [-1, 1] in " + path.string());
    std::vector<std::uint8_t> rgb(im.pixels.size());
    for (std::size_t i = 0; i < im.pixels.size(); ++i) rgb[i] = quantize_pixel(im.pixels[i]);
    auto png = encode_png_rgb8(im.height, im.width, rgb.data());
    write_file(path, png.data(), png.size());
}

inline TactileImage load_image(const std::filesystem::path& path) {
    auto png = decode_png(read_file(path), path.string());
    TactileImage im;
    im.height = png.height;
    im.width = png.width;
    im.pixels.resize(png.rgb.size());
    for (std::size_t i = 0; i < png.rgb.size(); ++i) im.pixels[i] = dequantize_pixel(png.rgb[i]);
    return im;
}

// ---------------------------------------------------------------------------
// force table

struct ForceRecord {
    std::string trajectory_id;
    std::int32_t frame = 0;
    ForceVec force;
};

inline constexpr const char* kForcesHeader = "trajectory_id,frame,fx,fy,fz";

inline std::string forces_to_csv(const std::vector<ForceRecord>& records) {
    std::string out = kForcesHeader;
    out.push_back('\n');
    for (const auto& r : records) {
        out += r.trajectory_id;
        out.push_back(',');
        out += std::to_string(r.frame);
        out.push_back(',');
        out += fmt_double(r.force.fx);
        out.push_back(',');
        out += fmt_double(r.force.fy);
        out.push_back(',');
        out += fmt_double(r.force.fz);
        out.push_back('\n');
    }
    return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return fields;
}

inline std::vector<ForceRecord> forces_from_csv(const std::string& text,
                                                const std::string& origin) {
    std::vector<ForceRecord> records;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = end + 1;
        if (line.empty()) continue;
        if (first) {
            require(line == kForcesHeader, "io/bad-header",
                    "unexpected force csv header in " + origin);
            first = false;
            continue;
        }
        auto f = split_csv_line(line);
        require(f.size() == 5, "io/corrupt", "bad force csv row in " + origin);
        ForceRecord r;
        r.trajectory_id = f[0];
        r.frame = std::int32_t(parse_double(f[1]));
        r.force.fx = parse_double(f[2]);
        r.force.fy = parse_double(f[3]);
        r.force.fz = parse_double(f[4]);
        records.push_back(std::move(r));
    }
    require(!first, "io/bad-header", "empty force csv " + origin);
    return records;
}

}  // namespace tactsim
