#pragma once

// File formats.
//
// Raw signal (.scs): 32-byte header followed by the samples.
//   bytes  0..3   magic "SCS1"
//   bytes  4..7   u32 dim (1 or 2)
//   bytes  8..11  u32 extent along axis 0
//   bytes 12..15  u32 extent along axis 1 (1 when dim == 1)
//   bytes 16..23  f64 spacing
//   bytes 24..31  reserved, zero
// then extent0*extent1 little-endian f64 pairs (re, im), row-major.
//
// PGM ingestion: binary P5, 8-bit; pixel v maps to the real sample v/255 on a
// unit-spacing grid. Dimensions must be powers of two.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scatstab/signal.hpp"

namespace scatstab {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline double get_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace detail

inline void write_signal(const Signal& f, const std::string& path) {
    std::string buf;
    buf.reserve(32 + 16 * f.samples.size());
    buf += "SCS1";
    detail::put_u32(buf, static_cast<std::uint32_t>(f.grid.dim));
    detail::put_u32(buf, static_cast<std::uint32_t>(f.grid.extent[0]));
    detail::put_u32(buf, static_cast<std::uint32_t>(f.grid.extent[1]));
    detail::put_f64(buf, f.grid.spacing);
    buf.append(8, '\0');
    for (const cplx& v : f.samples) {
        detail::put_f64(buf, v.real());
        detail::put_f64(buf, v.imag());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("write failed: " + path);
}

inline Signal read_signal(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() < 32 || std::memcmp(raw.data(), "SCS1", 4) != 0)
        throw IoError("not an SCS1 file: " + path);
    const std::uint32_t dim = detail::get_u32(raw.data() + 4);
    const std::uint32_t e0 = detail::get_u32(raw.data() + 8);
    const std::uint32_t e1 = detail::get_u32(raw.data() + 12);
    const double spacing = detail::get_f64(raw.data() + 16);
    Grid g(static_cast<int>(dim), {e0, e1}, spacing);
    const std::size_t n = g.size();
    if (raw.size() != 32 + 16 * n) throw IoError("truncated SCS1 file: " + path);
    std::vector<cplx> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* p = raw.data() + 32 + 16 * i;
        samples[i] = cplx(detail::get_f64(p), detail::get_f64(p + 8));
    }
    return Signal(g, std::move(samples));
}

inline Signal read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("not a binary PGM (P5): " + path);
    auto next_int = [&in, &path]() {
        // skip whitespace and '#' comment lines
        int c = in.peek();
        while (c == '#' || std::isspace(c)) {
            if (c == '#') in.ignore(1 << 20, '\n');
            else in.get();
            c = in.peek();
        }
        long v = -1;
        in >> v;
        if (!in || v < 0) throw IoError("malformed PGM header: " + path);
        return static_cast<std::size_t>(v);
    };
    const std::size_t width = next_int();
    const std::size_t height = next_int();
    const std::size_t maxval = next_int();
    if (maxval != 255) throw IoError("only 8-bit PGM supported: " + path);
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> pix(width * height);
    in.read(reinterpret_cast<char*>(pix.data()), static_cast<std::streamsize>(pix.size()));
    if (!in) throw IoError("truncated PGM data: " + path);
    Grid g = Grid::plane(height, width, 1.0);
    Signal f(g);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            f.samples[g.index(r, c)] = cplx(static_cast<double>(pix[r * width + c]) / 255.0, 0.0);
    return f;
}

inline void write_pgm(const Signal& f, const std::string& path) {
    if (f.grid.dim != 2) throw IoError("write_pgm: 2-d signals only");
    if (f.samples.empty()) throw IoError("write_pgm: empty signal");
    double lo = f.samples[0].real(), hi = f.samples[0].real();
    for (const cplx& v : f.samples) {
        lo = std::min(lo, v.real());
        hi = std::max(hi, v.real());
    }
    const double span = hi - lo > 0 ? hi - lo : 1.0;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "P5\n" << f.grid.extent[1] << " " << f.grid.extent[0] << "\n255\n";
    for (const cplx& v : f.samples) {
        const double t = (v.real() - lo) / span;
        out.put(static_cast<char>(std::lround(255.0 * std::clamp(t, 0.0, 1.0))));
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace scatstab
