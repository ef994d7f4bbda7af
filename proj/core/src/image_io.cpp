#include "gt2/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace gt2 {

namespace {

uint32_t crc32_table_entry(uint32_t n) {
    uint32_t c = n;
    for (int k = 0; k < 8; ++k)
        c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
    return c;
}

uint32_t crc32(const uint8_t* data, size_t len, uint32_t crc = 0) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t n = 0; n < 256; ++n)
            t[n] = crc32_table_entry(n);
        return t;
    }();
    uint32_t c = crc ^ 0xffffffffu;
    for (size_t i = 0; i < len; ++i)
        c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

uint32_t adler32(const uint8_t* data, size_t len) {
    uint32_t a = 1, b = 0;
    for (size_t i = 0; i < len; ++i) {
        a = (a + data[i]) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

void put_u32be(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(static_cast<uint8_t>(x >> 24));
    v.push_back(static_cast<uint8_t>(x >> 16));
    v.push_back(static_cast<uint8_t>(x >> 8));
    v.push_back(static_cast<uint8_t>(x));
}

void append_chunk(std::vector<uint8_t>& out, const char type[4],
                  const std::vector<uint8_t>& payload) {
    put_u32be(out, static_cast<uint32_t>(payload.size()));
    std::vector<uint8_t> body(type, type + 4);
    body.insert(body.end(), payload.begin(), payload.end());
    out.insert(out.end(), body.begin(), body.end());
    put_u32be(out, crc32(body.data(), body.size()));
}

// zlib stream made of stored deflate blocks only
std::vector<uint8_t> zlib_stored(const std::vector<uint8_t>& raw) {
    std::vector<uint8_t> z;
    z.push_back(0x78);  // 32K window, deflate
    z.push_back(0x01);
    size_t pos = 0;
    const size_t total = raw.size();
    do {
        const size_t n = std::min<size_t>(65535, total - pos);
        const bool last = pos + n == total;
        z.push_back(last ? 1 : 0);
        z.push_back(static_cast<uint8_t>(n & 0xff));
        z.push_back(static_cast<uint8_t>(n >> 8));
        z.push_back(static_cast<uint8_t>(~n & 0xff));
        z.push_back(static_cast<uint8_t>((~n >> 8) & 0xff));
        z.insert(z.end(), raw.begin() + pos, raw.begin() + pos + n);
        pos += n;
    } while (pos < total);
    put_u32be(z, adler32(raw.data(), raw.size()));
    return z;
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw IoError("write_png: only 1 or 3 channels supported: " + path);
    if (img.height <= 0 || img.width <= 0)
        throw IoError("write_png: empty image: " + path);

    const int ch = img.channels;
    std::vector<uint8_t> raw;
    raw.reserve(static_cast<size_t>(img.height) * (img.width * ch + 1));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < ch; ++c) {
                const double v = std::clamp(img.at(y, x, c), 0.0, 1.0);
                raw.push_back(static_cast<uint8_t>(std::lround(v * 255.0)));
            }
        }
    }

    std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    std::vector<uint8_t> ihdr;
    put_u32be(ihdr, static_cast<uint32_t>(img.width));
    put_u32be(ihdr, static_cast<uint32_t>(img.height));
    ihdr.push_back(8);                    // bit depth
    ihdr.push_back(ch == 3 ? 2 : 0);      // color type
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", zlib_stored(raw));
    append_chunk(out, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("write_png: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f)
        throw IoError("write_png: write failed: " + path);
}

Image read_png(const std::string& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), &std::fclose);
    if (!fp)
        throw IoError("read_png: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw IoError("read_png: init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("read_png: init failed");
    }
    std::vector<std::vector<uint8_t>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("read_png: decode failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const size_t rowbytes = png_get_rowbytes(png, info);

    rows.assign(h, std::vector<uint8_t>(rowbytes));
    std::vector<png_bytep> row_ptrs(h);
    for (int y = 0; y < h; ++y)
        row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(h, w, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = rows[y][x * 3 + c] / 255.0;
    return img;
}

namespace {

void put_u32le(std::ofstream& f, uint32_t x) {
    uint8_t b[4] = {static_cast<uint8_t>(x), static_cast<uint8_t>(x >> 8),
                    static_cast<uint8_t>(x >> 16), static_cast<uint8_t>(x >> 24)};
    f.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32le(std::ifstream& f) {
    uint8_t b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_float_grid(const std::string& path, const Image& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw IoError("write_float_grid: cannot open " + path);
    f.write("GT2F", 4);
    put_u32le(f, static_cast<uint32_t>(img.height));
    put_u32le(f, static_cast<uint32_t>(img.width));
    put_u32le(f, static_cast<uint32_t>(img.channels));
    for (double v : img.data) {
        const float x = static_cast<float>(v);
        static_assert(sizeof(float) == 4);
        uint32_t bits;
        std::memcpy(&bits, &x, 4);
        uint8_t b[4] = {static_cast<uint8_t>(bits), static_cast<uint8_t>(bits >> 8),
                        static_cast<uint8_t>(bits >> 16), static_cast<uint8_t>(bits >> 24)};
        f.write(reinterpret_cast<const char*>(b), 4);
    }
    if (!f)
        throw IoError("write_float_grid: write failed: " + path);
}

Image read_float_grid(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("read_float_grid: cannot open " + path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "GT2F", 4) != 0)
        throw IoError("read_float_grid: bad magic in " + path);
    const uint32_t h = get_u32le(f), w = get_u32le(f), c = get_u32le(f);
    if (!f || h == 0 || w == 0 || c == 0 || h > 1u << 20 || w > 1u << 20 || c > 4096)
        throw IoError("read_float_grid: bad header in " + path);
    Image img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
    for (double& v : img.data) {
        uint8_t b[4];
        f.read(reinterpret_cast<char*>(b), 4);
        uint32_t bits = static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
                        (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
        float x;
        std::memcpy(&x, &bits, 4);
        v = x;
    }
    if (!f)
        throw IoError("read_float_grid: truncated file " + path);
    return img;
}

Image read_image(const std::string& path) {
    const auto dot = path.rfind('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png")
        return read_png(path);
    return read_float_grid(path);
}

Image heatmap(const Image& scalar_map) {
    if (scalar_map.channels != 1)
        throw std::invalid_argument("heatmap: expected 1 channel");
    const Image n = minmax_normalize(scalar_map);
    Image out(n.height, n.width, 3);
    for (int y = 0; y < n.height; ++y) {
        for (int x = 0; x < n.width; ++x) {
            const double t = n.at(y, x, 0);
            // blue (0) -> white (0.5) -> red (1)
            if (t < 0.5) {
                const double s = t * 2.0;
                out.at(y, x, 0) = s;
                out.at(y, x, 1) = s;
                out.at(y, x, 2) = 1.0;
            } else {
                const double s = (t - 0.5) * 2.0;
                out.at(y, x, 0) = 1.0;
                out.at(y, x, 1) = 1.0 - s;
                out.at(y, x, 2) = 1.0 - s;
            }
        }
    }
    return out;
}

}  // namespace gt2
