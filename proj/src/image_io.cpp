#include "eis/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "eis/color.hpp"
#include "eis/matrix_io.hpp"

namespace eis {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// decoded rows, 8-bit, `channels` interleaved samples
struct PngPixels {
    int width = 0, height = 0, channels = 0;
    std::vector<std::uint8_t> data;
};

PngPixels read_png(const std::filesystem::path& path, bool want_gray) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f) throw Error("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("png init failed");
    }
    PngPixels out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("png decode failed: " + path.string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_packing(png);
    png_set_expand(png);  // palette -> rgb, gray<8 -> 8, tRNS -> alpha
    png_set_strip_alpha(png);
    if (want_gray)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    else
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = static_cast<int>(png_get_channels(png, info));
    out.data.resize(static_cast<std::size_t>(out.width) * out.height * out.channels);

    std::vector<png_bytep> rows(out.height);
    const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
    for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const std::filesystem::path& path, const std::uint8_t* data, int width, int height,
               int color_type, int bit_depth, int channels) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f) throw Error("cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("png encode failed: " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);  // payload is host (little) endian

    const std::size_t stride =
        static_cast<std::size_t>(width) * channels * (bit_depth == 16 ? 2 : 1);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(data + y * stride);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

bool has_ext(const std::filesystem::path& path, const char* a, const char* b = nullptr) {
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e == a || (b && e == b);
}

struct PnmHeader {
    int kind = 0;  // 5 or 6
    int width = 0, height = 0, maxval = 0;
};

PnmHeader read_pnm_header(std::ifstream& in, const std::filesystem::path& path) {
    auto next_token = [&in]() {
        std::string t;
        while (in) {
            int c = in.get();
            if (c == '#') {
                while (in && in.get() != '\n') {
                }
                continue;
            }
            if (std::isspace(c)) {
                if (!t.empty()) break;
                continue;
            }
            if (c == EOF) break;
            t.push_back(static_cast<char>(c));
        }
        return t;
    };
    PnmHeader h;
    const std::string magic = next_token();
    if (magic == "P6")
        h.kind = 6;
    else if (magic == "P5")
        h.kind = 5;
    else
        throw Error("unsupported PNM magic in " + path.string());
    h.width = std::stoi(next_token());
    h.height = std::stoi(next_token());
    h.maxval = std::stoi(next_token());
    if (h.width <= 0 || h.height <= 0 || h.maxval != 255)
        throw Error("unsupported PNM header in " + path.string());
    return h;
}

}  // namespace

Rgb8Image read_image_rgb8(const std::filesystem::path& path) {
    if (has_ext(path, ".ppm", ".pgm")) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path.string());
        const PnmHeader h = read_pnm_header(in, path);
        Rgb8Image img(h.width, h.height);
        if (h.kind == 6) {
            in.read(reinterpret_cast<char*>(img.data.data()),
                    static_cast<std::streamsize>(img.data.size()));
        } else {
            std::vector<std::uint8_t> g(img.pixel_count());
            in.read(reinterpret_cast<char*>(g.data()), static_cast<std::streamsize>(g.size()));
            for (std::size_t i = 0; i < g.size(); ++i)
                img.data[i * 3] = img.data[i * 3 + 1] = img.data[i * 3 + 2] = g[i];
        }
        if (!in) throw Error("truncated PNM payload in " + path.string());
        return img;
    }
    PngPixels p = read_png(path, /*want_gray=*/false);
    if (p.channels != 3) throw Error("unexpected channel count in " + path.string());
    Rgb8Image img(p.width, p.height);
    img.data = std::move(p.data);
    return img;
}

Gray8Image read_image_gray8(const std::filesystem::path& path) {
    if (has_ext(path, ".pgm")) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path.string());
        const PnmHeader h = read_pnm_header(in, path);
        if (h.kind != 5) throw Error("expected P5 in " + path.string());
        Gray8Image img(h.width, h.height);
        in.read(reinterpret_cast<char*>(img.data.data()),
                static_cast<std::streamsize>(img.data.size()));
        if (!in) throw Error("truncated PNM payload in " + path.string());
        return img;
    }
    PngPixels p = read_png(path, /*want_gray=*/true);
    if (p.channels != 1) throw Error("unexpected channel count in " + path.string());
    Gray8Image img(p.width, p.height);
    img.data = std::move(p.data);
    return img;
}

void write_png_rgb8(const std::filesystem::path& path, const Rgb8Image& image) {
    write_png(path, image.data.data(), image.width, image.height, PNG_COLOR_TYPE_RGB, 8, 3);
}

void write_png_gray8(const std::filesystem::path& path, const Gray8Image& image) {
    write_png(path, image.data.data(), image.width, image.height, PNG_COLOR_TYPE_GRAY, 8, 1);
}

void write_png_gray16(const std::filesystem::path& path, const std::vector<std::uint16_t>& data,
                      int width, int height) {
    if (data.size() != static_cast<std::size_t>(width) * height) throw Error("gray16 size mismatch");
    write_png(path, reinterpret_cast<const std::uint8_t*>(data.data()), width, height,
              PNG_COLOR_TYPE_GRAY, 16, 1);
}

void write_ppm(const std::filesystem::path& path, const Rgb8Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.data.data()),
              static_cast<std::streamsize>(image.data.size()));
}

void write_map_png(const std::filesystem::path& path, const SaliencyMap& map) {
    Gray8Image g(map.width(), map.height());
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        const float v = std::clamp(map.grid.data[i], 0.0f, 1.0f);
        g.data[i] = static_cast<std::uint8_t>(std::lround(255.0f * v));
    }
    write_png_gray8(path, g);
}

void write_map_sidecar(const std::filesystem::path& path, const SaliencyMap& map) {
    Eigen::MatrixXf m(map.height(), map.width());
    for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x) m(y, x) = map.grid.at(x, y);
    write_sfv1(path, m);
}

SaliencyMap read_map_sidecar(const std::filesystem::path& path) {
    const Eigen::MatrixXf m = read_sfv1(path);
    GrayF32Image g(static_cast<int>(m.cols()), static_cast<int>(m.rows()));
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) g.at(x, y) = m(y, x);
    return SaliencyMap(std::move(g), false);
}

}  // namespace eis
