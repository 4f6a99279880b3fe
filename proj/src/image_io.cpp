#include "vpsal/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace vpsal {
namespace {

std::string lower_ext(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    return f;
}

RasterImage read_png(const std::filesystem::path& path) {
    FilePtr file = open_file(path, "rb");
    unsigned char sig[8] = {};
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw Error(ErrorCode::Format, "not a PNG file: " + path.string());
    }

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::Io, "libpng initialisation failed");
    }

    std::vector<png_byte> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int depth = 0;
    int channels = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorCode::Format, "corrupt PNG: " + path.string());
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color_type & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(png);
    }
    png_read_update_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    depth = png_get_bit_depth(png, info);
    channels = png_get_channels(png, info);

    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) {
        rows[y] = pixels.data() + y * stride;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (width == 0 || height == 0) {
        throw Error(ErrorCode::Format, "zero-dimension image: " + path.string());
    }
    if (channels != 1 && channels != 3) {
        throw Error(ErrorCode::Format, "unsupported PNG channel layout: " + path.string());
    }

    RasterImage img(static_cast<int>(width), static_cast<int>(height), channels);
    auto out = img.values();
    const std::size_t n = out.size();
    if (depth == 16) {
        for (std::size_t i = 0; i < n; ++i) {
            unsigned v = (static_cast<unsigned>(pixels[2 * i]) << 8) | pixels[2 * i + 1];
            out[i] = v / 65535.0;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = pixels[i] / 255.0;
        }
    }
    return img;
}

// Netpbm header tokens, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    while (in) {
        int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    in >> tok;
    return tok;
}

RasterImage read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    const std::string magic = next_token(in);
    int channels = 0;
    bool binary = false;
    if (magic == "P2") {
        channels = 1;
    } else if (magic == "P5") {
        channels = 1;
        binary = true;
    } else if (magic == "P3") {
        channels = 3;
    } else if (magic == "P6") {
        channels = 3;
        binary = true;
    } else {
        throw Error(ErrorCode::Format, "unsupported netpbm variant in " + path.string());
    }
    int width = 0;
    int height = 0;
    long maxval = 0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        maxval = std::stol(next_token(in));
    } catch (const std::exception&) {
        throw Error(ErrorCode::Format, "malformed netpbm header in " + path.string());
    }
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::Format, "zero-dimension image: " + path.string());
    }
    if (maxval <= 0 || maxval > 65535) {
        throw Error(ErrorCode::Format, "bad netpbm maxval in " + path.string());
    }

    RasterImage img(width, height, channels);
    auto out = img.values();
    const double scale = 1.0 / static_cast<double>(maxval);
    if (binary) {
        in.get();  // single whitespace after maxval
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(out.size() * bytes_per);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
            throw Error(ErrorCode::Format, "truncated netpbm data in " + path.string());
        }
        for (std::size_t i = 0; i < out.size(); ++i) {
            unsigned v = bytes_per == 2 ? (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
            out[i] = std::min(1.0, v * scale);
        }
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            long v = 0;
            if (!(in >> v)) {
                throw Error(ErrorCode::Format, "truncated netpbm data in " + path.string());
            }
            out[i] = std::clamp(static_cast<double>(v) * scale, 0.0, 1.0);
        }
    }
    return img;
}

void write_png(const std::filesystem::path& path, int width, int height, int channels, int depth,
               const std::vector<png_byte>& pixels) {
    FilePtr file = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::Io, "libpng initialisation failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::Io, "failed writing " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), depth,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels) * (depth / 8);
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * stride);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_pnm(const std::filesystem::path& path, int width, int height, int channels, int maxval,
               const std::vector<unsigned char>& raw) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    }
    out << (channels == 1 ? "P5" : "P6") << '\n' << width << ' ' << height << '\n' << maxval << '\n';
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "failed writing " + path.string());
    }
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::Io, "no such file: " + path.string());
    }
    const std::string ext = lower_ext(path);
    if (ext == ".png") {
        return read_png(path);
    }
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
        return read_pnm(path);
    }
    throw Error(ErrorCode::Format, "unsupported image format: " + path.string());
}

void save_map(const ScalarMap& map, const std::filesystem::path& path) {
    std::vector<unsigned char> raw(map.size() * 2);
    auto v = map.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto q = static_cast<unsigned>(std::lround(std::clamp(v[i], 0.0, 1.0) * 65535.0));
        raw[2 * i] = static_cast<unsigned char>(q >> 8);
        raw[2 * i + 1] = static_cast<unsigned char>(q & 0xFF);
    }
    const std::string ext = lower_ext(path);
    if (ext == ".png") {
        write_png(path, map.width(), map.height(), 1, 16, raw);
    } else if (ext == ".pgm") {
        write_pnm(path, map.width(), map.height(), 1, 65535, raw);
    } else {
        throw Error(ErrorCode::Format, "maps export as .png or .pgm, got " + path.string());
    }
}

void save_image(const RasterImage& img, const std::filesystem::path& path) {
    std::vector<unsigned char> raw(img.values().size());
    auto v = img.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        raw[i] = static_cast<unsigned char>(std::lround(std::clamp(v[i], 0.0, 1.0) * 255.0));
    }
    const std::string ext = lower_ext(path);
    if (ext == ".png") {
        write_png(path, img.width(), img.height(), img.channels(), 8, raw);
    } else if ((ext == ".pgm" && img.channels() == 1) || (ext == ".ppm" && img.channels() == 3)) {
        write_pnm(path, img.width(), img.height(), img.channels(), 255, raw);
    } else {
        throw Error(ErrorCode::Format, "cannot write " + std::to_string(img.channels()) + "-channel image as " +
                                           path.string());
    }
}

}  // namespace vpsal
