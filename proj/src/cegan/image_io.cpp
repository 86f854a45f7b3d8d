#include "cegan/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "cegan/errors.hpp"

namespace cegan {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

std::optional<ImageU8> read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) return std::nullopt;

    uint8_t sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) return std::nullopt;

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) return std::nullopt;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        return std::nullopt;
    }

    std::optional<ImageU8> result;
    std::vector<png_bytep> rows;
    ImageU8 img;
    if (setjmp(png_jmpbuf(png))) {  // libpng error path
        png_destroy_read_struct(&png, &info, nullptr);
        return std::nullopt;
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB: expand palettes and low-bit gray,
    // replicate gray to three channels, strip 16-bit depth and alpha.
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    const png_byte color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    img.width = int(png_get_image_width(png, info));
    img.height = int(png_get_image_height(png, info));
    if (img.width <= 0 || img.height <= 0 || png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        return std::nullopt;
    }
    img.pixels.resize(size_t(img.width) * size_t(img.height) * 3);
    rows.resize(size_t(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[size_t(y)] = img.pixels.data() + size_t(y) * size_t(img.width) * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    result = std::move(img);
    return result;
}

void write_png(const std::filesystem::path& path, const ImageU8& img) {
    if (img.width <= 0 || img.height <= 0 ||
        img.pixels.size() != size_t(img.width) * size_t(img.height) * 3)
        throw IoError("write_png: malformed image buffer for " + path.string());

    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("write_png: cannot open " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("write_png: libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("write_png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("write_png: encode failed for " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(size_t(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[size_t(y)] =
            const_cast<png_bytep>(img.pixels.data() + size_t(y) * size_t(img.width) * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Tensor<float> image_to_tensor(const ImageU8& img) {
    Tensor<float> t = Tensor<float>::zeros({3, img.height, img.width});
    const int64_t hw = int64_t(img.height) * img.width;
    for (int64_t i = 0; i < hw; ++i)
        for (int64_t c = 0; c < 3; ++c)
            t.data[size_t(c * hw + i)] = float(img.pixels[size_t(i * 3 + c)]) / 255.0f;
    return t;
}

ImageU8 tensor_to_image(const Tensor<float>& t) {
    if (t.shape.size() != 3 || t.shape[0] != 3)
        throw DimensionError("tensor_to_image expects [3,H,W], got " + shape_str(t.shape));
    ImageU8 img;
    img.height = int(t.shape[1]);
    img.width = int(t.shape[2]);
    const int64_t hw = int64_t(img.height) * img.width;
    img.pixels.resize(size_t(hw) * 3);
    for (int64_t i = 0; i < hw; ++i) {
        for (int64_t c = 0; c < 3; ++c) {
            const float v = std::clamp(t.data[size_t(c * hw + i)], 0.0f, 1.0f);
            img.pixels[size_t(i * 3 + c)] = uint8_t(std::lround(v * 255.0f));
        }
    }
    return img;
}

Tensor<float> center_crop_resize(const Tensor<float>& t, int size) {
    if (t.shape.size() != 3 || t.shape[0] != 3)
        throw DimensionError("center_crop_resize expects [3,H,W], got " + shape_str(t.shape));
    const int64_t h = t.shape[1], w = t.shape[2];
    const int64_t side = std::min(h, w);
    const int64_t top = (h - side) / 2, left = (w - side) / 2;

    Tensor<float> out = Tensor<float>::zeros({3, size, size});
    const double scale = double(side) / double(size);
    for (int64_t c = 0; c < 3; ++c) {
        const float* src = t.ptr() + c * h * w;
        float* dst = out.ptr() + int64_t(c) * size * size;
        for (int64_t y = 0; y < size; ++y) {
            const double sy = (double(y) + 0.5) * scale - 0.5;
            const int64_t y0 = std::clamp<int64_t>(int64_t(std::floor(sy)), 0, side - 1);
            const int64_t y1 = std::min<int64_t>(y0 + 1, side - 1);
            const double fy = std::clamp(sy - double(y0), 0.0, 1.0);
            for (int64_t x = 0; x < size; ++x) {
                const double sx = (double(x) + 0.5) * scale - 0.5;
                const int64_t x0 = std::clamp<int64_t>(int64_t(std::floor(sx)), 0, side - 1);
                const int64_t x1 = std::min<int64_t>(x0 + 1, side - 1);
                const double fx = std::clamp(sx - double(x0), 0.0, 1.0);
                const double v00 = src[(top + y0) * w + left + x0];
                const double v01 = src[(top + y0) * w + left + x1];
                const double v10 = src[(top + y1) * w + left + x0];
                const double v11 = src[(top + y1) * w + left + x1];
                const double v0 = v00 + (v01 - v00) * fx;
                const double v1 = v10 + (v11 - v10) * fx;
                dst[y * size + x] = float(v0 + (v1 - v0) * fy);
            }
        }
    }
    return out;
}

}  // namespace cegan
