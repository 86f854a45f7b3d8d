#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "cegan/tensor.hpp"

namespace cegan {

// 8-bit interleaved RGB image.
struct ImageU8 {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // height * width * 3
};

// Decodes a PNG. Grayscale is replicated to RGB, alpha is dropped, 16-bit
// depth is reduced to 8. Returns nullopt on any decode failure.
std::optional<ImageU8> read_png(const std::filesystem::path& path);

// Encodes 8-bit RGB. Throws IoError on failure.
void write_png(const std::filesystem::path& path, const ImageU8& img);

// u8 [0,255] -> float [0,1], layout [3,H,W].
Tensor<float> image_to_tensor(const ImageU8& img);

// Clamps to [0,1] and quantizes round-to-nearest. Accepts [3,H,W].
ImageU8 tensor_to_image(const Tensor<float>& t);

// Center-crops to square then bilinearly resamples to size x size.
Tensor<float> center_crop_resize(const Tensor<float>& t, int size);

}  // namespace cegan
