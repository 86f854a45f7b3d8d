#include "cegan/mask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cegan/errors.hpp"

namespace cegan {

namespace {

Mask block_mask(int height, int width, int top, int left, int side) {
    Mask m;
    m.height = height;
    m.width = width;
    m.occluded.assign(size_t(height) * size_t(width), 0);
    for (int h = top; h < top + side; ++h)
        std::fill_n(m.occluded.begin() + size_t(h) * size_t(width) + size_t(left), size_t(side),
                    uint8_t(1));
    m.occluded_count = int64_t(side) * side;
    return m;
}

int mask_side(const MaskSpec& spec, int height, int width) {
    if (!(spec.coverage > 0.0 && spec.coverage < 1.0))
        throw ContractError("mask coverage must be in (0,1), got " + std::to_string(spec.coverage));
    if (spec.coverage * height * width < 1.0)
        throw ContractError("mask coverage " + std::to_string(spec.coverage) +
                            " is degenerate for a " + std::to_string(height) + "x" +
                            std::to_string(width) + " image");
    const int side = int(std::lround(std::sqrt(spec.coverage) * std::min(height, width)));
    if (side < 1 || side > std::min(height, width))
        throw ContractError("mask side " + std::to_string(side) + " out of range");
    return side;
}

}  // namespace

Mask make_mask(const MaskSpec& spec, int height, int width) {
    if (spec.kind == MaskKind::random_block) {
        Rng rng(spec.seed);
        return make_mask(spec, height, width, rng);
    }
    const int side = mask_side(spec, height, width);
    return block_mask(height, width, (height - side) / 2, (width - side) / 2, side);
}

Mask make_mask(const MaskSpec& spec, int height, int width, Rng& rng) {
    const int side = mask_side(spec, height, width);
    if (spec.kind == MaskKind::center)
        return block_mask(height, width, (height - side) / 2, (width - side) / 2, side);
    const int top = int(rng.below(uint64_t(height - side + 1)));
    const int left = int(rng.below(uint64_t(width - side + 1)));
    return block_mask(height, width, top, left, side);
}

Tensor<float> mask_map(const Mask& mask) {
    Tensor<float> t = Tensor<float>::zeros({1, mask.height, mask.width});
    for (size_t i = 0; i < mask.occluded.size(); ++i) t.data[i] = mask.occluded[i] ? 1.0f : 0.0f;
    return t;
}

void apply_mask_inplace(Tensor<float>& images, const Mask& mask, float fill) {
    if (images.shape.size() != 4 || images.shape[2] != mask.height || images.shape[3] != mask.width)
        throw DimensionError("apply_mask: images " + shape_str(images.shape) +
                             " do not match mask " + std::to_string(mask.height) + "x" +
                             std::to_string(mask.width));
    const int64_t planes = images.shape[0] * images.shape[1];
    const int64_t hw = images.shape[2] * images.shape[3];
    for (int64_t p = 0; p < planes; ++p) {
        float* dst = images.ptr() + p * hw;
        for (int64_t i = 0; i < hw; ++i)
            if (mask.occluded[size_t(i)]) dst[i] = fill;
    }
}

Tensor<float> apply_mask(const Tensor<float>& images, const Mask& mask, float fill) {
    Tensor<float> out = images;
    apply_mask_inplace(out, mask, fill);
    return out;
}

const char* mask_kind_name(MaskKind kind) {
    return kind == MaskKind::center ? "center" : "random";
}

MaskKind mask_kind_from_name(const std::string& name) {
    if (name == "center") return MaskKind::center;
    if (name == "random" || name == "random_block") return MaskKind::random_block;
    throw ConfigError("unknown mask kind '" + name + "' (expected center|random)");
}

}  // namespace cegan
