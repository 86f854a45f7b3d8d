#pragma once

#include <cstdint>
#include <vector>

#include "cegan/rng.hpp"
#include "cegan/tensor.hpp"

namespace cegan {

enum class MaskKind { center, random_block };

// Square occlusion covering ~`coverage` of the image area; side length is
// round(sqrt(coverage) * min(H,W)). `fill` replaces occluded pixels.
struct MaskSpec {
    MaskKind kind = MaskKind::center;
    double coverage = 0.25;
    float fill = 0.0f;
    uint64_t seed = 0;  // random_block placement
};

// Realized binary occlusion map; 1 = occluded.
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> occluded;
    int64_t occluded_count = 0;

    bool at(int h, int w) const { return occluded[size_t(h) * size_t(width) + size_t(w)] != 0; }
};

// Pure function of (spec, H, W); random_block placement comes from spec.seed.
Mask make_mask(const MaskSpec& spec, int height, int width);

// Same, but random_block placement draws from the supplied stream (used by
// the training loop so placements advance per iteration).
Mask make_mask(const MaskSpec& spec, int height, int width, Rng& rng);

// Map as a [1,H,W] tensor of 0/1.
Tensor<float> mask_map(const Mask& mask);

// Writes `fill` into occluded pixels of every channel; everything off-mask
// is untouched.
void apply_mask_inplace(Tensor<float>& images, const Mask& mask, float fill);
Tensor<float> apply_mask(const Tensor<float>& images, const Mask& mask, float fill);

const char* mask_kind_name(MaskKind kind);
MaskKind mask_kind_from_name(const std::string& name);

}  // namespace cegan
