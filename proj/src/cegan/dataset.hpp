#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cegan/tensor.hpp"

namespace cegan {

// Uniform-size image collection in [0,1]; immutable after load.
struct Dataset {
    std::vector<Tensor<float>> images;  // each [3,H,W]
    std::vector<std::string> paths;
    int height = 0;
    int width = 0;

    size_t size() const { return images.size(); }
};

// Scans `dir` non-recursively for *.png (case-insensitive), lexicographic
// byte order. Each image is center-cropped square, bilinearly resized to
// image_size and scaled to [0,1]. Undecodable files are skipped with a
// warning; zero decodable files is fatal.
Dataset load_dataset(const std::filesystem::path& dir, int image_size);

// Seeded shuffle then partition: train gets floor(fraction*N) images.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction,
                                          uint64_t seed);

// Index batches for one epoch, reshuffled per (seed, epoch); the final
// partial batch is kept, so there are ceil(N/batch_size) steps.
std::vector<std::vector<int>> batch_plan(int n, int batch_size, uint64_t seed, int epoch);

// Stacks the indexed images into one [B,3,H,W] batch.
Tensor<float> gather_batch(const Dataset& ds, const std::vector<int>& indices);

// Procedural fixture: seeded mixtures of 2-D gaussian blobs over linear
// gradients, smooth enough that a center block is predictable from context.
Dataset synthetic_dataset(int n, int image_size, uint64_t seed);

}  // namespace cegan
