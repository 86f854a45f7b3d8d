#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "cegan/adam.hpp"
#include "cegan/init.hpp"
#include "cegan/ops.hpp"
#include "cegan/params.hpp"
#include "cegan/rng.hpp"
#include "cegan/tape.hpp"

namespace cegan {

// Architecture description. Six units per network; the encoder/discriminator
// pool after units 1..5, so image_size must divide by 32. Channel widths are
// configurable; the defaults double up to a 256 cap.
struct ModelSpec {
    int image_size = 128;
    std::array<int, 6> channels{32, 64, 128, 256, 256, 256};
    int in_channels = 3;  // RGB
    bool include_mask_channel = false;
    bool use_batch_norm = false;

    int latent_spatial() const { return image_size / 32; }
    int generator_in_channels() const { return in_channels + (include_mask_channel ? 1 : 0); }
};

inline void validate_spec(const ModelSpec& spec) {
    if (spec.image_size <= 0 || spec.image_size % 32 != 0)
        throw ConfigError("image_size must be a positive multiple of 32, got " +
                          std::to_string(spec.image_size));
    for (int c : spec.channels)
        if (c <= 0) throw ConfigError("channel widths must be positive");
    if (spec.in_channels != 3) throw ConfigError("in_channels must be 3 (RGB)");
}

// Shapes observed during a forward pass, for tests and diagnostics.
struct ForwardTrace {
    Shape latent_shape;
    int64_t latent_spatial = 0;
    std::vector<int64_t> encoder_spatial;  // after each unit (post-pool where pooled)
};

namespace detail {

// One unit: conv 3x3 (same padding) -> [bn] -> elu -> conv 2x2 (same spatial
// via top/left padding) -> [bn] -> elu. Even kernels cannot pad symmetrically;
// padding 1 on top/left only keeps the spatial size and is deterministic.
template <typename T>
typename Tape<T>::Index conv_unit(Tape<T>& tape, typename Tape<T>::Index x,
                                  ParamSet<T>& params, std::map<std::string, Tensor<T>>& buffers,
                                  const std::string& prefix, bool use_bn, bool train,
                                  bool trainable) {
    auto p = [&](const std::string& suffix) -> Tensor<T>& { return params.at(prefix + suffix); };
    auto run_conv = [&](typename Tape<T>::Index in, const char* conv, Padding pad,
                        const char* bn) {
        auto out = conv2d(tape, in, tape.leaf(p(std::string(conv) + ".weight"), trainable),
                          tape.leaf(p(std::string(conv) + ".bias"), trainable), 1, pad);
        if (use_bn) {
            const std::string b = prefix + bn;
            out = batch_norm(tape, out, tape.leaf(p(std::string(bn) + ".gamma"), trainable),
                             tape.leaf(p(std::string(bn) + ".beta"), trainable),
                             buffers.at(b + ".running_mean"), buffers.at(b + ".running_var"),
                             train);
        }
        return elu(tape, out);
    };
    x = run_conv(x, "conv1", Padding::same(1), "bn1");
    x = run_conv(x, "conv2", Padding{1, 1, 0, 0}, "bn2");
    return x;
}

template <typename T>
void add_conv(ParamSet<T>& params, const std::string& prefix, int in_ch, int out_ch, int k,
              Rng& rng) {
    params.emplace(prefix + ".weight",
                   he_normal<T>({out_ch, in_ch, k, k}, int64_t(in_ch) * k * k, rng));
    params.emplace(prefix + ".bias", Tensor<T>::zeros({out_ch}));
}

template <typename T>
void add_bn(ParamSet<T>& params, std::map<std::string, Tensor<T>>& buffers,
            const std::string& prefix, int ch) {
    params.emplace(prefix + ".gamma", Tensor<T>::full({ch}, T(1)));
    params.emplace(prefix + ".beta", Tensor<T>::zeros({ch}));
    buffers.emplace(prefix + ".running_mean", Tensor<T>::zeros({ch}));
    buffers.emplace(prefix + ".running_var", Tensor<T>::full({ch}, T(1)));
}

template <typename T>
void add_unit(ParamSet<T>& params, std::map<std::string, Tensor<T>>& buffers,
              const std::string& prefix, int in_ch, int width, bool use_bn, Rng& rng) {
    add_conv(params, prefix + ".conv1", in_ch, width, 3, rng);
    add_conv(params, prefix + ".conv2", width, width, 2, rng);
    if (use_bn) {
        add_bn(params, buffers, prefix + ".bn1", width);
        add_bn(params, buffers, prefix + ".bn2", width);
    }
}

template <typename T>
void mark_trainable(ParamSet<T>& params) {
    for (auto& [name, p] : params) p.requires_grad = true;
}

}  // namespace detail

// Autoencoder generator: 6 encoder units (pool after 1..5), flat latent
// bottleneck, 6 decoder units with the encoder widths reversed (upsample
// before 2..6), then a 3-channel projection conv under a sigmoid so pixels
// land in [0,1].
template <typename T>
struct Generator {
    ModelSpec spec;
    ParamSet<T> params;
    std::map<std::string, Tensor<T>> buffers;

    typename Tape<T>::Index forward(Tape<T>& tape, typename Tape<T>::Index input, bool train,
                                    bool trainable = true, ForwardTrace* trace = nullptr) {
        const Tensor<T>& in = tape.value(input);
        detail::check_rank(in, 4, "generator input");
        const int64_t cin = spec.generator_in_channels();
        if (in.shape[1] != cin || in.shape[2] != spec.image_size || in.shape[3] != spec.image_size)
            throw DimensionError("generator input " + shape_str(in.shape) + " does not match [" +
                                 "N," + std::to_string(cin) + "," + std::to_string(spec.image_size) +
                                 "," + std::to_string(spec.image_size) + "]");
        const int64_t n = in.shape[0];

        auto x = input;
        for (int i = 0; i < 6; ++i) {
            x = detail::conv_unit(tape, x, params, buffers, "enc.unit" + std::to_string(i + 1),
                                  spec.use_batch_norm, train, trainable);
            if (i < 5) x = maxpool2d(tape, x);
            if (trace) trace->encoder_spatial.push_back(tape.value(x).shape[2]);
        }

        const int64_t g = spec.latent_spatial();
        const int64_t c5 = spec.channels[5];
        auto latent = reshape(tape, x, Shape{n, c5 * g * g});
        if (trace) {
            trace->latent_shape = tape.value(latent).shape;
            trace->latent_spatial = g;
        }
        auto y = reshape(tape, latent, Shape{n, c5, g, g});

        for (int j = 0; j < 6; ++j) {
            if (j > 0) y = upsample2x(tape, y);
            y = detail::conv_unit(tape, y, params, buffers, "dec.unit" + std::to_string(j + 1),
                                  spec.use_batch_norm, train, trainable);
        }
        auto out = conv2d(tape, y, tape.leaf(params.at("proj.weight"), trainable),
                          tape.leaf(params.at("proj.bias"), trainable), 1, Padding::same(1));
        return sigmoid(tape, out);
    }

    // Inference pass, no gradients.
    Tensor<T> run(const Tensor<T>& batch) {
        Tape<T> tape;
        auto out = forward(tape, tape.constant(batch), /*train=*/false, /*trainable=*/false);
        return tape.value(out);
    }
};

// Convolutional discriminator: the encoder stack on 3-channel images plus a
// global-average-pool / affine / sigmoid head giving a per-image real
// probability in (0,1).
template <typename T>
struct Discriminator {
    ModelSpec spec;
    ParamSet<T> params;
    std::map<std::string, Tensor<T>> buffers;

    typename Tape<T>::Index forward(Tape<T>& tape, typename Tape<T>::Index input, bool train,
                                    bool trainable = true) {
        const Tensor<T>& in = tape.value(input);
        detail::check_rank(in, 4, "discriminator input");
        if (in.shape[1] != spec.in_channels || in.shape[2] != spec.image_size ||
            in.shape[3] != spec.image_size)
            throw DimensionError("discriminator input " + shape_str(in.shape) +
                                 " does not match [N,3," + std::to_string(spec.image_size) + "," +
                                 std::to_string(spec.image_size) + "]");
        auto x = input;
        for (int i = 0; i < 6; ++i) {
            x = detail::conv_unit(tape, x, params, buffers, "unit" + std::to_string(i + 1),
                                  spec.use_batch_norm, train, trainable);
            if (i < 5) x = maxpool2d(tape, x);
        }
        x = global_avg_pool(tape, x);
        x = affine(tape, x, tape.leaf(params.at("head.weight"), trainable),
                   tape.leaf(params.at("head.bias"), trainable));
        return sigmoid(tape, x);
    }

    Tensor<T> run(const Tensor<T>& batch) {
        Tape<T> tape;
        auto out = forward(tape, tape.constant(batch), /*train=*/false, /*trainable=*/false);
        return tape.value(out);
    }
};

template <typename T>
Generator<T> build_generator(const ModelSpec& spec, uint64_t seed) {
    validate_spec(spec);
    Generator<T> g;
    g.spec = spec;
    Rng rng(derive_seed(seed, 0x67656eULL));
    int in_ch = spec.generator_in_channels();
    for (int i = 0; i < 6; ++i) {
        detail::add_unit(g.params, g.buffers, "enc.unit" + std::to_string(i + 1), in_ch,
                         spec.channels[size_t(i)], spec.use_batch_norm, rng);
        in_ch = spec.channels[size_t(i)];
    }
    for (int j = 0; j < 6; ++j) {
        const int width = spec.channels[size_t(5 - j)];
        detail::add_unit(g.params, g.buffers, "dec.unit" + std::to_string(j + 1), in_ch, width,
                         spec.use_batch_norm, rng);
        in_ch = width;
    }
    detail::add_conv(g.params, "proj", in_ch, spec.in_channels, 3, rng);
    detail::mark_trainable(g.params);
    return g;
}

template <typename T>
Discriminator<T> build_discriminator(const ModelSpec& spec, uint64_t seed) {
    validate_spec(spec);
    Discriminator<T> d;
    d.spec = spec;
    Rng rng(derive_seed(seed, 0x646973ULL));
    int in_ch = spec.in_channels;
    for (int i = 0; i < 6; ++i) {
        detail::add_unit(d.params, d.buffers, "unit" + std::to_string(i + 1), in_ch,
                         spec.channels[size_t(i)], spec.use_batch_norm, rng);
        in_ch = spec.channels[size_t(i)];
    }
    d.params.emplace("head.weight", he_normal<T>({in_ch, 1}, in_ch, rng));
    d.params.emplace("head.bias", Tensor<T>::zeros({1}));
    detail::mark_trainable(d.params);
    return d;
}

// Parameter counts by shape arithmetic; must agree with the built ParamSets.
inline int64_t count_unit_params(int in_ch, int width, bool use_bn) {
    int64_t n = int64_t(width) * in_ch * 3 * 3 + width;  // conv1
    n += int64_t(width) * width * 2 * 2 + width;         // conv2
    if (use_bn) n += 4 * int64_t(width);                 // gamma+beta per bn
    return n;
}

inline int64_t count_generator_params(const ModelSpec& spec) {
    int64_t n = 0;
    int in_ch = spec.generator_in_channels();
    for (int i = 0; i < 6; ++i) {
        n += count_unit_params(in_ch, spec.channels[size_t(i)], spec.use_batch_norm);
        in_ch = spec.channels[size_t(i)];
    }
    for (int j = 0; j < 6; ++j) {
        const int width = spec.channels[size_t(5 - j)];
        n += count_unit_params(in_ch, width, spec.use_batch_norm);
        in_ch = width;
    }
    n += int64_t(spec.in_channels) * in_ch * 3 * 3 + spec.in_channels;  // proj
    return n;
}

inline int64_t count_discriminator_params(const ModelSpec& spec) {
    int64_t n = 0;
    int in_ch = spec.in_channels;
    for (int i = 0; i < 6; ++i) {
        n += count_unit_params(in_ch, spec.channels[size_t(i)], spec.use_batch_norm);
        in_ch = spec.channels[size_t(i)];
    }
    n += in_ch + 1;  // head
    return n;
}

inline int64_t count_params(const ModelSpec& spec) {
    return count_generator_params(spec) + count_discriminator_params(spec);
}

}  // namespace cegan
