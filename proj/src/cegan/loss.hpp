#pragma once

#include <cstdint>
#include <vector>

#include "cegan/mask.hpp"
#include "cegan/ops.hpp"

namespace cegan {

// Per-iteration loss values. l_total is always computed as the single
// expression l_rec + lambda*l_adv_g, so the identity can be re-checked
// bit-exactly from the logged components.
struct LossReport {
    int64_t iteration = 0;
    int epoch = 0;
    int step = 0;
    float l_disc = 0.0f;
    float l_adv_g = 0.0f;
    float l_rec = 0.0f;
    float l_total = 0.0f;
};

// Mean squared error over all elements. With a mask and region_weight != 1,
// squared errors inside the occluded region are scaled by region_weight
// before the mean, emphasizing the missing region over its context.
template <typename T>
typename Tape<T>::Index reconstruction_loss(Tape<T>& tape, typename Tape<T>::Index output,
                                            typename Tape<T>::Index target,
                                            const Mask* mask = nullptr,
                                            T region_weight = T(1)) {
    const Tensor<T>& out = tape.value(output);
    const Tensor<T>& tgt = tape.value(target);
    if (out.shape != tgt.shape)
        throw DimensionError("reconstruction_loss: output " + shape_str(out.shape) +
                             " vs target " + shape_str(tgt.shape));
    auto diff = sub(tape, output, target);
    auto sq = mul(tape, diff, diff);
    if (mask != nullptr && region_weight != T(1)) {
        if (out.shape.size() != 4 || out.shape[2] != mask->height || out.shape[3] != mask->width)
            throw DimensionError("reconstruction_loss: mask " + std::to_string(mask->height) +
                                 "x" + std::to_string(mask->width) + " vs output " +
                                 shape_str(out.shape));
        Tensor<T> weights = Tensor<T>::full(out.shape, T(1));
        const int64_t planes = out.shape[0] * out.shape[1];
        const int64_t hw = out.shape[2] * out.shape[3];
        for (int64_t p = 0; p < planes; ++p) {
            T* w = weights.ptr() + p * hw;
            for (int64_t i = 0; i < hw; ++i)
                if (mask->occluded[size_t(i)]) w[i] = region_weight;
        }
        sq = mul(tape, sq, tape.constant_value(std::move(weights)));
    }
    return mean_all(tape, sq);
}

// Discriminator objective: mean over the batch of
// -log D(real) - log(1 - D(fake)), logs floored at 1e-12.
template <typename T>
typename Tape<T>::Index adversarial_loss_d(Tape<T>& tape, typename Tape<T>::Index d_real,
                                           typename Tape<T>::Index d_fake) {
    const Tensor<T>& r = tape.value(d_real);
    const Tensor<T>& f = tape.value(d_fake);
    if (r.shape != f.shape)
        throw DimensionError("adversarial_loss_d: d_real " + shape_str(r.shape) + " vs d_fake " +
                             shape_str(f.shape));
    auto log_r = log_floored(tape, d_real);
    auto log_1mf = log_floored(tape, scalar_affine(tape, d_fake, T(-1), T(1)));
    auto s = add(tape, log_r, log_1mf);
    return scalar_affine(tape, mean_all(tape, s), T(-1), T(0));
}

// Non-saturating generator objective: mean of -log D(fake).
template <typename T>
typename Tape<T>::Index adversarial_loss_g(Tape<T>& tape, typename Tape<T>::Index d_fake) {
    return scalar_affine(tape, mean_all(tape, log_floored(tape, d_fake)), T(-1), T(0));
}

// l_rec + lambda_adv * l_adv_g; lambda defaults to the unweighted sum.
template <typename T>
typename Tape<T>::Index total_loss(Tape<T>& tape, typename Tape<T>::Index l_rec,
                                   typename Tape<T>::Index l_adv_g, T lambda_adv = T(1)) {
    return add_scaled(tape, l_rec, l_adv_g, lambda_adv);
}

// Split-level MSE: every pixel weighs the same no matter how the split was
// batched. Accumulated per image in double.
inline double epoch_mse(const std::vector<Tensor<float>>& outputs,
                        const std::vector<Tensor<float>>& targets) {
    if (outputs.empty() || outputs.size() != targets.size())
        throw ContractError("epoch_mse: empty or mismatched split (outputs " +
                            std::to_string(outputs.size()) + ", targets " +
                            std::to_string(targets.size()) + ")");
    double sse = 0.0;
    int64_t count = 0;
    for (size_t i = 0; i < outputs.size(); ++i) {
        if (outputs[i].shape != targets[i].shape)
            throw DimensionError("epoch_mse: image " + std::to_string(i) + " output " +
                                 shape_str(outputs[i].shape) + " vs target " +
                                 shape_str(targets[i].shape));
        double img = 0.0;
        for (size_t k = 0; k < outputs[i].data.size(); ++k) {
            const double d = double(outputs[i].data[k]) - double(targets[i].data[k]);
            img += d * d;
        }
        sse += img;
        count += outputs[i].numel();
    }
    return sse / double(count);
}

}  // namespace cegan
