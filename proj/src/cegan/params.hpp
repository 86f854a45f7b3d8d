#pragma once

#include <map>
#include <string>

#include "cegan/tensor.hpp"

namespace cegan {

// Named trainable tensors. std::map keeps iteration lexicographic, so every
// pass over a ParamSet is deterministic.
template <typename T>
using ParamSet = std::map<std::string, Tensor<T>>;

template <typename T>
inline void zero_grad(ParamSet<T>& params) {
    for (auto& [name, p] : params) p.zero_grad();
}

template <typename T>
inline int64_t total_elements(const ParamSet<T>& params) {
    int64_t n = 0;
    for (const auto& [name, p] : params) n += p.numel();
    return n;
}

}  // namespace cegan
