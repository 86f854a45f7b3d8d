#pragma once

#include <cmath>

#include "cegan/rng.hpp"
#include "cegan/tensor.hpp"

namespace cegan {

// He-normal: zero-mean normal with std sqrt(2/fan_in). Keeps activation
// variance roughly constant through deep ELU stacks. Fill order is row-major,
// so the result is a pure function of (shape, fan_in, rng state).
template <typename T>
Tensor<T> he_normal(Shape shape, int64_t fan_in, Rng& rng) {
    Tensor<T> t = Tensor<T>::zeros(std::move(shape));
    const double std_dev = std::sqrt(2.0 / double(fan_in));
    for (auto& v : t.data) v = T(rng.normal() * std_dev);
    return t;
}

}  // namespace cegan
