#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cegan/errors.hpp"

namespace cegan {

using Shape = std::vector<int64_t>;

inline int64_t numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << "]";
    return os.str();
}

// Dense row-major n-dimensional array. Images use (batch, channel, height,
// width). The gradient slot stays empty until something accumulates into it.
template <typename T>
struct Tensor {
    Shape shape;
    std::vector<T> data;
    bool requires_grad = false;
    std::vector<T> grad;

    Tensor() = default;
    Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
        if (cegan::numel(shape) != int64_t(data.size()))
            throw DimensionError("tensor data length " + std::to_string(data.size()) +
                                 " does not match shape " + shape_str(shape));
    }

    static Tensor zeros(Shape s) {
        Tensor t;
        t.data.assign(size_t(cegan::numel(s)), T(0));
        t.shape = std::move(s);
        return t;
    }

    static Tensor full(Shape s, T value) {
        Tensor t;
        t.data.assign(size_t(cegan::numel(s)), value);
        t.shape = std::move(s);
        return t;
    }

    int64_t numel() const { return int64_t(data.size()); }
    int64_t dim(size_t i) const { return shape[i]; }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    T& at4(int64_t n, int64_t c, int64_t h, int64_t w) {
        return data[size_t(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
    }
    const T& at4(int64_t n, int64_t c, int64_t h, int64_t w) const {
        return data[size_t(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
    }
    T& at2(int64_t r, int64_t c) { return data[size_t(r * shape[1] + c)]; }
    const T& at2(int64_t r, int64_t c) const { return data[size_t(r * shape[1] + c)]; }

    bool grad_present() const { return grad.size() == data.size(); }

    void ensure_grad() {
        if (!grad_present()) grad.assign(data.size(), T(0));
    }

    void zero_grad() { grad.assign(data.size(), T(0)); }
};

template <typename T>
inline bool all_finite(const Tensor<T>& t) {
    for (T v : t.data)
        if (!std::isfinite(double(v))) return false;
    return true;
}

template <typename T>
inline Tensor<T> tensor_like(const Tensor<T>& t, std::vector<T> d) {
    return Tensor<T>(t.shape, std::move(d));
}

}  // namespace cegan
