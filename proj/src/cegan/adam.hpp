#pragma once

#include <cmath>
#include <map>
#include <string>

#include "cegan/errors.hpp"
#include "cegan/kernels/kernels.hpp"
#include "cegan/params.hpp"

namespace cegan {

// Adam optimizer state: first/second moments per parameter plus the shared
// step counter. beta1/beta2/eps are the canonical constants.
template <typename T>
struct AdamState {
    std::map<std::string, Tensor<T>> m, v;
    int64_t t = 0;
    T lr = T(1e-4);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
};

template <typename T>
AdamState<T> make_adam(const ParamSet<T>& params, T lr) {
    AdamState<T> st;
    st.lr = lr;
    for (const auto& [name, p] : params) {
        st.m.emplace(name, Tensor<T>::zeros(p.shape));
        st.v.emplace(name, Tensor<T>::zeros(p.shape));
    }
    return st;
}

// One bias-corrected update over every parameter. Gradients are read, never
// modified; the caller zeroes them. A parameter without an allocated gradient
// is a contract violation.
template <typename T>
void adam_step(ParamSet<T>& params, AdamState<T>& st) {
    st.t += 1;
    const T inv_bc1 = T(1.0 / (1.0 - std::pow(double(st.beta1), double(st.t))));
    const T inv_bc2 = T(1.0 / (1.0 - std::pow(double(st.beta2), double(st.t))));
    for (auto& [name, p] : params) {
        if (!p.grad_present())
            throw ContractError("adam_step: missing gradient for parameter '" + name + "'");
        auto mi = st.m.find(name);
        auto vi = st.v.find(name);
        if (mi == st.m.end() || vi == st.v.end())
            throw ContractError("adam_step: no optimizer state for parameter '" + name + "'");
        kernels::adam_update(p.data.data(), mi->second.data.data(), vi->second.data.data(),
                             p.grad.data(), p.data.size(), st.lr, st.beta1, st.beta2, st.eps,
                             inv_bc1, inv_bc2);
    }
}

}  // namespace cegan
