#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cegan/kernels/kernels.hpp"
#include "cegan/tape.hpp"
#include "cegan/tensor.hpp"

// Differentiable primitives. Forward results are recorded on a Tape; each op
// installs a closure that routes upstream gradient to the inputs that need
// it. Loop nesting (and therefore float summation order) is fixed, so runs
// are bit-reproducible.

namespace cegan {

struct Padding {
    int top = 0, left = 0, bottom = 0, right = 0;
    static Padding same(int p) { return {p, p, p, p}; }
};

namespace detail {

template <typename T>
inline void check_rank(const Tensor<T>& t, size_t rank, const char* op) {
    if (t.shape.size() != rank)
        throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                             " tensor, got shape " + shape_str(t.shape));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// conv2d: x[N,Cin,H,W] (*) w[Cout,Cin,kh,kw] + b[Cout], zero padding.
// Output H = floor((H + pad.top + pad.bottom - kh) / stride) + 1, same for W.
// Stride-1 rows go through the axpy/dot kernels; other strides use the plain
// loops below (identical on every backend).
// ---------------------------------------------------------------------------
template <typename T>
typename Tape<T>::Index conv2d(Tape<T>& tape, typename Tape<T>::Index xi,
                               typename Tape<T>::Index wi, typename Tape<T>::Index bi,
                               int stride, Padding pad) {
    const Tensor<T>& x = tape.value(xi);
    const Tensor<T>& w = tape.value(wi);
    const Tensor<T>& b = tape.value(bi);
    detail::check_rank(x, 4, "conv2d input");
    detail::check_rank(w, 4, "conv2d weight");
    detail::check_rank(b, 1, "conv2d bias");
    if (x.shape[1] != w.shape[1])
        throw DimensionError("conv2d: input channels disagree, input " + shape_str(x.shape) +
                             " vs weight " + shape_str(w.shape));
    if (b.shape[0] != w.shape[0])
        throw DimensionError("conv2d: bias " + shape_str(b.shape) + " vs weight " +
                             shape_str(w.shape));
    if (stride < 1) throw ContractError("conv2d: stride must be >= 1");

    const int64_t N = x.shape[0], Ci = x.shape[1], H = x.shape[2], W = x.shape[3];
    const int64_t Co = w.shape[0], kh = w.shape[2], kw = w.shape[3];
    const int64_t s = stride;
    if (kh > H + pad.top + pad.bottom || kw > W + pad.left + pad.right)
        throw DimensionError("conv2d: kernel " + shape_str(w.shape) +
                             " larger than padded input " + shape_str(x.shape));
    const int64_t Ho = (H + pad.top + pad.bottom - kh) / s + 1;
    const int64_t Wo = (W + pad.left + pad.right - kw) / s + 1;

    Tensor<T> out = Tensor<T>::zeros({N, Co, Ho, Wo});
    const T* xp = x.ptr();
    const T* wp = w.ptr();
    T* op = out.ptr();
    const int64_t xs_n = Ci * H * W, xs_c = H * W;
    const int64_t os_n = Co * Ho * Wo, os_c = Ho * Wo;

    for (int64_t n = 0; n < N; ++n) {
        for (int64_t co = 0; co < Co; ++co) {
            T* oplane = op + n * os_n + co * os_c;
            std::fill(oplane, oplane + os_c, b.data[size_t(co)]);
            for (int64_t ci = 0; ci < Ci; ++ci) {
                const T* xplane = xp + n * xs_n + ci * xs_c;
                const T* wbase = wp + (co * Ci + ci) * kh * kw;
                for (int64_t ky = 0; ky < kh; ++ky) {
                    for (int64_t kx = 0; kx < kw; ++kx) {
                        const T a = wbase[ky * kw + kx];
                        for (int64_t ho = 0; ho < Ho; ++ho) {
                            const int64_t hi = ho * s - pad.top + ky;
                            if (hi < 0 || hi >= H) continue;
                            T* orow = oplane + ho * Wo;
                            const T* xrow = xplane + hi * W;
                            if (s == 1) {
                                const int64_t wo0 = std::max<int64_t>(0, pad.left - kx);
                                const int64_t wo1 = std::min<int64_t>(Wo, W + pad.left - kx);
                                if (wo1 > wo0)
                                    kernels::axpy(orow + wo0, xrow + (wo0 - pad.left + kx), a,
                                                  size_t(wo1 - wo0));
                            } else {
                                for (int64_t wo = 0; wo < Wo; ++wo) {
                                    const int64_t wi2 = wo * s - pad.left + kx;
                                    if (wi2 < 0 || wi2 >= W) continue;
                                    orow[wo] += a * xrow[wi2];
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    bool needs = tape.needs_grad(xi) || tape.needs_grad(wi) || tape.needs_grad(bi);
    auto backward = [=](Tape<T>& t, typename Tape<T>::Index self) {
        const std::vector<T>& g = t.grad_buf(self);
        const Tensor<T>& xv = t.value(xi);
        const Tensor<T>& wv = t.value(wi);
        const T* gp = g.data();

        if (t.needs_grad(bi)) {
            std::vector<T>& gb = t.grad_buf(bi);
            for (int64_t co = 0; co < Co; ++co) {
                T acc = gb[size_t(co)];
                for (int64_t n = 0; n < N; ++n)
                    acc += kernels::sum(gp + n * os_n + co * os_c, size_t(os_c));
                gb[size_t(co)] = acc;
            }
        }
        if (t.needs_grad(wi)) {
            std::vector<T>& gw = t.grad_buf(wi);
            for (int64_t co = 0; co < Co; ++co) {
                for (int64_t ci = 0; ci < Ci; ++ci) {
                    const T* xplane0 = xv.ptr() + ci * xs_c;
                    T* gwbase = gw.data() + (co * Ci + ci) * kh * kw;
                    for (int64_t ky = 0; ky < kh; ++ky) {
                        for (int64_t kx = 0; kx < kw; ++kx) {
                            T acc = gwbase[ky * kw + kx];
                            for (int64_t n = 0; n < N; ++n) {
                                const T* gplane = gp + n * os_n + co * os_c;
                                const T* xplane = xplane0 + n * xs_n;
                                for (int64_t ho = 0; ho < Ho; ++ho) {
                                    const int64_t hi = ho * s - pad.top + ky;
                                    if (hi < 0 || hi >= H) continue;
                                    const T* grow = gplane + ho * Wo;
                                    const T* xrow = xplane + hi * W;
                                    if (s == 1) {
                                        const int64_t wo0 = std::max<int64_t>(0, pad.left - kx);
                                        const int64_t wo1 = std::min<int64_t>(Wo, W + pad.left - kx);
                                        if (wo1 > wo0)
                                            acc += kernels::dot(grow + wo0,
                                                                xrow + (wo0 - pad.left + kx),
                                                                size_t(wo1 - wo0));
                                    } else {
                                        for (int64_t wo = 0; wo < Wo; ++wo) {
                                            const int64_t wi2 = wo * s - pad.left + kx;
                                            if (wi2 < 0 || wi2 >= W) continue;
                                            acc += grow[wo] * xrow[wi2];
                                        }
                                    }
                                }
                            }
                            gwbase[ky * kw + kx] = acc;
                        }
                    }
                }
            }
        }
        if (t.needs_grad(xi)) {
            std::vector<T>& gx = t.grad_buf(xi);
            for (int64_t n = 0; n < N; ++n) {
                for (int64_t co = 0; co < Co; ++co) {
                    const T* gplane = gp + n * os_n + co * os_c;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        T* gxplane = gx.data() + n * xs_n + ci * xs_c;
                        const T* wbase = wv.ptr() + (co * Ci + ci) * kh * kw;
                        for (int64_t ky = 0; ky < kh; ++ky) {
                            for (int64_t kx = 0; kx < kw; ++kx) {
                                const T a = wbase[ky * kw + kx];
                                for (int64_t ho = 0; ho < Ho; ++ho) {
                                    const int64_t hi = ho * s - pad.top + ky;
                                    if (hi < 0 || hi >= H) continue;
                                    const T* grow = gplane + ho * Wo;
                                    T* gxrow = gxplane + hi * W;
                                    if (s == 1) {
                                        const int64_t wo0 = std::max<int64_t>(0, pad.left - kx);
                                        const int64_t wo1 = std::min<int64_t>(Wo, W + pad.left - kx);
                                        if (wo1 > wo0)
                                            kernels::axpy(gxrow + (wo0 - pad.left + kx), grow + wo0,
                                                          a, size_t(wo1 - wo0));
                                    } else {
                                        for (int64_t wo = 0; wo < Wo; ++wo) {
                                            const int64_t wi2 = wo * s - pad.left + kx;
                                            if (wi2 < 0 || wi2 >= W) continue;
                                            gxrow[wi2] += a * grow[wo];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    };
    return tape.apply("conv2d", std::move(out), needs, std::move(backward));
}

// 2x2 max pooling, stride 2. Gradient routes to the argmax position; ties
// pick the first element in row-major window order.
template <typename T>
typename Tape<T>::Index maxpool2d(Tape<T>& tape, typename Tape<T>::Index xi) {
    const Tensor<T>& x = tape.value(xi);
    detail::check_rank(x, 4, "maxpool2d");
    const int64_t N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    if (H % 2 != 0 || W % 2 != 0)
        throw DimensionError("maxpool2d: spatial dims must be even, got " + shape_str(x.shape));
    const int64_t Ho = H / 2, Wo = W / 2;

    Tensor<T> out = Tensor<T>::zeros({N, C, Ho, Wo});
    std::vector<int64_t> argmax(size_t(out.numel()));
    const T* xp = x.ptr();
    T* op = out.ptr();
    int64_t oi = 0;
    for (int64_t n = 0; n < N; ++n) {
        for (int64_t c = 0; c < C; ++c) {
            const T* plane = xp + (n * C + c) * H * W;
            const int64_t plane_off = (n * C + c) * H * W;
            for (int64_t ho = 0; ho < Ho; ++ho) {
                for (int64_t wo = 0; wo < Wo; ++wo, ++oi) {
                    const int64_t h0 = 2 * ho, w0 = 2 * wo;
                    int64_t best = h0 * W + w0;
                    T bv = plane[best];
                    const int64_t cand[3] = {h0 * W + w0 + 1, (h0 + 1) * W + w0,
                                             (h0 + 1) * W + w0 + 1};
                    for (int64_t idx : cand) {
                        if (plane[idx] > bv) {  // strict: first occurrence wins ties
                            bv = plane[idx];
                            best = idx;
                        }
                    }
                    op[oi] = bv;
                    argmax[size_t(oi)] = plane_off + best;
                }
            }
        }
    }

    bool needs = tape.needs_grad(xi);
    auto backward = [xi, arg = std::move(argmax)](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const std::vector<T>& g = t.grad_buf(self);
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t i = 0; i < g.size(); ++i) gx[size_t(arg[i])] += g[i];
    };
    return tape.apply("maxpool2d", std::move(out), needs, std::move(backward));
}

// Nearest-neighbour 2x upsampling; backward sums each 2x2 block.
template <typename T>
typename Tape<T>::Index upsample2x(Tape<T>& tape, typename Tape<T>::Index xi) {
    const Tensor<T>& x = tape.value(xi);
    detail::check_rank(x, 4, "upsample2x");
    const int64_t N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    Tensor<T> out = Tensor<T>::zeros({N, C, 2 * H, 2 * W});
    const T* xp = x.ptr();
    T* op = out.ptr();
    for (int64_t p = 0; p < N * C; ++p) {
        const T* iplane = xp + p * H * W;
        T* oplane = op + p * 4 * H * W;
        for (int64_t h = 0; h < H; ++h) {
            for (int64_t w = 0; w < W; ++w) {
                const T v = iplane[h * W + w];
                T* o = oplane + (2 * h) * (2 * W) + 2 * w;
                o[0] = v;
                o[1] = v;
                o[2 * W] = v;
                o[2 * W + 1] = v;
            }
        }
    }
    bool needs = tape.needs_grad(xi);
    auto backward = [xi, N, C, H, W](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const std::vector<T>& g = t.grad_buf(self);
        std::vector<T>& gx = t.grad_buf(xi);
        for (int64_t p = 0; p < N * C; ++p) {
            const T* gplane = g.data() + p * 4 * H * W;
            T* gxplane = gx.data() + p * H * W;
            for (int64_t h = 0; h < H; ++h) {
                for (int64_t w = 0; w < W; ++w) {
                    const T* gsrc = gplane + (2 * h) * (2 * W) + 2 * w;
                    gxplane[h * W + w] += gsrc[0] + gsrc[1] + gsrc[2 * W] + gsrc[2 * W + 1];
                }
            }
        }
    };
    return tape.apply("upsample2x", std::move(out), needs, std::move(backward));
}

// Exponential linear unit: x for x > 0, alpha*(e^x - 1) otherwise.
template <typename T>
typename Tape<T>::Index elu(Tape<T>& tape, typename Tape<T>::Index xi, T alpha = T(1)) {
    const Tensor<T>& x = tape.value(xi);
    Tensor<T> out = Tensor<T>::zeros(x.shape);
    for (size_t i = 0; i < x.data.size(); ++i) {
        const T v = x.data[i];
        out.data[i] = v > T(0) ? v : alpha * T(std::expm1(double(v)));
    }
    bool needs = tape.needs_grad(xi);
    auto backward = [xi, alpha](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const std::vector<T>& g = t.grad_buf(self);
        const Tensor<T>& y = t.value(self);
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t i = 0; i < g.size(); ++i)
            gx[i] += y.data[i] > T(0) ? g[i] : g[i] * (y.data[i] + alpha);
    };
    return tape.apply("elu", std::move(out), needs, std::move(backward));
}

// Logistic sigmoid, numerically stable in both tails. Outputs are clamped
// into the open interval (0,1): at |x| beyond ~90 the rounded value would
// reach exactly 0 or 1 otherwise.
template <typename T>
typename Tape<T>::Index sigmoid(Tape<T>& tape, typename Tape<T>::Index xi) {
    const Tensor<T>& x = tape.value(xi);
    const T lo = std::numeric_limits<T>::min();
    const T hi = T(1) - std::numeric_limits<T>::epsilon() / T(2);
    Tensor<T> out = Tensor<T>::zeros(x.shape);
    for (size_t i = 0; i < x.data.size(); ++i) {
        const T v = x.data[i];
        T y;
        if (v >= T(0)) {
            y = T(1) / (T(1) + T(std::exp(double(-v))));
        } else {
            const T e = T(std::exp(double(v)));
            y = e / (T(1) + e);
        }
        out.data[i] = std::min(hi, std::max(lo, y));
    }
    bool needs = tape.needs_grad(xi);
    auto backward = [xi](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const std::vector<T>& g = t.grad_buf(self);
        const Tensor<T>& y = t.value(self);
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y.data[i] * (T(1) - y.data[i]);
    };
    return tape.apply("sigmoid", std::move(out), needs, std::move(backward));
}

// out[N,K] = x[N,D] * w[D,K] + b[K]
template <typename T>
typename Tape<T>::Index affine(Tape<T>& tape, typename Tape<T>::Index xi,
                               typename Tape<T>::Index wi, typename Tape<T>::Index bi) {
    const Tensor<T>& x = tape.value(xi);
    const Tensor<T>& w = tape.value(wi);
    const Tensor<T>& b = tape.value(bi);
    detail::check_rank(x, 2, "affine input");
    detail::check_rank(w, 2, "affine weight");
    detail::check_rank(b, 1, "affine bias");
    if (x.shape[1] != w.shape[0] || b.shape[0] != w.shape[1])
        throw DimensionError("affine: inner dims disagree, input " + shape_str(x.shape) +
                             " weight " + shape_str(w.shape) + " bias " + shape_str(b.shape));
    const int64_t N = x.shape[0], D = x.shape[1], K = w.shape[1];

    Tensor<T> out = Tensor<T>::zeros({N, K});
    for (int64_t n = 0; n < N; ++n) {
        T* orow = out.ptr() + n * K;
        std::copy(b.ptr(), b.ptr() + K, orow);
        for (int64_t d = 0; d < D; ++d)
            kernels::axpy(orow, w.ptr() + d * K, x.data[size_t(n * D + d)], size_t(K));
    }
    bool needs = tape.needs_grad(xi) || tape.needs_grad(wi) || tape.needs_grad(bi);
    auto backward = [=](Tape<T>& t, typename Tape<T>::Index self) {
        const std::vector<T>& g = t.grad_buf(self);
        const Tensor<T>& xv = t.value(xi);
        const Tensor<T>& wv = t.value(wi);
        if (t.needs_grad(xi)) {
            std::vector<T>& gx = t.grad_buf(xi);
            for (int64_t n = 0; n < N; ++n)
                for (int64_t d = 0; d < D; ++d)
                    gx[size_t(n * D + d)] +=
                        kernels::dot(g.data() + n * K, wv.ptr() + d * K, size_t(K));
        }
        if (t.needs_grad(wi)) {
            std::vector<T>& gw = t.grad_buf(wi);
            for (int64_t n = 0; n < N; ++n)
                for (int64_t d = 0; d < D; ++d)
                    kernels::axpy(gw.data() + d * K, g.data() + n * K, xv.data[size_t(n * D + d)],
                                  size_t(K));
        }
        if (t.needs_grad(bi)) {
            std::vector<T>& gb = t.grad_buf(bi);
            for (int64_t n = 0; n < N; ++n)
                for (int64_t k = 0; k < K; ++k) gb[size_t(k)] += g[size_t(n * K + k)];
        }
    };
    return tape.apply("affine", std::move(out), needs, std::move(backward));
}

// Element-preserving reshape; round-trips bit-identically.
template <typename T>
typename Tape<T>::Index reshape(Tape<T>& tape, typename Tape<T>::Index xi, Shape new_shape) {
    const Tensor<T>& x = tape.value(xi);
    if (numel(new_shape) != x.numel())
        throw DimensionError("reshape: element count mismatch, " + shape_str(x.shape) + " -> " +
                             shape_str(new_shape));
    Tensor<T> out(std::move(new_shape), x.data);
    bool needs = tape.needs_grad(xi);
    auto backward = [xi](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const std::vector<T>& g = t.grad_buf(self);
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    };
    return tape.apply("reshape", std::move(out), needs, std::move(backward));
}

// out[N,C] = mean over H,W of x[N,C,H,W]
template <typename T>
typename Tape<T>::Index global_avg_pool(Tape<T>& tape, typename Tape<T>::Index xi) {
    const Tensor<T>& x = tape.value(xi);
    detail::check_rank(x, 4, "global_avg_pool");
    const int64_t N = x.shape[0], C = x.shape[1], HW = x.shape[2] * x.shape[3];
    Tensor<T> out = Tensor<T>::zeros({N, C});
    for (int64_t p = 0; p < N * C; ++p)
        out.data[size_t(p)] = kernels::sum(x.ptr() + p * HW, size_t(HW)) / T(HW);
    bool needs = tape.needs_grad(xi);
    auto backward = [xi, HW](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const std::vector<T>& g = t.grad_buf(self);
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t p = 0; p < g.size(); ++p) {
            const T q = g[p] / T(HW);
            T* dst = gx.data() + int64_t(p) * HW;
            for (int64_t i = 0; i < HW; ++i) dst[i] += q;
        }
    };
    return tape.apply("global_avg_pool", std::move(out), needs, std::move(backward));
}

namespace detail {

template <typename T>
inline void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
    if (a.shape != b.shape)
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
}

}  // namespace detail

template <typename T>
typename Tape<T>::Index add(Tape<T>& tape, typename Tape<T>::Index ai,
                            typename Tape<T>::Index bi) {
    const Tensor<T>& a = tape.value(ai);
    const Tensor<T>& b = tape.value(bi);
    detail::check_same_shape(a, b, "add");
    Tensor<T> out = Tensor<T>::zeros(a.shape);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] + b.data[i];
    bool needs = tape.needs_grad(ai) || tape.needs_grad(bi);
    auto backward = [ai, bi](Tape<T>& t, typename Tape<T>::Index self) {
        const std::vector<T>& g = t.grad_buf(self);
        if (t.needs_grad(ai)) {
            std::vector<T>& ga = t.grad_buf(ai);
            for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.needs_grad(bi)) {
            std::vector<T>& gb = t.grad_buf(bi);
            for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
        }
    };
    return tape.apply("add", std::move(out), needs, std::move(backward));
}

template <typename T>
typename Tape<T>::Index sub(Tape<T>& tape, typename Tape<T>::Index ai,
                            typename Tape<T>::Index bi) {
    const Tensor<T>& a = tape.value(ai);
    const Tensor<T>& b = tape.value(bi);
    detail::check_same_shape(a, b, "sub");
    Tensor<T> out = Tensor<T>::zeros(a.shape);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] - b.data[i];
    bool needs = tape.needs_grad(ai) || tape.needs_grad(bi);
    auto backward = [ai, bi](Tape<T>& t, typename Tape<T>::Index self) {
        const std::vector<T>& g = t.grad_buf(self);
        if (t.needs_grad(ai)) {
            std::vector<T>& ga = t.grad_buf(ai);
            for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.needs_grad(bi)) {
            std::vector<T>& gb = t.grad_buf(bi);
            for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    };
    return tape.apply("sub", std::move(out), needs, std::move(backward));
}

template <typename T>
typename Tape<T>::Index mul(Tape<T>& tape, typename Tape<T>::Index ai,
                            typename Tape<T>::Index bi) {
    const Tensor<T>& a = tape.value(ai);
    const Tensor<T>& b = tape.value(bi);
    detail::check_same_shape(a, b, "mul");
    Tensor<T> out = Tensor<T>::zeros(a.shape);
    for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
    bool needs = tape.needs_grad(ai) || tape.needs_grad(bi);
    auto backward = [ai, bi](Tape<T>& t, typename Tape<T>::Index self) {
        const std::vector<T>& g = t.grad_buf(self);
        const Tensor<T>& av = t.value(ai);
        const Tensor<T>& bv = t.value(bi);
        if (t.needs_grad(ai)) {
            std::vector<T>& ga = t.grad_buf(ai);
            for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv.data[i];
        }
        if (t.needs_grad(bi)) {
            std::vector<T>& gb = t.grad_buf(bi);
            for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av.data[i];
        }
    };
    return tape.apply("mul", std::move(out), needs, std::move(backward));
}

// y = a*x + b elementwise.
template <typename T>
typename Tape<T>::Index scalar_affine(Tape<T>& tape, typename Tape<T>::Index xi, T a, T b) {
    const Tensor<T>& x = tape.value(xi);
    Tensor<T> out = Tensor<T>::zeros(x.shape);
    for (size_t i = 0; i < x.data.size(); ++i) out.data[i] = a * x.data[i] + b;
    bool needs = tape.needs_grad(xi);
    auto backward = [xi, a](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const std::vector<T>& g = t.grad_buf(self);
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t i = 0; i < g.size(); ++i) gx[i] += a * g[i];
    };
    return tape.apply("scalar_affine", std::move(out), needs, std::move(backward));
}

// y = log(max(x, floor)); the floor keeps losses finite as probabilities
// approach 0 or 1.
template <typename T>
typename Tape<T>::Index log_floored(Tape<T>& tape, typename Tape<T>::Index xi,
                                    T floor = T(1e-12)) {
    const Tensor<T>& x = tape.value(xi);
    Tensor<T> out = Tensor<T>::zeros(x.shape);
    for (size_t i = 0; i < x.data.size(); ++i)
        out.data[i] = T(std::log(double(std::max(x.data[i], floor))));
    bool needs = tape.needs_grad(xi);
    auto backward = [xi, floor](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const std::vector<T>& g = t.grad_buf(self);
        const Tensor<T>& xv = t.value(xi);
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t i = 0; i < g.size(); ++i)
            if (xv.data[i] > floor) gx[i] += g[i] / xv.data[i];
    };
    return tape.apply("log_floored", std::move(out), needs, std::move(backward));
}

template <typename T>
typename Tape<T>::Index sum_all(Tape<T>& tape, typename Tape<T>::Index xi) {
    const Tensor<T>& x = tape.value(xi);
    Tensor<T> out({1}, {kernels::sum(x.ptr(), x.data.size())});
    bool needs = tape.needs_grad(xi);
    auto backward = [xi](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const T gv = t.grad_buf(self)[0];
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t i = 0; i < gx.size(); ++i) gx[i] += gv;
    };
    return tape.apply("sum_all", std::move(out), needs, std::move(backward));
}

template <typename T>
typename Tape<T>::Index mean_all(Tape<T>& tape, typename Tape<T>::Index xi) {
    const Tensor<T>& x = tape.value(xi);
    const T n = T(x.numel());
    Tensor<T> out({1}, {kernels::sum(x.ptr(), x.data.size()) / n});
    bool needs = tape.needs_grad(xi);
    auto backward = [xi, n](Tape<T>& t, typename Tape<T>::Index self) {
        if (!t.needs_grad(xi)) return;
        const T q = t.grad_buf(self)[0] / n;
        std::vector<T>& gx = t.grad_buf(xi);
        for (size_t i = 0; i < gx.size(); ++i) gx[i] += q;
    };
    return tape.apply("mean_all", std::move(out), needs, std::move(backward));
}

// Scalar combine: a + lam*b, evaluated as one expression.
template <typename T>
typename Tape<T>::Index add_scaled(Tape<T>& tape, typename Tape<T>::Index ai,
                                   typename Tape<T>::Index bi, T lam) {
    const Tensor<T>& a = tape.value(ai);
    const Tensor<T>& b = tape.value(bi);
    if (a.numel() != 1 || b.numel() != 1)
        throw ContractError("add_scaled expects scalar inputs, got " + shape_str(a.shape) +
                            " and " + shape_str(b.shape));
    Tensor<T> out({1}, {T(a.data[0] + lam * b.data[0])});
    bool needs = tape.needs_grad(ai) || tape.needs_grad(bi);
    auto backward = [ai, bi, lam](Tape<T>& t, typename Tape<T>::Index self) {
        const T gv = t.grad_buf(self)[0];
        if (t.needs_grad(ai)) t.grad_buf(ai)[0] += gv;
        if (t.needs_grad(bi)) t.grad_buf(bi)[0] += lam * gv;
    };
    return tape.apply("add_scaled", std::move(out), needs, std::move(backward));
}

// Per-channel batch normalization over (N,H,W). Train mode normalizes by
// batch statistics (biased variance) and updates the running buffers in
// place; eval mode normalizes by the running buffers.
template <typename T>
typename Tape<T>::Index batch_norm(Tape<T>& tape, typename Tape<T>::Index xi,
                                   typename Tape<T>::Index gi, typename Tape<T>::Index bi,
                                   Tensor<T>& running_mean, Tensor<T>& running_var, bool train,
                                   T momentum = T(0.1), T eps = T(1e-5)) {
    const Tensor<T>& x = tape.value(xi);
    const Tensor<T>& gamma = tape.value(gi);
    const Tensor<T>& beta = tape.value(bi);
    detail::check_rank(x, 4, "batch_norm");
    const int64_t N = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
    if (gamma.shape != Shape{C} || beta.shape != Shape{C} || running_mean.shape != Shape{C} ||
        running_var.shape != Shape{C})
        throw DimensionError("batch_norm: per-channel params must have shape [" +
                             std::to_string(C) + "]");
    const int64_t M = N * H * W;
    if (train && M < 2)
        throw ContractError("batch_norm: train mode needs N*H*W >= 2 (zero variance), got " +
                            shape_str(x.shape));

    const int64_t HW = H * W;
    std::vector<T> xhat(size_t(x.numel()));
    std::vector<T> invstd(size_t(C));
    Tensor<T> out = Tensor<T>::zeros(x.shape);

    for (int64_t c = 0; c < C; ++c) {
        T mean, var;
        if (train) {
            T s = T(0);
            for (int64_t n = 0; n < N; ++n)
                s += kernels::sum(x.ptr() + (n * C + c) * HW, size_t(HW));
            mean = s / T(M);
            T sq = T(0);
            for (int64_t n = 0; n < N; ++n) {
                const T* p = x.ptr() + (n * C + c) * HW;
                T acc = T(0);
                for (int64_t i = 0; i < HW; ++i) {
                    const T d = p[i] - mean;
                    acc += d * d;
                }
                sq += acc;
            }
            var = sq / T(M);
            running_mean.data[size_t(c)] =
                (T(1) - momentum) * running_mean.data[size_t(c)] + momentum * mean;
            running_var.data[size_t(c)] =
                (T(1) - momentum) * running_var.data[size_t(c)] + momentum * var;
        } else {
            mean = running_mean.data[size_t(c)];
            var = running_var.data[size_t(c)];
        }
        const T inv = T(1) / T(std::sqrt(double(var + eps)));
        invstd[size_t(c)] = inv;
        const T gc = gamma.data[size_t(c)], bc = beta.data[size_t(c)];
        for (int64_t n = 0; n < N; ++n) {
            const T* p = x.ptr() + (n * C + c) * HW;
            T* xh = xhat.data() + (n * C + c) * HW;
            T* o = out.ptr() + (n * C + c) * HW;
            for (int64_t i = 0; i < HW; ++i) {
                xh[i] = (p[i] - mean) * inv;
                o[i] = gc * xh[i] + bc;
            }
        }
    }

    bool needs = tape.needs_grad(xi) || tape.needs_grad(gi) || tape.needs_grad(bi);
    auto backward = [xi, gi, bi, N, C, HW, M, train, xh = std::move(xhat),
                     inv = std::move(invstd)](Tape<T>& t, typename Tape<T>::Index self) {
        const std::vector<T>& g = t.grad_buf(self);
        const Tensor<T>& gamma = t.value(gi);
        for (int64_t c = 0; c < C; ++c) {
            T s1 = T(0), s2 = T(0);
            for (int64_t n = 0; n < N; ++n) {
                const T* gp = g.data() + (n * C + c) * HW;
                const T* xp = xh.data() + (n * C + c) * HW;
                for (int64_t i = 0; i < HW; ++i) {
                    s1 += gp[i];
                    s2 += gp[i] * xp[i];
                }
            }
            if (t.needs_grad(bi)) t.grad_buf(bi)[size_t(c)] += s1;
            if (t.needs_grad(gi)) t.grad_buf(gi)[size_t(c)] += s2;
            if (t.needs_grad(xi)) {
                std::vector<T>& gx = t.grad_buf(xi);
                const T k = gamma.data[size_t(c)] * inv[size_t(c)];
                const T m1 = s1 / T(M), m2 = s2 / T(M);
                for (int64_t n = 0; n < N; ++n) {
                    const T* gp = g.data() + (n * C + c) * HW;
                    const T* xp = xh.data() + (n * C + c) * HW;
                    T* gxp = gx.data() + (n * C + c) * HW;
                    if (train) {
                        for (int64_t i = 0; i < HW; ++i)
                            gxp[i] += k * (gp[i] - m1 - xp[i] * m2);
                    } else {
                        for (int64_t i = 0; i < HW; ++i) gxp[i] += k * gp[i];
                    }
                }
            }
        }
    };
    return tape.apply("batch_norm", std::move(out), needs, std::move(backward));
}

}  // namespace cegan
