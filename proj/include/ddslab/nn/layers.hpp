#pragma once

#include <cmath>
#include <vector>

#include "ddslab/core/tensor.hpp"
#include "ddslab/kernels/kernels.hpp"
#include "ddslab/nn/param.hpp"

namespace ddslab::nn {

struct Conv2d {
    int in_c = 0, out_c = 0, k = 3;
    Param W, B;

    // gain 0 requests zero initialization (used for the last conv of a block)
    void init(const std::string& name, int in_c_, int out_c_, int k_, Rng& rng, ParamSet& ps,
              float gain = 1.f) {
        in_c = in_c_;
        out_c = out_c_;
        k = k_;
        W.name = name + ".w";
        W.shape = {out_c, in_c, k, k};
        W.w.assign(std::size_t(out_c) * in_c * k * k, 0.f);
        B.name = name + ".b";
        B.shape = {out_c};
        B.w.assign(out_c, 0.f);
        if (gain != 0.f)
            fill_normal_scaled(W.w, rng, gain * std::sqrt(2.f / float(in_c * k * k)));
        ps.add(&W);
        ps.add(&B);
    }

    void fwd(const Tensor& x, Tensor& y) const {
        y.ensure(out_c, x.h, x.w);
        kern::conv2d(x.data(), in_c, x.h, x.w, W.w.data(), B.w.data(), out_c, k, y.data());
    }

    void bwd(const Tensor& x, const Tensor& dy, Tensor* dx, float* gbuf) const {
        if (gbuf)
            kern::conv2d_back_wb(dy.data(), out_c, x.h, x.w, x.data(), in_c, k,
                                 gbuf + W.offset, gbuf + B.offset);
        if (dx) {
            dx->ensure(in_c, x.h, x.w);
            kern::conv2d_back_input(dy.data(), out_c, x.h, x.w, W.w.data(), in_c, k,
                                    dx->data());
        }
    }
};

struct Linear {
    int in_n = 0, out_n = 0;
    Param W, B;

    void init(const std::string& name, int in_n_, int out_n_, Rng& rng, ParamSet& ps,
              float gain = 1.f) {
        in_n = in_n_;
        out_n = out_n_;
        W.name = name + ".w";
        W.shape = {out_n, in_n};
        W.w.assign(std::size_t(out_n) * in_n, 0.f);
        B.name = name + ".b";
        B.shape = {out_n};
        B.w.assign(out_n, 0.f);
        if (gain != 0.f) fill_normal_scaled(W.w, rng, gain / std::sqrt(float(in_n)));
        ps.add(&W);
        ps.add(&B);
    }

    void fwd(const std::vector<float>& x, std::vector<float>& y) const {
        y.resize(out_n);
        kern::linear(x.data(), in_n, W.w.data(), B.w.data(), out_n, y.data());
    }

    void bwd(const std::vector<float>& x, const std::vector<float>& dy, std::vector<float>* dx,
             float* gbuf) const {
        if (dx) dx->resize(in_n);
        kern::linear_back(x.data(), in_n, W.w.data(), dy.data(), out_n,
                          dx ? dx->data() : nullptr, gbuf ? gbuf + W.offset : nullptr,
                          gbuf ? gbuf + B.offset : nullptr);
    }
};

// Normalization statistics saved for backward.
struct GnStats {
    std::vector<float> mean, rstd;
    void ensure(int groups) {
        mean.resize(groups);
        rstd.resize(groups);
    }
};

struct GroupNorm {
    int groups = 8;
    float eps = 1e-5f;

    void fwd(const Tensor& x, Tensor& y, GnStats& st) const {
        y.ensure(x.c, x.h, x.w);
        st.ensure(groups);
        kern::groupnorm(x.data(), x.c, x.h, x.w, groups, eps, y.data(), st.mean.data(),
                        st.rstd.data());
    }

    void bwd(const Tensor& x, const GnStats& st, const Tensor& dy, Tensor& dx) const {
        dx.ensure(x.c, x.h, x.w);
        kern::groupnorm_back(x.data(), st.mean.data(), st.rstd.data(), dy.data(), x.c, x.h,
                             x.w, groups, dx.data());
    }
};

// Learned per-channel scale/shift (the affine half of a group norm).
struct ChannelAffine {
    int c = 0;
    Param scale, shift;

    void init(const std::string& name, int c_, ParamSet& ps) {
        c = c_;
        scale.name = name + ".scale";
        scale.shape = {c};
        scale.w.assign(c, 0.f);
        shift.name = name + ".shift";
        shift.shape = {c};
        shift.w.assign(c, 0.f);
        ps.add(&scale);
        ps.add(&shift);
    }

    void fwd(const Tensor& x, Tensor& y) const {
        y.ensure(x.c, x.h, x.w);
        kern::film(x.data(), x.c, x.h, x.w, scale.w.data(), shift.w.data(), y.data());
    }

    void bwd(const Tensor& x, const Tensor& dy, Tensor& dx, float* gbuf) const {
        dx.ensure(x.c, x.h, x.w);
        kern::film_back(x.data(), dy.data(), x.c, x.h, x.w, scale.w.data(), dx.data(),
                        gbuf + scale.offset, gbuf + shift.offset);
    }
};

inline void silu_vec(const std::vector<float>& x, std::vector<float>& y) {
    y.resize(x.size());
    kern::silu(x.data(), x.size(), y.data());
}

inline std::vector<float> sinusoidal_features(double t, int dim) {
    std::vector<float> f(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::pow(1000.0, double(i) / double(half - 1));
        f[2 * i] = float(std::sin(t * freq));
        f[2 * i + 1] = float(std::cos(t * freq));
    }
    return f;
}

}  // namespace ddslab::nn
