#pragma once

#include <cstddef>

// Data-parallel compute kernels. Every kernel comes in a serial reference
// variant and an OpenMP variant. Parallelism is always over independent
// output slices, with each output element accumulated in a fixed order, so
// the two variants produce bitwise-identical results; tests assert this and
// tools/bench_kernels compares their throughput.
//
// The dispatching entry points pick the OpenMP variant unless threading is
// disabled or the caller is already inside a parallel region (batch- and
// experiment-level loops parallelize at the outer level).

namespace ddslab::kern {

void set_threads(bool on);
bool threads_on();
// True when the next dispatched kernel would run its parallel variant.
bool parallel_active();

// --- convolution, stride 1, square kernel k in {1, 3}, zero padding (k-1)/2
void conv2d(const float* in, int ic, int h, int w, const float* wts, const float* bias,
            int oc, int k, float* out);
void conv2d_back_input(const float* dout, int oc, int h, int w, const float* wts, int ic,
                       int k, float* din);
// accumulates into dw[oc*ic*k*k] and db[oc]
void conv2d_back_wb(const float* dout, int oc, int h, int w, const float* in, int ic, int k,
                    float* dw, float* db);

namespace serial {
void conv2d(const float* in, int ic, int h, int w, const float* wts, const float* bias,
            int oc, int k, float* out);
void conv2d_back_input(const float* dout, int oc, int h, int w, const float* wts, int ic,
                       int k, float* din);
void conv2d_back_wb(const float* dout, int oc, int h, int w, const float* in, int ic, int k,
                    float* dw, float* db);
}  // namespace serial

// --- 2x2 average pool (h, w even)
void avgpool2(const float* in, int c, int h, int w, float* out);
void avgpool2_back(const float* dout, int c, int h, int w, float* din);

// --- 2x nearest-neighbour upsample
void upsample2(const float* in, int c, int h, int w, float* out);
void upsample2_back(const float* dout, int c, int h, int w, float* din);

// --- group normalization without affine terms; saves per-group mean and
//     reciprocal stddev for the backward pass
void groupnorm(const float* x, int c, int h, int w, int groups, float eps, float* y,
               float* mean, float* rstd);
void groupnorm_back(const float* x, const float* mean, const float* rstd, const float* dy,
                    int c, int h, int w, int groups, float* dx);

// --- per-channel modulation y = x * (1 + scale_c) + shift_c
void film(const float* x, int c, int h, int w, const float* scale, const float* shift,
          float* y);
// dscale/dshift are accumulated (+=)
void film_back(const float* x, const float* dy, int c, int h, int w, const float* scale,
               float* dx, float* dscale, float* dshift);

// --- SiLU
void silu(const float* x, std::size_t n, float* y);
void silu_back(const float* x, const float* dy, std::size_t n, float* dx);

// --- dense layer y = W x + b, W row-major [out][in]; dW/db accumulated
void linear(const float* x, int in_n, const float* w, const float* b, int out_n, float* y);
void linear_back(const float* x, int in_n, const float* w, const float* dy, int out_n,
                 float* dx, float* dw, float* db);

}  // namespace ddslab::kern
