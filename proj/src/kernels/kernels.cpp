#include "ddslab/kernels/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace ddslab::kern {

namespace {

bool g_threads = true;

// Zero-padded copy of one channel plane into scratch (stride w+2p).
void pad_plane(const float* src, int h, int w, int p, float* dst) {
    const int pw = w + 2 * p;
    std::memset(dst, 0, sizeof(float) * std::size_t(h + 2 * p) * pw);
    for (int y = 0; y < h; ++y)
        std::memcpy(dst + std::size_t(y + p) * pw + p, src + std::size_t(y) * w,
                    sizeof(float) * w);
}

std::vector<float>& scratch() {
    static thread_local std::vector<float> buf;
    return buf;
}

template <class F>
void par_for(int n, bool parallel, F&& f) {
    if (parallel && n > 1) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) f(i);
    } else {
        for (int i = 0; i < n; ++i) f(i);
    }
}

bool want_parallel() { return g_threads && !omp_in_parallel(); }

// out[oc] = bias[oc] + sum_{ic,ky,kx} w * shifted(in_pad[ic]); the inner loop
// is a contiguous axpy over x, so each output element accumulates in a fixed
// (ic,ky,kx) order regardless of threading.
void conv2d_impl(const float* in, int ic, int h, int w, const float* wts, const float* bias,
                 int oc, int k, float* out, bool parallel) {
    const int p = (k - 1) / 2;
    const int pw = w + 2 * p, ph = h + 2 * p;
    std::vector<float>& pad = scratch();
    const float* src = in;
    if (p > 0) {
        pad.resize(std::size_t(ic) * ph * pw);
        for (int c0 = 0; c0 < ic; ++c0)
            pad_plane(in + std::size_t(c0) * h * w, h, w, p, pad.data() + std::size_t(c0) * ph * pw);
        src = pad.data();
    }
    par_for(oc, parallel, [&](int o) {
        float* op = out + std::size_t(o) * h * w;
        const float bv = bias ? bias[o] : 0.f;
        for (std::size_t i = 0, n = std::size_t(h) * w; i < n; ++i) op[i] = bv;
        for (int c0 = 0; c0 < ic; ++c0) {
            const float* sp = src + std::size_t(c0) * ph * pw;
            const float* wp = wts + ((std::size_t(o) * ic + c0) * k) * k;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const float cf = wp[ky * k + kx];
                    if (cf == 0.f) continue;
                    for (int y = 0; y < h; ++y) {
                        const float* row = sp + std::size_t(y + ky) * pw + kx;
                        float* orow = op + std::size_t(y) * w;
                        for (int x = 0; x < w; ++x) orow[x] += cf * row[x];
                    }
                }
        }
    });
}

void conv2d_back_input_impl(const float* dout, int oc, int h, int w, const float* wts,
                            int ic, int k, float* din, bool parallel) {
    const int p = (k - 1) / 2;
    const int pw = w + 2 * p, ph = h + 2 * p;
    std::vector<float>& pad = scratch();
    const float* src = dout;
    if (p > 0) {
        pad.resize(std::size_t(oc) * ph * pw);
        for (int o = 0; o < oc; ++o)
            pad_plane(dout + std::size_t(o) * h * w, h, w, p, pad.data() + std::size_t(o) * ph * pw);
        src = pad.data();
    }
    // din[ic] = sum_oc dout_pad[oc] conv flip(w[oc][ic])
    par_for(ic, parallel, [&](int c0) {
        float* dp = din + std::size_t(c0) * h * w;
        std::memset(dp, 0, sizeof(float) * std::size_t(h) * w);
        for (int o = 0; o < oc; ++o) {
            const float* sp = src + std::size_t(o) * ph * pw;
            const float* wp = wts + ((std::size_t(o) * ic + c0) * k) * k;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    const float cf = wp[ky * k + kx];
                    if (cf == 0.f) continue;
                    const int sy = k - 1 - ky, sx = k - 1 - kx;
                    for (int y = 0; y < h; ++y) {
                        const float* row = sp + std::size_t(y + sy) * pw + sx;
                        float* drow = dp + std::size_t(y) * w;
                        for (int x = 0; x < w; ++x) drow[x] += cf * row[x];
                    }
                }
        }
    });
}

void conv2d_back_wb_impl(const float* dout, int oc, int h, int w, const float* in, int ic,
                         int k, float* dw, float* db, bool parallel) {
    const int p = (k - 1) / 2;
    const int pw = w + 2 * p, ph = h + 2 * p;
    std::vector<float>& pad = scratch();
    const float* src = in;
    if (p > 0) {
        pad.resize(std::size_t(ic) * ph * pw);
        for (int c0 = 0; c0 < ic; ++c0)
            pad_plane(in + std::size_t(c0) * h * w, h, w, p, pad.data() + std::size_t(c0) * ph * pw);
        src = pad.data();
    }
    par_for(oc, parallel, [&](int o) {
        const float* gp = dout + std::size_t(o) * h * w;
        float acc = 0.f;
        for (std::size_t i = 0, n = std::size_t(h) * w; i < n; ++i) acc += gp[i];
        db[o] += acc;
        for (int c0 = 0; c0 < ic; ++c0) {
            const float* sp = src + std::size_t(c0) * ph * pw;
            float* wp = dw + ((std::size_t(o) * ic + c0) * k) * k;
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    float s = 0.f;
                    for (int y = 0; y < h; ++y) {
                        const float* row = sp + std::size_t(y + ky) * pw + kx;
                        const float* grow = gp + std::size_t(y) * w;
                        for (int x = 0; x < w; ++x) s += grow[x] * row[x];
                    }
                    wp[ky * k + kx] += s;
                }
        }
    });
}

}  // namespace

void set_threads(bool on) { g_threads = on; }
bool threads_on() { return g_threads; }
bool parallel_active() { return want_parallel(); }

void conv2d(const float* in, int ic, int h, int w, const float* wts, const float* bias,
            int oc, int k, float* out) {
    conv2d_impl(in, ic, h, w, wts, bias, oc, k, out, want_parallel());
}
void conv2d_back_input(const float* dout, int oc, int h, int w, const float* wts, int ic,
                       int k, float* din) {
    conv2d_back_input_impl(dout, oc, h, w, wts, ic, k, din, want_parallel());
}
void conv2d_back_wb(const float* dout, int oc, int h, int w, const float* in, int ic, int k,
                    float* dw, float* db) {
    conv2d_back_wb_impl(dout, oc, h, w, in, ic, k, dw, db, want_parallel());
}

namespace serial {
void conv2d(const float* in, int ic, int h, int w, const float* wts, const float* bias,
            int oc, int k, float* out) {
    conv2d_impl(in, ic, h, w, wts, bias, oc, k, out, false);
}
void conv2d_back_input(const float* dout, int oc, int h, int w, const float* wts, int ic,
                       int k, float* din) {
    conv2d_back_input_impl(dout, oc, h, w, wts, ic, k, din, false);
}
void conv2d_back_wb(const float* dout, int oc, int h, int w, const float* in, int ic, int k,
                    float* dw, float* db) {
    conv2d_back_wb_impl(dout, oc, h, w, in, ic, k, dw, db, false);
}
}  // namespace serial

void avgpool2(const float* in, int c, int h, int w, float* out) {
    const int oh = h / 2, ow = w / 2;
    par_for(c, want_parallel(), [&](int ci) {
        const float* ip = in + std::size_t(ci) * h * w;
        float* op = out + std::size_t(ci) * oh * ow;
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                const float* r0 = ip + std::size_t(2 * y) * w + 2 * x;
                const float* r1 = r0 + w;
                op[std::size_t(y) * ow + x] = 0.25f * (r0[0] + r0[1] + r1[0] + r1[1]);
            }
    });
}

void avgpool2_back(const float* dout, int c, int h, int w, float* din) {
    const int oh = h / 2, ow = w / 2;
    par_for(c, want_parallel(), [&](int ci) {
        const float* gp = dout + std::size_t(ci) * oh * ow;
        float* dp = din + std::size_t(ci) * h * w;
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                const float g = 0.25f * gp[std::size_t(y) * ow + x];
                float* r0 = dp + std::size_t(2 * y) * w + 2 * x;
                float* r1 = r0 + w;
                r0[0] = g;
                r0[1] = g;
                r1[0] = g;
                r1[1] = g;
            }
    });
}

void upsample2(const float* in, int c, int h, int w, float* out) {
    const int oh = 2 * h, ow = 2 * w;
    par_for(c, want_parallel(), [&](int ci) {
        const float* ip = in + std::size_t(ci) * h * w;
        float* op = out + std::size_t(ci) * oh * ow;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const float v = ip[std::size_t(y) * w + x];
                float* r0 = op + std::size_t(2 * y) * ow + 2 * x;
                float* r1 = r0 + ow;
                r0[0] = v;
                r0[1] = v;
                r1[0] = v;
                r1[1] = v;
            }
    });
}

void upsample2_back(const float* dout, int c, int h, int w, float* din) {
    const int oh = 2 * h, ow = 2 * w;
    par_for(c, want_parallel(), [&](int ci) {
        const float* gp = dout + std::size_t(ci) * oh * ow;
        float* dp = din + std::size_t(ci) * h * w;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const float* r0 = gp + std::size_t(2 * y) * ow + 2 * x;
                const float* r1 = r0 + ow;
                dp[std::size_t(y) * w + x] = r0[0] + r0[1] + r1[0] + r1[1];
            }
    });
}

void groupnorm(const float* x, int c, int h, int w, int groups, float eps, float* y,
               float* mean, float* rstd) {
    const int cg = c / groups;
    const std::size_t plane = std::size_t(h) * w;
    const std::size_t gsize = cg * plane;
    par_for(groups, want_parallel(), [&](int g) {
        const float* xp = x + std::size_t(g) * gsize;
        float* yp = y + std::size_t(g) * gsize;
        double s = 0;
        for (std::size_t i = 0; i < gsize; ++i) s += xp[i];
        const float mu = float(s / double(gsize));
        double v = 0;
        for (std::size_t i = 0; i < gsize; ++i) {
            const double d = double(xp[i]) - mu;
            v += d * d;
        }
        const float r = 1.f / std::sqrt(float(v / double(gsize)) + eps);
        mean[g] = mu;
        rstd[g] = r;
        for (std::size_t i = 0; i < gsize; ++i) yp[i] = (xp[i] - mu) * r;
    });
}

void groupnorm_back(const float* x, const float* mean, const float* rstd, const float* dy,
                    int c, int h, int w, int groups, float* dx) {
    const int cg = c / groups;
    const std::size_t gsize = std::size_t(cg) * h * w;
    par_for(groups, want_parallel(), [&](int g) {
        const float* xp = x + std::size_t(g) * gsize;
        const float* gp = dy + std::size_t(g) * gsize;
        float* dp = dx + std::size_t(g) * gsize;
        const float mu = mean[g], r = rstd[g];
        double sdy = 0, sdyx = 0;
        for (std::size_t i = 0; i < gsize; ++i) {
            const float xh = (xp[i] - mu) * r;
            sdy += gp[i];
            sdyx += double(gp[i]) * xh;
        }
        const float m = float(gsize);
        const float a = float(sdy) / m, b = float(sdyx) / m;
        for (std::size_t i = 0; i < gsize; ++i) {
            const float xh = (xp[i] - mu) * r;
            dp[i] = r * (gp[i] - a - xh * b);
        }
    });
}

void film(const float* x, int c, int h, int w, const float* scale, const float* shift,
          float* y) {
    const std::size_t plane = std::size_t(h) * w;
    par_for(c, want_parallel(), [&](int ci) {
        const float s = 1.f + scale[ci], b = shift[ci];
        const float* xp = x + ci * plane;
        float* yp = y + ci * plane;
        for (std::size_t i = 0; i < plane; ++i) yp[i] = xp[i] * s + b;
    });
}

void film_back(const float* x, const float* dy, int c, int h, int w, const float* scale,
               float* dx, float* dscale, float* dshift) {
    const std::size_t plane = std::size_t(h) * w;
    par_for(c, want_parallel(), [&](int ci) {
        const float s = 1.f + scale[ci];
        const float* xp = x + ci * plane;
        const float* gp = dy + ci * plane;
        float* dp = dx + ci * plane;
        double ds = 0, db = 0;
        for (std::size_t i = 0; i < plane; ++i) {
            ds += double(gp[i]) * xp[i];
            db += gp[i];
            dp[i] = gp[i] * s;
        }
        dscale[ci] += float(ds);
        dshift[ci] += float(db);
    });
}

void silu(const float* x, std::size_t n, float* y) {
    for (std::size_t i = 0; i < n; ++i) {
        const float s = 1.f / (1.f + std::exp(-x[i]));
        y[i] = x[i] * s;
    }
}

void silu_back(const float* x, const float* dy, std::size_t n, float* dx) {
    for (std::size_t i = 0; i < n; ++i) {
        const float s = 1.f / (1.f + std::exp(-x[i]));
        dx[i] = dy[i] * s * (1.f + x[i] * (1.f - s));
    }
}

void linear(const float* x, int in_n, const float* w, const float* b, int out_n, float* y) {
    for (int o = 0; o < out_n; ++o) {
        const float* wr = w + std::size_t(o) * in_n;
        float s = b ? b[o] : 0.f;
        for (int i = 0; i < in_n; ++i) s += wr[i] * x[i];
        y[o] = s;
    }
}

void linear_back(const float* x, int in_n, const float* w, const float* dy, int out_n,
                 float* dx, float* dw, float* db) {
    if (dx) {
        for (int i = 0; i < in_n; ++i) dx[i] = 0.f;
        for (int o = 0; o < out_n; ++o) {
            const float* wr = w + std::size_t(o) * in_n;
            const float g = dy[o];
            for (int i = 0; i < in_n; ++i) dx[i] += wr[i] * g;
        }
    }
    if (dw) {
        for (int o = 0; o < out_n; ++o) {
            float* wr = dw + std::size_t(o) * in_n;
            const float g = dy[o];
            for (int i = 0; i < in_n; ++i) wr[i] += g * x[i];
        }
    }
    if (db)
        for (int o = 0; o < out_n; ++o) db[o] += dy[o];
}

}  // namespace ddslab::kern
