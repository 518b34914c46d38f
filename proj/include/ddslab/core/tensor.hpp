#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ddslab {

// Dense CHW float tensor. Images use c=3, pixel values nominally in [-1, 1].
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<float> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(std::size_t(c_) * h_ * w_, 0.f) {}

    void resize(int c_, int h_, int w_) {
        c = c_;
        h = h_;
        w = w_;
        v.assign(std::size_t(c_) * h_ * w_, 0.f);
    }

    // Reshape without clearing when the shape already matches; outputs of the
    // compute kernels are fully overwritten so stale contents are harmless.
    void ensure(int c_, int h_, int w_) {
        if (c != c_ || h != h_ || w != w_) resize(c_, h_, w_);
    }

    std::size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }

    float* data() { return v.data(); }
    const float* data() const { return v.data(); }

    float* plane(int ci) { return v.data() + std::size_t(ci) * h * w; }
    const float* plane(int ci) const { return v.data() + std::size_t(ci) * h * w; }

    float& at(int ci, int y, int x) { return v[(std::size_t(ci) * h + y) * w + x]; }
    float at(int ci, int y, int x) const { return v[(std::size_t(ci) * h + y) * w + x]; }

    void zero() { std::fill(v.begin(), v.end(), 0.f); }
    void fill(float x) { std::fill(v.begin(), v.end(), x); }
};

struct Mask {
    int h = 0, w = 0;
    std::vector<std::uint8_t> m;

    Mask() = default;
    Mask(int h_, int w_) : h(h_), w(w_), m(std::size_t(h_) * w_, 0) {}

    bool at(int y, int x) const { return m[std::size_t(y) * w + x] != 0; }
    void set(int y, int x, bool b) { m[std::size_t(y) * w + x] = b ? 1 : 0; }
    std::size_t area() const {
        std::size_t a = 0;
        for (auto b : m) a += b;
        return a;
    }
};

inline double dot(const float* a, const float* b, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += double(a[i]) * b[i];
    return s;
}

inline double l2_norm(const Tensor& t) {
    return std::sqrt(dot(t.data(), t.data(), t.size()));
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    assert(a.size() == b.size());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::fabs(double(a.v[i]) - b.v[i]);
        if (d > m) m = d;
    }
    return m;
}

inline double mean_sq_diff(const Tensor& a, const Tensor& b) {
    assert(a.size() == b.size());
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = double(a.v[i]) - b.v[i];
        s += d * d;
    }
    return a.size() ? s / double(a.size()) : 0.0;
}

inline bool all_finite(const Tensor& t) {
    for (float x : t.v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void clamp_unit(Tensor& t) {
    for (float& x : t.v) x = x < -1.f ? -1.f : (x > 1.f ? 1.f : x);
}

}  // namespace ddslab
