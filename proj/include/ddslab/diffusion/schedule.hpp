#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "ddslab/core/tensor.hpp"

namespace ddslab::diff {

// Continuous-time signal schedule alpha(t) on (0,1): strictly decreasing,
// alpha -> 1 at t -> 0 and alpha -> 0 at t -> 1, plus the loss weight w(t)
// (constant, defaults to 1).
struct NoiseSchedule {
    enum class Kind { Cosine, ConstAlpha };

    Kind kind = Kind::Cosine;
    double s = 0.008;            // cosine offset
    double const_alpha = 0.25;   // test-only kind
    double weight = 1.0;

    double alpha_bar(double t) const {
        switch (kind) {
            case Kind::Cosine: {
                const double f = std::cos((t + s) / (1.0 + s) * M_PI / 2.0);
                const double f0 = std::cos(s / (1.0 + s) * M_PI / 2.0);
                return (f * f) / (f0 * f0);
            }
            case Kind::ConstAlpha:
                return const_alpha;
        }
        return 0.0;
    }

    double w(double /*t*/) const { return weight; }

    std::string kind_name() const {
        return kind == Kind::Cosine ? "cosine" : "const_alpha";
    }

    static NoiseSchedule cosine(double s = 0.008) {
        NoiseSchedule n;
        n.kind = Kind::Cosine;
        n.s = s;
        return n;
    }

    static NoiseSchedule const_alpha_test(double a) {
        NoiseSchedule n;
        n.kind = Kind::ConstAlpha;
        n.const_alpha = a;
        return n;
    }
};

struct NoisedImage {
    Tensor z_t;
    Tensor eps;
    double t = 0;
};

// z_t = sqrt(alpha(t)) * z + sqrt(1 - alpha(t)) * eps
inline void add_noise_into(const Tensor& z, const Tensor& eps, double t,
                           const NoiseSchedule& sched, Tensor& z_t) {
    if (!(t > 0.0 && t < 1.0))
        throw std::invalid_argument("timestep must lie strictly inside (0,1)");
    if (!z.same_shape(eps)) throw std::invalid_argument("noise shape must match image shape");
    const double a = sched.alpha_bar(t);
    const float sa = float(std::sqrt(a)), sb = float(std::sqrt(1.0 - a));
    z_t.ensure(z.c, z.h, z.w);
    for (std::size_t i = 0; i < z.size(); ++i) z_t.v[i] = sa * z.v[i] + sb * eps.v[i];
}

inline NoisedImage add_noise(const Tensor& z, const Tensor& eps, double t,
                             const NoiseSchedule& sched) {
    NoisedImage n;
    add_noise_into(z, eps, t, sched, n.z_t);
    n.eps = eps;
    n.t = t;
    return n;
}

}  // namespace ddslab::diff
