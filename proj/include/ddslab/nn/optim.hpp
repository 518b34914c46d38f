#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace ddslab::nn {

struct Adam {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t steps = 0;
    std::vector<float> m, v;

    void init(std::size_t n) {
        m.assign(n, 0.f);
        v.assign(n, 0.f);
        steps = 0;
    }

    void step(float* p, const float* g, std::size_t n, double lr) {
        ++steps;
        const double c1 = 1.0 - std::pow(beta1, double(steps));
        const double c2 = 1.0 - std::pow(beta2, double(steps));
        const float b1 = float(beta1), b2 = float(beta2);
        const float scale = float(lr / c1);
        const float rc2 = float(1.0 / c2);
        const float e = float(eps);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
            m[i] = b1 * m[i] + (1.f - b1) * g[i];
            v[i] = b2 * v[i] + (1.f - b2) * g[i] * g[i];
            p[i] -= scale * m[i] / (std::sqrt(v[i] * rc2) + e);
        }
    }
};

}  // namespace ddslab::nn
