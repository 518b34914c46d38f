#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "ddslab/core/rng.hpp"

namespace ddslab::nn {

struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<float> w;
    std::size_t offset = 0;  // position in the flat parameter/gradient space

    std::size_t count() const { return w.size(); }
};

// Ordered registry of all parameters of a model. Registration order is fixed
// by construction, which pins the flat layout used by optimizers, gradient
// buffers and checkpoints.
struct ParamSet {
    std::vector<Param*> items;
    std::size_t total = 0;

    void add(Param* p) {
        p->offset = total;
        total += p->count();
        items.push_back(p);
    }

    void gather(float* dst) const {
        for (const Param* p : items)
            std::copy(p->w.begin(), p->w.end(), dst + p->offset);
    }

    void scatter(const float* src) {
        for (Param* p : items)
            std::copy(src + p->offset, src + p->offset + p->count(), p->w.begin());
    }

    std::uint64_t content_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (const Param* p : items)
            for (float x : p->w) {
                std::uint32_t bits;
                std::memcpy(&bits, &x, 4);
                h ^= bits;
                h *= 0x100000001b3ull;
            }
        return h;
    }
};

inline void fill_normal_scaled(std::vector<float>& v, Rng& rng, float std) {
    for (float& x : v) x = rng.normal() * std;
}

}  // namespace ddslab::nn
