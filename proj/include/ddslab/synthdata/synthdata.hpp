#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ddslab/core/rng.hpp"
#include "ddslab/core/tensor.hpp"

namespace ddslab::synth {

inline constexpr int kNumShapes = 3;       // circle, square, triangle
inline constexpr int kNumColors = 4;       // red, green, blue, yellow
inline constexpr int kNumBackgrounds = 3;  // white, black, gray

const char* shape_name(int i);
const char* color_name(int i);
const char* background_name(int i);
int shape_index(const std::string& s);
int color_index(const std::string& s);
int background_index(const std::string& s);

// Attribute tuple used as the conditioning signal. A slot of -1 is the null
// token for that slot; a caption with all slots null is the unconditional
// token.
struct Caption {
    int shape = -1, color = -1, background = -1;

    static Caption null() { return {}; }
    bool fully_null() const { return shape < 0 && color < 0 && background < 0; }
    bool operator==(const Caption&) const = default;

    // compact form "<shape>:<color>:<background>", "-" for a null slot
    std::string str() const;
    std::string pretty() const;
    static Caption parse(const std::string& s);
};

struct CanvasDims {
    int h = 32, w = 32, c = 3;
    bool operator==(const CanvasDims&) const = default;
};

struct SceneSpec {
    int shape = 0, color = 0, background = 0;
    float cx = 0, cy = 0, radius = 0;
    std::uint64_t jitter_seed = 0;

    Caption caption() const { return {shape, color, background}; }
    std::string str() const;
    static SceneSpec parse(const std::string& s, CanvasDims canvas);
};

struct DatasetItem {
    Tensor image;
    SceneSpec spec;
};

struct Dataset {
    CanvasDims canvas;
    std::uint64_t seed = 0;
    std::vector<DatasetItem> items;
};

// throws std::invalid_argument when the (jittered) shape does not fit
void validate_spec(const SceneSpec& spec, CanvasDims canvas);

Tensor gen_image(const SceneSpec& spec, CanvasDims canvas);
Mask mask_of(const SceneSpec& spec, CanvasDims canvas);
Tensor background_image(int background, CanvasDims canvas);

Dataset sample_dataset(std::uint64_t seed, int n, CanvasDims canvas);

// Derangement of [0, n): result[i] != i for all i. Deterministic under seed.
std::vector<int> derangement_indices(int n, std::uint64_t seed);

// Pairs every image with the spec of a different item.
std::vector<std::pair<Tensor, SceneSpec>> permute_captions(const Dataset& ds,
                                                           std::uint64_t seed);

// Manifest + one PNG per item. Manifest round-trips byte-identically.
void write_dataset(const std::string& dir, const Dataset& ds);
Dataset read_dataset(const std::string& dir);

}  // namespace ddslab::synth
