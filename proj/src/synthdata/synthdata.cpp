#include "ddslab/synthdata/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ddslab/core/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ddslab::synth {

namespace {

const char* kShapeNames[kNumShapes] = {"circle", "square", "triangle"};
const char* kColorNames[kNumColors] = {"red", "green", "blue", "yellow"};
const char* kBackgroundNames[kNumBackgrounds] = {"white", "black", "gray"};

// pixel values in [-1, 1]
const float kColorRgb[kNumColors][3] = {
    {1.f, -1.f, -1.f},  // red
    {-1.f, 1.f, -1.f},  // green
    {-1.f, -1.f, 1.f},  // blue
    {1.f, 1.f, -1.f},   // yellow
};
const float kBackgroundRgb[kNumBackgrounds][3] = {
    {1.f, 1.f, 1.f},     // white
    {-1.f, -1.f, -1.f},  // black
    {0.f, 0.f, 0.f},     // gray
};

int name_index(const std::string& s, const char* const* names, int n, const char* what) {
    for (int i = 0; i < n; ++i)
        if (s == names[i]) return i;
    throw std::invalid_argument(std::string("unknown ") + what + ": " + s);
}

struct Geometry {
    float cx, cy, r;
};

// Sub-pixel jitter derived from the spec's seed; the same geometry drives the
// renderer and the mask.
Geometry effective_geometry(const SceneSpec& s) {
    Rng rng(derive_seed(s.jitter_seed, 0x9e37u));
    Geometry g;
    g.cx = s.cx + float(rng.uniform(-0.5, 0.5));
    g.cy = s.cy + float(rng.uniform(-0.5, 0.5));
    g.r = s.radius * float(rng.uniform(0.95, 1.05));
    return g;
}

bool inside(const Geometry& g, int shape, float px, float py) {
    const float dx = px - g.cx, dy = py - g.cy;
    switch (shape) {
        case 0:  // circle
            return dx * dx + dy * dy <= g.r * g.r;
        case 1: {  // square inscribed in the radius-r circle
            const float a = g.r * 0.70710678f;
            return std::fabs(dx) <= a && std::fabs(dy) <= a;
        }
        default: {  // equilateral triangle, apex up (image y grows downward)
            const float x0 = g.cx, y0 = g.cy - g.r;
            const float x1 = g.cx + 0.8660254f * g.r, y1 = g.cy + 0.5f * g.r;
            const float x2 = g.cx - 0.8660254f * g.r, y2 = g.cy + 0.5f * g.r;
            const float c0 = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0);
            const float c1 = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1);
            const float c2 = (x0 - x2) * (py - y2) - (y0 - y2) * (px - x2);
            return (c0 >= 0 && c1 >= 0 && c2 >= 0) || (c0 <= 0 && c1 <= 0 && c2 <= 0);
        }
    }
}

// 4x supersampled coverage, box filtered, then remapped so that coverage is
// nonzero only where the pixel is majority-inside. Keeps soft edges while the
// off-shape region stays exactly equal to the plain background render.
std::vector<float> coverage_map(const SceneSpec& spec, CanvasDims canvas) {
    const Geometry g = effective_geometry(spec);
    std::vector<float> cov(std::size_t(canvas.h) * canvas.w, 0.f);
    for (int y = 0; y < canvas.h; ++y)
        for (int x = 0; x < canvas.w; ++x) {
            int hits = 0;
            for (int sy = 0; sy < 4; ++sy)
                for (int sx = 0; sx < 4; ++sx) {
                    const float px = x + (sx + 0.5f) / 4.f;
                    const float py = y + (sy + 0.5f) / 4.f;
                    if (inside(g, spec.shape, px, py)) ++hits;
                }
            const float c = float(hits) / 16.f;
            cov[std::size_t(y) * canvas.w + x] = std::clamp(2.f * c - 1.f, 0.f, 1.f);
        }
    return cov;
}

std::string png_name(int idx) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "item_%05d.png", idx);
    return buf;
}

}  // namespace

const char* shape_name(int i) { return kShapeNames[i]; }
const char* color_name(int i) { return kColorNames[i]; }
const char* background_name(int i) { return kBackgroundNames[i]; }
int shape_index(const std::string& s) { return name_index(s, kShapeNames, kNumShapes, "shape"); }
int color_index(const std::string& s) { return name_index(s, kColorNames, kNumColors, "color"); }
int background_index(const std::string& s) {
    return name_index(s, kBackgroundNames, kNumBackgrounds, "background");
}

std::string Caption::str() const {
    std::string a = shape < 0 ? "-" : kShapeNames[shape];
    std::string b = color < 0 ? "-" : kColorNames[color];
    std::string c = background < 0 ? "-" : kBackgroundNames[background];
    return a + ":" + b + ":" + c;
}

std::string Caption::pretty() const {
    if (fully_null()) return "(null)";
    std::string out;
    if (color >= 0) out += kColorNames[color];
    if (shape >= 0) out += (out.empty() ? "" : " ") + std::string(kShapeNames[shape]);
    if (background >= 0)
        out += (out.empty() ? std::string("on ") : std::string(" on ")) + kBackgroundNames[background];
    return out;
}

Caption Caption::parse(const std::string& s) {
    if (s == "null" || s == "-:-:-" || s.empty()) return Caption::null();
    std::vector<std::string> tok;
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ':')) tok.push_back(t);
    if (tok.size() != 3)
        throw std::invalid_argument("caption must be <shape>:<color>:<background>, got: " + s);
    Caption c;
    if (tok[0] != "-") c.shape = shape_index(tok[0]);
    if (tok[1] != "-") c.color = color_index(tok[1]);
    if (tok[2] != "-") c.background = background_index(tok[2]);
    return c;
}

std::string SceneSpec::str() const {
    std::ostringstream os;
    os << kShapeNames[shape] << ":" << kColorNames[color] << ":" << kBackgroundNames[background]
       << ":" << cx << ":" << cy << ":" << radius << ":" << jitter_seed;
    return os.str();
}

SceneSpec SceneSpec::parse(const std::string& s, CanvasDims canvas) {
    std::vector<std::string> tok;
    std::stringstream ss(s);
    std::string t;
    while (std::getline(ss, t, ':')) tok.push_back(t);
    if (tok.size() != 3 && tok.size() != 7)
        throw std::invalid_argument(
            "scene spec must be shape:color:background[:cx:cy:radius:jitter], got: " + s);
    SceneSpec sp;
    sp.shape = shape_index(tok[0]);
    sp.color = color_index(tok[1]);
    sp.background = background_index(tok[2]);
    if (tok.size() == 7) {
        sp.cx = std::stof(tok[3]);
        sp.cy = std::stof(tok[4]);
        sp.radius = std::stof(tok[5]);
        sp.jitter_seed = std::stoull(tok[6]);
    } else {
        sp.cx = canvas.w / 2.f;
        sp.cy = canvas.h / 2.f;
        sp.radius = 0.27f * std::min(canvas.h, canvas.w);
        sp.jitter_seed = 0;
    }
    return sp;
}

void validate_spec(const SceneSpec& spec, CanvasDims canvas) {
    if (spec.shape < 0 || spec.shape >= kNumShapes || spec.color < 0 ||
        spec.color >= kNumColors || spec.background < 0 || spec.background >= kNumBackgrounds)
        throw std::invalid_argument("scene spec has out-of-range attributes");
    if (!(spec.radius >= 1.f))
        throw std::invalid_argument("scene spec radius must be >= 1 pixel");
    const Geometry g = effective_geometry(spec);
    if (g.cx - g.r < 0 || g.cx + g.r > canvas.w || g.cy - g.r < 0 || g.cy + g.r > canvas.h)
        throw std::invalid_argument("shape does not fit inside the canvas");
}

Tensor background_image(int background, CanvasDims canvas) {
    Tensor img(3, canvas.h, canvas.w);
    for (int ch = 0; ch < 3; ++ch) {
        float* p = img.plane(ch);
        std::fill(p, p + std::size_t(canvas.h) * canvas.w, kBackgroundRgb[background][ch]);
    }
    return img;
}

Tensor gen_image(const SceneSpec& spec, CanvasDims canvas) {
    validate_spec(spec, canvas);
    const auto cov = coverage_map(spec, canvas);
    Tensor img = background_image(spec.background, canvas);
    for (int ch = 0; ch < 3; ++ch) {
        const float fg = kColorRgb[spec.color][ch];
        const float bg = kBackgroundRgb[spec.background][ch];
        float* p = img.plane(ch);
        for (std::size_t i = 0; i < cov.size(); ++i) p[i] = bg + cov[i] * (fg - bg);
    }
    return img;
}

Mask mask_of(const SceneSpec& spec, CanvasDims canvas) {
    validate_spec(spec, canvas);
    const auto cov = coverage_map(spec, canvas);
    Mask m(canvas.h, canvas.w);
    for (std::size_t i = 0; i < cov.size(); ++i) m.m[i] = cov[i] > 0.f ? 1 : 0;
    return m;
}

Dataset sample_dataset(std::uint64_t seed, int n, CanvasDims canvas) {
    if (n < 1) throw std::invalid_argument("dataset size must be >= 1");
    Dataset ds;
    ds.canvas = canvas;
    ds.seed = seed;
    ds.items.resize(n);
    const float minside = float(std::min(canvas.h, canvas.w));
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, std::uint64_t(i), 0x5d));
        SceneSpec sp;
        sp.shape = int(rng.randint(kNumShapes));
        sp.color = int(rng.randint(kNumColors));
        sp.background = int(rng.randint(kNumBackgrounds));
        sp.radius = float(rng.uniform(0.17, 0.30)) * minside;
        const float safe = sp.radius * 1.05f + 1.0f;
        sp.cx = float(rng.uniform(safe, canvas.w - safe));
        sp.cy = float(rng.uniform(safe, canvas.h - safe));
        sp.jitter_seed = derive_seed(seed, std::uint64_t(i), 0x6a);
        ds.items[i].spec = sp;
        ds.items[i].image = gen_image(sp, canvas);
    }
    return ds;
}

std::vector<int> derangement_indices(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("a derangement needs at least 2 items");
    std::vector<int> idx(n);
    Rng rng(derive_seed(seed, 0xde7a));
    while (true) {
        for (int i = 0; i < n; ++i) idx[i] = i;
        for (int i = n - 1; i > 0; --i)
            std::swap(idx[i], idx[rng.randint(std::uint64_t(i) + 1)]);
        bool ok = true;
        for (int i = 0; i < n; ++i)
            if (idx[i] == i) {
                ok = false;
                break;
            }
        if (ok) return idx;
    }
}

std::vector<std::pair<Tensor, SceneSpec>> permute_captions(const Dataset& ds,
                                                           std::uint64_t seed) {
    const int n = int(ds.items.size());
    if (n < 2)
        throw std::invalid_argument("caption permutation needs a dataset of at least 2 items");
    const auto idx = derangement_indices(n, seed);
    std::vector<std::pair<Tensor, SceneSpec>> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.emplace_back(ds.items[i].image, ds.items[idx[i]].spec);
    return out;
}

void write_dataset(const std::string& dir, const Dataset& ds) {
    fs::create_directories(dir);
    json items = json::array();
    for (int i = 0; i < int(ds.items.size()); ++i) {
        const SceneSpec& sp = ds.items[i].spec;
        items.push_back({{"shape", kShapeNames[sp.shape]},
                         {"color", kColorNames[sp.color]},
                         {"background", kBackgroundNames[sp.background]},
                         {"cx", double(sp.cx)},
                         {"cy", double(sp.cy)},
                         {"radius", double(sp.radius)},
                         {"jitter_seed", sp.jitter_seed},
                         {"file", png_name(i)}});
        write_png((fs::path(dir) / png_name(i)).string(), ds.items[i].image);
    }
    json manifest = {{"version", 1},
                     {"canvas", {{"h", ds.canvas.h}, {"w", ds.canvas.w}, {"c", ds.canvas.c}}},
                     {"seed", ds.seed},
                     {"count", ds.items.size()},
                     {"items", items}};
    std::ofstream out(fs::path(dir) / "manifest.json");
    out << manifest.dump(2) << "\n";
}

Dataset read_dataset(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw std::runtime_error("no manifest.json under " + dir);
    json manifest = json::parse(in);
    if (manifest.at("version").get<int>() != 1)
        throw std::runtime_error("unsupported dataset manifest version");
    Dataset ds;
    ds.canvas.h = manifest.at("canvas").at("h").get<int>();
    ds.canvas.w = manifest.at("canvas").at("w").get<int>();
    ds.canvas.c = manifest.at("canvas").at("c").get<int>();
    ds.seed = manifest.at("seed").get<std::uint64_t>();
    for (const auto& it : manifest.at("items")) {
        DatasetItem item;
        item.spec.shape = shape_index(it.at("shape").get<std::string>());
        item.spec.color = color_index(it.at("color").get<std::string>());
        item.spec.background = background_index(it.at("background").get<std::string>());
        item.spec.cx = float(it.at("cx").get<double>());
        item.spec.cy = float(it.at("cy").get<double>());
        item.spec.radius = float(it.at("radius").get<double>());
        item.spec.jitter_seed = it.at("jitter_seed").get<std::uint64_t>();
        item.image = read_png((fs::path(dir) / it.at("file").get<std::string>()).string());
        ds.items.push_back(std::move(item));
    }
    return ds;
}

}  // namespace ddslab::synth
