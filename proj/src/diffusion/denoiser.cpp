#include "ddslab/diffusion/denoiser.hpp"

namespace ddslab::diff {

void Denoiser::build(const nn::UNetConfig& cfg, std::uint64_t init_seed) {
    ucfg_ = cfg;
    Rng rng(derive_seed(init_seed, 0xdead));
    const int E = cfg.emb_dim;

    auto init_table = [&](nn::Param& p, const char* name, int vocab) {
        p.name = name;
        p.shape = {vocab + 1, E};  // +1: per-slot null token
        p.w.assign(std::size_t(vocab + 1) * E, 0.f);
        nn::fill_normal_scaled(p.w, rng, 0.2f);
        ps_.add(&p);
    };
    init_table(shape_emb_, "shape_emb", synth::kNumShapes);
    init_table(color_emb_, "color_emb", synth::kNumColors);
    init_table(background_emb_, "background_emb", synth::kNumBackgrounds);

    net_.build(cfg, rng);
    // re-register the unet params in this flat registry; offsets are rebased
    // so a single gradient buffer covers tables + network
    for (nn::Param* p : net_.params().items) ps_.add(p);
}

std::vector<float> Denoiser::cond_vec(const synth::Caption& y) const {
    const int E = ucfg_.emb_dim;
    std::vector<float> v(E, 0.f);
    const float* s = shape_emb_.w.data() + std::size_t(row_of(y.shape, synth::kNumShapes)) * E;
    const float* c = color_emb_.w.data() + std::size_t(row_of(y.color, synth::kNumColors)) * E;
    const float* b =
        background_emb_.w.data() + std::size_t(row_of(y.background, synth::kNumBackgrounds)) * E;
    for (int i = 0; i < E; ++i) v[i] = s[i] + c[i] + b[i];
    return v;
}

void Denoiser::predict(const Tensor& z_t, const synth::Caption& y, double t,
                       Tensor& eps_out) const {
    static thread_local nn::UNetWs ws;
    net_.fwd(z_t, nn::sinusoidal_features(t, ucfg_.tfeat_dim), cond_vec(y), ws, eps_out);
}

void Denoiser::fwd_train(const Tensor& z_t, const synth::Caption& y, double t, nn::UNetWs& ws,
                         Tensor& eps_out) const {
    net_.fwd(z_t, nn::sinusoidal_features(t, ucfg_.tfeat_dim), cond_vec(y), ws, eps_out);
}

void Denoiser::bwd_train(const synth::Caption& y, const nn::UNetWs& ws, const Tensor& dout,
                         float* gbuf) const {
    const int E = ucfg_.emb_dim;
    std::vector<float> d_cond(E, 0.f);
    net_.bwd(ws, dout, gbuf, nullptr, &d_cond);
    float* gs = gbuf + shape_emb_.offset + std::size_t(row_of(y.shape, synth::kNumShapes)) * E;
    float* gc = gbuf + color_emb_.offset + std::size_t(row_of(y.color, synth::kNumColors)) * E;
    float* gb = gbuf + background_emb_.offset +
                std::size_t(row_of(y.background, synth::kNumBackgrounds)) * E;
    for (int i = 0; i < E; ++i) {
        gs[i] += d_cond[i];
        gc[i] += d_cond[i];
        gb[i] += d_cond[i];
    }
}

void cfg_predict_into(const NoisePredictor& model, const Tensor& z_t, const synth::Caption& y,
                      double t, double omega, Tensor& out) {
    model.predict(z_t, y, t, out);
    if (omega == 0.0 || y.fully_null()) return;
    static thread_local Tensor uncond;
    model.predict(z_t, synth::Caption::null(), t, uncond);
    const float w = float(omega);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.v[i] = (1.f + w) * out.v[i] - w * uncond.v[i];
}

Tensor cfg_predict(const NoisePredictor& model, const Tensor& z_t, const synth::Caption& y,
                   double t, double omega) {
    Tensor out;
    cfg_predict_into(model, z_t, y, t, omega, out);
    return out;
}

}  // namespace ddslab::diff
