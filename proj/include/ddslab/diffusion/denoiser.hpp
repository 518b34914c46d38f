#pragma once

#include <memory>
#include <vector>

#include "ddslab/core/tensor.hpp"
#include "ddslab/nn/unet.hpp"
#include "ddslab/synthdata/synthdata.hpp"

namespace ddslab::diff {

// Anything that predicts the noise content of a noisy image given a caption
// and a timestep. Implementations must be pure and thread-safe.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual void predict(const Tensor& z_t, const synth::Caption& y, double t,
                         Tensor& eps_out) const = 0;
};

// Conditional noise predictor: UNet core plus one learned embedding table per
// caption slot (last row of each table is that slot's null token).
class Denoiser : public NoisePredictor {
public:
    Denoiser() = default;
    void build(const nn::UNetConfig& cfg, std::uint64_t init_seed);

    void predict(const Tensor& z_t, const synth::Caption& y, double t,
                 Tensor& eps_out) const override;

    // training-path forward/backward; gbuf is a flat buffer of params().total
    void fwd_train(const Tensor& z_t, const synth::Caption& y, double t, nn::UNetWs& ws,
                   Tensor& eps_out) const;
    void bwd_train(const synth::Caption& y, const nn::UNetWs& ws, const Tensor& dout,
                   float* gbuf) const;

    // condition vector for a caption: sum of the three slot embeddings
    std::vector<float> cond_vec(const synth::Caption& y) const;

    nn::ParamSet& params() { return ps_; }
    const nn::ParamSet& params() const { return ps_; }
    const nn::UNetConfig& config() const { return ucfg_; }
    const nn::UNetCore& core() const { return net_; }
    nn::UNetCore& core() { return net_; }

private:
    int row_of(int value, int vocab) const { return value < 0 ? vocab : value; }

    nn::UNetConfig ucfg_;
    nn::UNetCore net_;
    nn::Param shape_emb_, color_emb_, background_emb_;
    nn::ParamSet ps_;
};

// CFG-combined prediction: (1 + omega) * eps(z_t, y, t) - omega * eps(z_t, t).
void cfg_predict_into(const NoisePredictor& model, const Tensor& z_t, const synth::Caption& y,
                      double t, double omega, Tensor& out);
Tensor cfg_predict(const NoisePredictor& model, const Tensor& z_t, const synth::Caption& y,
                   double t, double omega);

}  // namespace ddslab::diff
