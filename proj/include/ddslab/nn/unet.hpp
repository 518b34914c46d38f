#pragma once

#include <vector>

#include "ddslab/core/tensor.hpp"
#include "ddslab/nn/layers.hpp"

namespace ddslab::nn {

// Encoder-decoder with skip connections at three resolutions (H, H/2, H/4).
// A single embedding vector (time features through an MLP, plus a condition
// vector) modulates every residual block through adaptive group norm.
struct UNetConfig {
    int in_ch = 3;
    int base = 64;  // channels at full resolution
    int mult1 = 2, mult2 = 2;
    int emb_dim = 128;
    int tfeat_dim = 32;
    int groups = 8;

    int w1() const { return base; }
    int w2() const { return base * mult1; }
    int w3() const { return base * mult2; }
};

struct ResBlockWs {
    Tensor gn1_out, aff1_out, silu1_out, conv1_out;
    Tensor gn2_out, ada_out, silu2_out, conv2_out;
    GnStats st1, st2;
    std::vector<float> sb;  // adaptive scale/shift, 2*out_c
    // backward scratch
    Tensor d_a, d_b, d_skip;
    std::vector<float> dsb, demb_tmp;
};

struct ResBlock {
    int in_c = 0, out_c = 0;
    GroupNorm gn1, gn2;
    ChannelAffine aff1;
    Conv2d conv1, conv2, skip;
    Linear emb_lin;
    bool has_skip = false;

    void init(const std::string& name, int in_c_, int out_c_, int emb_dim, int groups,
              Rng& rng, ParamSet& ps);
    void fwd(const Tensor& x, const std::vector<float>& semb, ResBlockWs& ws,
             Tensor& y) const;
    // demb accumulates the gradient w.r.t. semb (the pre-activated embedding)
    void bwd(const Tensor& x, const std::vector<float>& semb, const ResBlockWs& ws,
             const Tensor& dy, Tensor& dx, std::vector<float>& demb, float* gbuf) const;
};

struct UNetWs {
    Tensor x_in;
    std::vector<float> tfeat, t1, t1s, t2, emb, semb;
    Tensor h0, r1, p1, d1c, r2, p2, d2c, b1, b2;
    Tensor us2, u2c, cat2, r4, us1, u1c, cat1, r5;
    Tensor go, fo, so, out;
    GnStats st_out;
    ResBlockWs wrb1, wrb2, wrb3a, wrb3b, wrbu2, wrbu1;
    // backward scratch
    Tensor da, db, dc;
    std::vector<float> dsemb, dv1, dv2;
};

class UNetCore {
public:
    void build(const UNetConfig& cfg, Rng& rng);

    const UNetConfig& config() const { return cfg_; }
    ParamSet& params() { return ps_; }
    const ParamSet& params() const { return ps_; }

    void fwd(const Tensor& x, const std::vector<float>& tfeat, const std::vector<float>& cond,
             UNetWs& ws, Tensor& out) const;

    // Consumes the workspace of the matching fwd call. Parameter gradients are
    // accumulated into gbuf (flat, ps_.total floats); d_tfeat/d_cond receive
    // the embedding-input gradients when non-null.
    void bwd(const UNetWs& ws, const Tensor& dout, float* gbuf, std::vector<float>* d_tfeat,
             std::vector<float>* d_cond) const;

private:
    UNetConfig cfg_;
    Linear t_mlp1, t_mlp2;
    Conv2d in_conv;
    ResBlock rb1, rb2, rb3a, rb3b, rbu2, rbu1;
    Conv2d down1, down2, up2, up1;
    GroupNorm gn_out;
    ChannelAffine aff_out;
    Conv2d out_conv;
    ParamSet ps_;
};

}  // namespace ddslab::nn
