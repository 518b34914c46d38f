#include "ddslab/nn/unet.hpp"

#include <stdexcept>

namespace ddslab::nn {

namespace {

void add_into(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.v[i] += src.v[i];
}

void concat(const Tensor& a, const Tensor& b, Tensor& y) {
    y.ensure(a.c + b.c, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), y.v.begin());
    std::copy(b.v.begin(), b.v.end(), y.v.begin() + a.size());
}

void split_grad(const Tensor& d, int c_a, Tensor& da, Tensor& db) {
    da.ensure(c_a, d.h, d.w);
    db.ensure(d.c - c_a, d.h, d.w);
    std::copy(d.v.begin(), d.v.begin() + da.size(), da.v.begin());
    std::copy(d.v.begin() + da.size(), d.v.end(), db.v.begin());
}

}  // namespace

void ResBlock::init(const std::string& name, int in_c_, int out_c_, int emb_dim, int groups,
                    Rng& rng, ParamSet& ps) {
    in_c = in_c_;
    out_c = out_c_;
    gn1.groups = groups;
    gn2.groups = groups;
    aff1.init(name + ".aff1", in_c, ps);
    conv1.init(name + ".conv1", in_c, out_c, 3, rng, ps);
    emb_lin.init(name + ".emb", emb_dim, 2 * out_c, rng, ps, 0.f);  // starts as identity modulation
    conv2.init(name + ".conv2", out_c, out_c, 3, rng, ps, 0.f);
    has_skip = in_c != out_c;
    if (has_skip) skip.init(name + ".skip", in_c, out_c, 1, rng, ps);
}

void ResBlock::fwd(const Tensor& x, const std::vector<float>& semb, ResBlockWs& ws,
                   Tensor& y) const {
    gn1.fwd(x, ws.gn1_out, ws.st1);
    aff1.fwd(ws.gn1_out, ws.aff1_out);
    ws.silu1_out.ensure(in_c, x.h, x.w);
    kern::silu(ws.aff1_out.data(), ws.aff1_out.size(), ws.silu1_out.data());
    conv1.fwd(ws.silu1_out, ws.conv1_out);

    emb_lin.fwd(semb, ws.sb);
    gn2.fwd(ws.conv1_out, ws.gn2_out, ws.st2);
    ws.ada_out.ensure(out_c, x.h, x.w);
    kern::film(ws.gn2_out.data(), out_c, x.h, x.w, ws.sb.data(), ws.sb.data() + out_c,
               ws.ada_out.data());
    ws.silu2_out.ensure(out_c, x.h, x.w);
    kern::silu(ws.ada_out.data(), ws.ada_out.size(), ws.silu2_out.data());
    conv2.fwd(ws.silu2_out, ws.conv2_out);

    y.ensure(out_c, x.h, x.w);
    if (has_skip) {
        skip.fwd(x, y);
        add_into(y, ws.conv2_out);
    } else {
        std::copy(x.v.begin(), x.v.end(), y.v.begin());
        add_into(y, ws.conv2_out);
    }
}

void ResBlock::bwd(const Tensor& x, const std::vector<float>& semb, const ResBlockWs& wsc,
                   const Tensor& dy, Tensor& dx, std::vector<float>& demb,
                   float* gbuf) const {
    auto& ws = const_cast<ResBlockWs&>(wsc);  // backward scratch lives in the workspace

    // main branch: conv2 <- silu <- film(ada) <- gn2 <- conv1 <- silu <- aff1 <- gn1
    conv2.bwd(ws.silu2_out, dy, &ws.d_a, gbuf);
    ws.d_b.ensure(out_c, x.h, x.w);
    kern::silu_back(ws.ada_out.data(), ws.d_a.data(), ws.d_a.size(), ws.d_b.data());

    ws.dsb.assign(2 * out_c, 0.f);
    ws.d_a.ensure(out_c, x.h, x.w);
    kern::film_back(ws.gn2_out.data(), ws.d_b.data(), out_c, x.h, x.w, ws.sb.data(),
                    ws.d_a.data(), ws.dsb.data(), ws.dsb.data() + out_c);
    emb_lin.bwd(semb, ws.dsb, &ws.demb_tmp, gbuf);
    for (std::size_t i = 0; i < demb.size(); ++i) demb[i] += ws.demb_tmp[i];

    gn2.bwd(ws.conv1_out, ws.st2, ws.d_a, ws.d_b);
    conv1.bwd(ws.silu1_out, ws.d_b, &ws.d_a, gbuf);
    ws.d_b.ensure(in_c, x.h, x.w);
    kern::silu_back(ws.aff1_out.data(), ws.d_a.data(), ws.d_a.size(), ws.d_b.data());
    aff1.bwd(ws.gn1_out, ws.d_b, ws.d_a, gbuf);
    gn1.bwd(x, ws.st1, ws.d_a, dx);

    // skip branch
    if (has_skip) {
        skip.bwd(x, dy, &ws.d_skip, gbuf);
        add_into(dx, ws.d_skip);
    } else {
        add_into(dx, dy);
    }
}

void UNetCore::build(const UNetConfig& cfg, Rng& rng) {
    cfg_ = cfg;
    const int w1 = cfg.w1(), w2 = cfg.w2(), w3 = cfg.w3(), E = cfg.emb_dim, G = cfg.groups;
    if (w1 % G || w2 % G || w3 % G)
        throw std::runtime_error("unet widths must be divisible by the group count");

    t_mlp1.init("tmlp1", cfg.tfeat_dim, E, rng, ps_);
    t_mlp2.init("tmlp2", E, E, rng, ps_);
    in_conv.init("in_conv", cfg.in_ch, w1, 3, rng, ps_);
    rb1.init("rb1", w1, w1, E, G, rng, ps_);
    down1.init("down1", w1, w2, 3, rng, ps_);
    rb2.init("rb2", w2, w2, E, G, rng, ps_);
    down2.init("down2", w2, w3, 3, rng, ps_);
    rb3a.init("rb3a", w3, w3, E, G, rng, ps_);
    rb3b.init("rb3b", w3, w3, E, G, rng, ps_);
    up2.init("up2", w3, w2, 3, rng, ps_);
    rbu2.init("rbu2", 2 * w2, w2, E, G, rng, ps_);
    up1.init("up1", w2, w1, 3, rng, ps_);
    rbu1.init("rbu1", 2 * w1, w1, E, G, rng, ps_);
    gn_out.groups = G;
    aff_out.init("aff_out", w1, ps_);
    out_conv.init("out_conv", w1, cfg.in_ch, 3, rng, ps_, 0.f);
}

void UNetCore::fwd(const Tensor& x, const std::vector<float>& tfeat,
                   const std::vector<float>& cond, UNetWs& ws, Tensor& out) const {
    if (x.h % 4 || x.w % 4)
        throw std::runtime_error("unet input dimensions must be divisible by 4");
    ws.x_in = x;
    ws.tfeat = tfeat;

    // embedding pipeline
    t_mlp1.fwd(tfeat, ws.t1);
    silu_vec(ws.t1, ws.t1s);
    t_mlp2.fwd(ws.t1s, ws.t2);
    ws.emb.resize(cfg_.emb_dim);
    for (int i = 0; i < cfg_.emb_dim; ++i) ws.emb[i] = ws.t2[i] + cond[i];
    silu_vec(ws.emb, ws.semb);

    in_conv.fwd(ws.x_in, ws.h0);
    rb1.fwd(ws.h0, ws.semb, ws.wrb1, ws.r1);
    ws.p1.ensure(cfg_.w1(), x.h / 2, x.w / 2);
    kern::avgpool2(ws.r1.data(), cfg_.w1(), x.h, x.w, ws.p1.data());
    down1.fwd(ws.p1, ws.d1c);
    rb2.fwd(ws.d1c, ws.semb, ws.wrb2, ws.r2);
    ws.p2.ensure(cfg_.w2(), x.h / 4, x.w / 4);
    kern::avgpool2(ws.r2.data(), cfg_.w2(), x.h / 2, x.w / 2, ws.p2.data());
    down2.fwd(ws.p2, ws.d2c);
    rb3a.fwd(ws.d2c, ws.semb, ws.wrb3a, ws.b1);
    rb3b.fwd(ws.b1, ws.semb, ws.wrb3b, ws.b2);

    ws.us2.ensure(cfg_.w3(), x.h / 2, x.w / 2);
    kern::upsample2(ws.b2.data(), cfg_.w3(), x.h / 4, x.w / 4, ws.us2.data());
    up2.fwd(ws.us2, ws.u2c);
    concat(ws.u2c, ws.r2, ws.cat2);
    rbu2.fwd(ws.cat2, ws.semb, ws.wrbu2, ws.r4);

    ws.us1.ensure(cfg_.w2(), x.h, x.w);
    kern::upsample2(ws.r4.data(), cfg_.w2(), x.h / 2, x.w / 2, ws.us1.data());
    up1.fwd(ws.us1, ws.u1c);
    concat(ws.u1c, ws.r1, ws.cat1);
    rbu1.fwd(ws.cat1, ws.semb, ws.wrbu1, ws.r5);

    gn_out.fwd(ws.r5, ws.go, ws.st_out);
    aff_out.fwd(ws.go, ws.fo);
    ws.so.ensure(cfg_.w1(), x.h, x.w);
    kern::silu(ws.fo.data(), ws.fo.size(), ws.so.data());
    out_conv.fwd(ws.so, ws.out);
    out = ws.out;
}

void UNetCore::bwd(const UNetWs& wsc, const Tensor& dout, float* gbuf,
                   std::vector<float>* d_tfeat, std::vector<float>* d_cond) const {
    auto& ws = const_cast<UNetWs&>(wsc);
    const int h = ws.x_in.h, w = ws.x_in.w;
    const int w1 = cfg_.w1(), w2 = cfg_.w2(), w3 = cfg_.w3();

    ws.dsemb.assign(cfg_.emb_dim, 0.f);

    // output head
    out_conv.bwd(ws.so, dout, &ws.da, gbuf);
    ws.db.ensure(w1, h, w);
    kern::silu_back(ws.fo.data(), ws.da.data(), ws.da.size(), ws.db.data());
    aff_out.bwd(ws.go, ws.db, ws.da, gbuf);
    gn_out.bwd(ws.r5, ws.st_out, ws.da, ws.db);

    // decoder level 1
    rbu1.bwd(ws.cat1, ws.semb, ws.wrbu1, ws.db, ws.da, ws.dsemb, gbuf);
    Tensor d_r1_skip;
    split_grad(ws.da, w1, ws.db, d_r1_skip);
    up1.bwd(ws.us1, ws.db, &ws.da, gbuf);
    ws.dc.ensure(w2, h / 2, w / 2);
    kern::upsample2_back(ws.da.data(), w2, h / 2, w / 2, ws.dc.data());

    // decoder level 2
    rbu2.bwd(ws.cat2, ws.semb, ws.wrbu2, ws.dc, ws.da, ws.dsemb, gbuf);
    Tensor d_r2_skip;
    split_grad(ws.da, w2, ws.db, d_r2_skip);
    up2.bwd(ws.us2, ws.db, &ws.da, gbuf);
    ws.dc.ensure(w3, h / 4, w / 4);
    kern::upsample2_back(ws.da.data(), w3, h / 4, w / 4, ws.dc.data());

    // bottleneck
    rb3b.bwd(ws.b1, ws.semb, ws.wrb3b, ws.dc, ws.da, ws.dsemb, gbuf);
    rb3a.bwd(ws.d2c, ws.semb, ws.wrb3a, ws.da, ws.db, ws.dsemb, gbuf);
    down2.bwd(ws.p2, ws.db, &ws.da, gbuf);
    ws.db.ensure(w2, h / 2, w / 2);
    kern::avgpool2_back(ws.da.data(), w2, h / 2, w / 2, ws.db.data());
    add_into(ws.db, d_r2_skip);

    // encoder level 2
    rb2.bwd(ws.d1c, ws.semb, ws.wrb2, ws.db, ws.da, ws.dsemb, gbuf);
    down1.bwd(ws.p1, ws.da, &ws.db, gbuf);
    ws.da.ensure(w1, h, w);
    kern::avgpool2_back(ws.db.data(), w1, h, w, ws.da.data());
    add_into(ws.da, d_r1_skip);

    // encoder level 1
    rb1.bwd(ws.h0, ws.semb, ws.wrb1, ws.da, ws.db, ws.dsemb, gbuf);
    in_conv.bwd(ws.x_in, ws.db, nullptr, gbuf);

    // embedding pipeline
    ws.dv1.resize(cfg_.emb_dim);
    kern::silu_back(ws.emb.data(), ws.dsemb.data(), ws.dsemb.size(), ws.dv1.data());
    if (d_cond)
        for (int i = 0; i < cfg_.emb_dim; ++i) (*d_cond)[i] += ws.dv1[i];
    t_mlp2.bwd(ws.t1s, ws.dv1, &ws.dv2, gbuf);
    ws.dv1.resize(cfg_.emb_dim);
    kern::silu_back(ws.t1.data(), ws.dv2.data(), ws.dv2.size(), ws.dv1.data());
    if (d_tfeat) {
        std::vector<float> dt;
        t_mlp1.bwd(ws.tfeat, ws.dv1, &dt, gbuf);
        for (int i = 0; i < cfg_.tfeat_dim; ++i) (*d_tfeat)[i] += dt[i];
    } else {
        t_mlp1.bwd(ws.tfeat, ws.dv1, nullptr, gbuf);
    }
}

}  // namespace ddslab::nn
