#include "ddslab/diffusion/train.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ddslab/nn/optim.hpp"

namespace ddslab::diff {

namespace {

struct ValSlot {
    int item;
    double t;
    Tensor eps;
    synth::Caption y;
};

// Fixed evaluation draws so the loss is a pure function of (model, dataset).
std::vector<ValSlot> make_val_slots(const synth::Dataset& ds, const TrainConfig& cfg,
                                    std::uint64_t val_seed, bool null_cond = false) {
    const int n = int(ds.items.size());
    const int n_val = std::min(cfg.val_max_items, std::max(1, int(n * cfg.val_fraction)));
    const int first = n - n_val;
    std::vector<ValSlot> slots(n_val);
    for (int i = 0; i < n_val; ++i) {
        Rng rng(derive_seed(val_seed, std::uint64_t(i), 0x7a1));
        ValSlot& s = slots[i];
        s.item = first + i;
        s.t = rng.uniform(cfg.t_min, cfg.t_max);
        const auto& img = ds.items[s.item].image;
        s.eps.ensure(img.c, img.h, img.w);
        rng.fill_normal(s.eps.v);
        s.y = null_cond ? synth::Caption::null() : ds.items[s.item].spec.caption();
    }
    return slots;
}

double eval_slots(const Denoiser& model, const NoiseSchedule& sched,
                  const synth::Dataset& ds, const std::vector<ValSlot>& slots) {
    std::vector<double> losses(slots.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(slots.size()); ++i) {
        const ValSlot& s = slots[i];
        Tensor z_t, pred;
        add_noise_into(ds.items[s.item].image, s.eps, s.t, sched, z_t);
        model.predict(z_t, s.y, s.t, pred);
        losses[i] = sched.w(s.t) * mean_sq_diff(pred, s.eps);
    }
    double total = 0;
    for (double l : losses) total += l;  // fixed order
    return total / double(slots.size());
}

}  // namespace

double validation_loss(const Denoiser& model, const NoiseSchedule& sched,
                       const synth::Dataset& dataset, const TrainConfig& cfg,
                       std::uint64_t val_seed) {
    return eval_slots(model, sched, dataset, make_val_slots(dataset, cfg, val_seed));
}

TrainResult train_denoiser(const synth::Dataset& dataset, const NoiseSchedule& sched,
                           const TrainConfig& cfg,
                           const std::function<void(const TrainLogRow&)>& on_log) {
    if (dataset.items.empty()) throw std::invalid_argument("training dataset is empty");

    TrainResult res;
    res.model = std::make_shared<Denoiser>();
    res.model->build(cfg.unet, derive_seed(cfg.seed, 0x11));
    Denoiser& model = *res.model;

    const int n = int(dataset.items.size());
    const int n_val = n > 1 ? std::min(cfg.val_max_items, std::max(1, int(n * cfg.val_fraction))) : 0;
    const int n_train = std::max(1, n - n_val);

    res.val_seed = derive_seed(cfg.seed, 0x22);
    const auto val_slots = n_val > 0 ? make_val_slots(dataset, cfg, res.val_seed)
                                     : std::vector<ValSlot>{};

    nn::ParamSet& ps = model.params();
    nn::Adam opt;
    opt.init(ps.total);
    std::vector<float> flat(ps.total);
    ps.gather(flat.data());

    std::vector<std::vector<float>> sample_grads(cfg.batch);
    std::vector<float> grad(ps.total);
    std::vector<double> sample_loss(cfg.batch);

    const std::uint64_t draw_seed = derive_seed(cfg.seed, 0x33);
    Rng train_rng(derive_seed(cfg.seed, 0x44));  // recorded in the checkpoint

    for (int step = 0; step < cfg.steps; ++step) {
#pragma omp parallel for schedule(static)
        for (int b = 0; b < cfg.batch; ++b) {
            static thread_local nn::UNetWs ws;
            auto& g = sample_grads[b];
            g.assign(ps.total, 0.f);

            Rng rng(derive_seed(draw_seed, std::uint64_t(step), std::uint64_t(b)));
            const int item = int(rng.randint(std::uint64_t(n_train)));
            const double t = rng.uniform(cfg.t_min, cfg.t_max);
            const auto& img = dataset.items[item].image;
            Tensor eps(img.c, img.h, img.w);
            rng.fill_normal(eps.v);
            synth::Caption y = dataset.items[item].spec.caption();
            if (rng.uniform() < cfg.p_uncond) y = synth::Caption::null();

            Tensor z_t, pred;
            add_noise_into(img, eps, t, sched, z_t);
            model.fwd_train(z_t, y, t, ws, pred);

            const double wt = sched.w(t);
            const float scale = float(2.0 * wt / double(pred.size()));
            Tensor dout(pred.c, pred.h, pred.w);
            double loss = 0;
            for (std::size_t i = 0; i < pred.size(); ++i) {
                const double d = double(pred.v[i]) - eps.v[i];
                loss += d * d;
                dout.v[i] = scale * float(d);
            }
            sample_loss[b] = wt * loss / double(pred.size());
            model.bwd_train(y, ws, dout, g.data());
        }

        double loss = 0;
        for (int b = 0; b < cfg.batch; ++b) loss += sample_loss[b];
        loss /= cfg.batch;
        if (!std::isfinite(loss))
            throw std::runtime_error("denoiser training diverged (non-finite loss at step " +
                                     std::to_string(step) + ")");

        // deterministic reduction: per-index sum in sample order
        const float inv_b = 1.f / float(cfg.batch);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(ps.total); ++i) {
            float s = 0.f;
            for (int b = 0; b < cfg.batch; ++b) s += sample_grads[b][i];
            grad[i] = s * inv_b;
        }

        opt.step(flat.data(), grad.data(), ps.total, cfg.lr);
        ps.scatter(flat.data());

        TrainLogRow row{step, loss, std::numeric_limits<double>::quiet_NaN(), cfg.lr};
        const bool do_val =
            n_val > 0 && cfg.val_every > 0 &&
            (step % cfg.val_every == cfg.val_every - 1 || step == cfg.steps - 1);
        if (do_val) row.val_loss = eval_slots(model, sched, dataset, val_slots);
        res.log.push_back(row);
        if (on_log) on_log(row);
    }

    res.final_val_loss = n_val > 0 ? eval_slots(model, sched, dataset, val_slots) : 0.0;
    res.val_count = n_val;
    res.rng_state = train_rng.state();
    return res;
}

}  // namespace ddslab::diff
