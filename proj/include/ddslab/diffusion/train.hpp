#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ddslab/diffusion/denoiser.hpp"
#include "ddslab/diffusion/schedule.hpp"
#include "ddslab/synthdata/synthdata.hpp"

namespace ddslab::diff {

struct TrainConfig {
    int steps = 4000;
    int batch = 16;
    double lr = 2e-3;
    double p_uncond = 0.1;      // null-token dropout rate
    double t_min = 0.02, t_max = 0.98;
    double val_fraction = 0.1;  // held out from the end of the dataset
    int val_every = 200;        // 0 disables periodic validation
    int val_max_items = 256;
    std::uint64_t seed = 0;

    nn::UNetConfig unet;
};

struct TrainLogRow {
    int step;
    double loss;
    double val_loss;  // NaN when not evaluated at this step
    double lr;
};

struct TrainResult {
    std::shared_ptr<Denoiser> model;
    std::vector<TrainLogRow> log;
    double final_val_loss = 0;
    std::uint64_t val_seed = 0;
    int val_count = 0;
    std::string rng_state;
};

// Minimizes w(t) * mean((eps_hat - eps)^2) over the dataset with Adam,
// dropping the caption to the null token with probability p_uncond.
// Throws on non-finite loss.
TrainResult train_denoiser(const synth::Dataset& dataset, const NoiseSchedule& sched,
                           const TrainConfig& cfg,
                           const std::function<void(const TrainLogRow&)>& on_log = {});

// Mean validation loss over the held-out slice with draws fixed by val_seed;
// reproduces the value recorded at save time.
double validation_loss(const Denoiser& model, const NoiseSchedule& sched,
                       const synth::Dataset& dataset, const TrainConfig& cfg,
                       std::uint64_t val_seed);

}  // namespace ddslab::diff
