#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sorn/model.hpp"
#include "sorn/series.hpp"

namespace sorn::train {

struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 100;
    int epochs = 50;
    int window_length = 20;
    int skimming_layers = 2;
    int patch_size = 2;
    double lambda = 0.5;
    std::uint64_t seed = 1;
    bool disable_skimming = false;
    bool disable_ot = false;
    bool disable_picky = false;
    std::string threshold_policy = "quantile:0.99";
    double sigma_init_factor = 2.0;  // sigma starts at factor * patch_size
    double sigma_hat_init = 0.0;     // 0 -> factor * patch_size

    void validate() const;
    model::ModelFlags flags() const { return {disable_skimming, disable_ot, disable_picky}; }
    double sigma_init() const { return sigma_init_factor * patch_size; }
    double sigma_hat_start() const { return sigma_hat_init > 0.0 ? sigma_hat_init : sigma_init(); }
};

struct ModelCheckpoint {
    data::IntervalScheme scheme;
    TrainConfig config;
    model::SornModel model;
    std::vector<double> loss_trace;  // per-epoch mean batch loss
    int format_version = 1;
};

/// Adaptive moment estimation over a flat list of parameters.
class AdamOptimizer {
public:
    AdamOptimizer(std::vector<diff::Parameter*> params, double learning_rate);
    void step();
    void zero_grad();

private:
    std::vector<diff::Parameter*> params_;
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
};

/// Trains on a normalized series: epochs x batches of randomly sampled
/// contiguous windows, each running the full stack -> transport -> trust ->
/// picky-loss graph with one optimizer step per batch. Windows touching a
/// missing-flagged slot are excluded from sampling. Deterministic in
/// (seed, config, data). Aborts on a non-finite loss.
ModelCheckpoint train(const data::DistributionSeries& normalized, const data::IntervalScheme& scheme,
                      const TrainConfig& config);

/// Same loop over a raw T x D matrix (used by the reconstruction harnesses).
ModelCheckpoint train_matrix(const diff::Tensor& x, const data::IntervalScheme& scheme,
                             const TrainConfig& config);

/// Centered sliding-window reconstruction of a normalized series.
diff::Tensor reconstruct_series(ModelCheckpoint& ck, const data::DistributionSeries& normalized);

// Checkpoint JSON: {scheme, config, sigma:[...], sigma_hat, P_logits:[[...]],
// loss_trace:[...], format_version}. Doubles round-trip exactly.
void save_checkpoint(const std::string& path, const ModelCheckpoint& ck);
ModelCheckpoint load_checkpoint(const std::string& path);

}  // namespace sorn::train
