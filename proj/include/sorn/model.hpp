#pragma once

#include <cstdint>
#include <vector>

#include "sorn/graph.hpp"
#include "sorn/interval_scheme.hpp"
#include "sorn/neural_ot.hpp"
#include "sorn/skimming.hpp"
#include "sorn/tensor.hpp"

namespace sorn::model {

struct ModelFlags {
    bool disable_skimming = false;  // single standard-attention layer, gate all-ones off-diagonal
    bool disable_ot = false;        // x_dot = x~, transport-cost term dropped
    bool disable_picky = false;     // uniform slot weights (MSE-style)
};

/// All trainable state of the detector: L gate widths, the picky gate width,
/// and the transport logits.
struct SornModel {
    std::vector<SkimmingLayer> layers;
    diff::Parameter sigma_hat;
    diff::Parameter transport_logits;  // D x D
    std::size_t dims = 0;

    std::vector<diff::Parameter*> parameters(const ModelFlags& flags);
};

/// Fresh model: sigma = sigma_init per layer, sigma_hat likewise, transport
/// logits = kappa * identity (near-identity plan).
SornModel make_model(std::size_t dims, int layers, int patch_size, double sigma_init,
                     double sigma_hat_init, double ot_init_kappa = 5.0);

/// One window worth of forward graph. `window` rows are the model input
/// (proportions for detector use; any T x D matrix is accepted).
struct WindowGraph {
    diff::Val input;           // T x D leaf
    diff::Val recon;           // x~, summed skimming output
    diff::Val recon_adjusted;  // x_dot after the transport layer
    diff::Val trust;           // T x 1 slot weights, sums to 1
    diff::Val loss;            // scalar picky loss (valid when with_loss)
    std::vector<diff::Val> logits0;
    std::vector<std::vector<diff::Val>> layer_cols;  // [layer][dim]
};

/// `workspace` must match the window length and patch size; pass nullptr to
/// build a throwaway one.
WindowGraph build_window_graph(diff::Graph& g, const diff::Tensor& window, SornModel& model,
                               const ModelFlags& flags, const diff::Tensor& cost, double lambda,
                               bool with_loss, const AttentionWorkspace* workspace = nullptr);

/// Trust weights: softmax over slots of the row sums of the
/// dimension-averaged layer-0 logits gated by the picky gate.
diff::Val build_trust_weights(diff::Graph& g, const std::vector<diff::Val>& logits0,
                              diff::Val sigma_hat, const AttentionWorkspace& ws);

/// Reconstructs a whole series with a sliding window centered on each slot
/// (clamped at the edges); each slot takes its own row of the adjusted
/// reconstruction. Optionally collects per-layer outputs.
diff::Tensor reconstruct_matrix(SornModel& model, const diff::Tensor& x, const ModelFlags& flags,
                                int window_length, std::vector<diff::Tensor>* layer_outputs = nullptr);

}  // namespace sorn::model
