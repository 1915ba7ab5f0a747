#pragma once

#include <vector>

#include "sorn/graph.hpp"
#include "sorn/tensor.hpp"

namespace sorn::model {

/// One skimming attention layer: raw-patch attention with a learnable gate
/// curve G[i,j] = 1 - exp(-(i-j)^2 / sigma^2) that suppresses near-diagonal
/// logits. G[i,i] is exactly 0, so the self logit never passes the gate.
struct SkimmingLayer {
    int patch_size = 2;
    diff::Parameter sigma;
};

/// Sliding-window extension with left edge-replication padding: window t
/// holds slots [t-p, t] of x, so the result is T x (p+1) x D.
diff::Tensor extend_windows(const diff::Tensor& x, int patch_size);

/// Constant selection matrix S with S[t, max(0, t-shift)] = 1. Applying it to
/// a column reproduces the edge-replicated sliding-window slices.
diff::Tensor shift_matrix(std::size_t slots, std::size_t shift);

/// Constant tensors shared by every window graph of the same shape: shift
/// matrices, the squared-distance grid of the gate, basis rows and row
/// selectors. Built once per training run and reused across windows.
struct AttentionWorkspace {
    std::size_t slots = 0;
    int patch_size = 0;
    std::vector<diff::Tensor> shifts;      // patch_size matrices, T x T
    std::vector<diff::Tensor> patch_basis; // 1 x p one-hot rows
    diff::Tensor dist_sq;                  // T x T (i-j)^2
    diff::Tensor ones_col;                 // T x 1
    std::vector<diff::Tensor> row_picks;   // T selector rows, 1 x T
};

AttentionWorkspace make_workspace(std::size_t slots, int patch_size);

/// Gate curve node from a sigma parameter; diagonal is exactly zero.
diff::Val build_gate(diff::Graph& g, const AttentionWorkspace& ws, diff::Val sigma);

/// All-ones gate except the structural zero diagonal (the standard-attention
/// ablation keeps the masked-reconstruction task).
diff::Tensor ungated_matrix(std::size_t slots);

struct LayerForward {
    std::vector<diff::Val> recon_cols;  // per-dimension T x 1 reconstructions
    std::vector<diff::Val> logits;      // per-dimension T x T pre-gate logits
};

/// Attention over one dimension set: queries/keys are the first p slots of
/// each window, values the final slot. `gate` multiplies the logits before
/// the row softmax.
LayerForward layer_forward(diff::Graph& g, const std::vector<diff::Val>& cols,
                           const AttentionWorkspace& ws, diff::Val gate);

struct StackForward {
    std::vector<diff::Val> recon_cols;               // summed reconstruction, per dimension
    std::vector<std::vector<diff::Val>> layer_cols;  // [layer][dim] outputs
    std::vector<diff::Val> logits0;                  // layer-0 per-dimension pre-gate logits
    std::vector<std::vector<diff::Val>> residual_cols;  // [layer][dim] inputs x_l
};

/// Runs L layers with residual subtraction x_{l+1} = x_l - x~_l and returns
/// the summed reconstruction plus layer-0 logits.
StackForward stack_forward(diff::Graph& g, const std::vector<diff::Val>& cols,
                           std::vector<SkimmingLayer>& layers, bool gate_off,
                           const AttentionWorkspace& ws);

}  // namespace sorn::model
