#include "sorn/skimming.hpp"

#include <stdexcept>

namespace sorn::model {

using diff::Graph;
using diff::Tensor;
using diff::Val;

Tensor extend_windows(const Tensor& x, int patch_size) {
    if (patch_size < 1) throw std::invalid_argument("extend_windows: patch_size must be >= 1");
    if (x.rank() != 2) throw std::invalid_argument("extend_windows: expected T x D input");
    const std::size_t slots = x.rows(), dims = x.cols();
    const std::size_t w = static_cast<std::size_t>(patch_size) + 1;
    Tensor out({slots, w, dims}, 0.0);
    for (std::size_t t = 0; t < slots; ++t)
        for (std::size_t i = 0; i < w; ++i) {
            const std::ptrdiff_t src =
                static_cast<std::ptrdiff_t>(t) - patch_size + static_cast<std::ptrdiff_t>(i);
            const std::size_t clamped = src < 0 ? 0 : static_cast<std::size_t>(src);
            for (std::size_t d = 0; d < dims; ++d) out.at(t, i, d) = x.at(clamped, d);
        }
    return out;
}

Tensor shift_matrix(std::size_t slots, std::size_t shift) {
    Tensor s = Tensor::matrix(slots, slots, 0.0);
    for (std::size_t t = 0; t < slots; ++t) {
        const std::size_t src = t >= shift ? t - shift : 0;
        s.at(t, src) = 1.0;
    }
    return s;
}

AttentionWorkspace make_workspace(std::size_t slots, int patch_size) {
    if (patch_size < 1) throw std::invalid_argument("make_workspace: patch_size must be >= 1");
    AttentionWorkspace ws;
    ws.slots = slots;
    ws.patch_size = patch_size;
    for (int m = 0; m < patch_size; ++m)
        ws.shifts.push_back(shift_matrix(slots, static_cast<std::size_t>(patch_size - m)));
    for (int m = 0; m < patch_size; ++m) {
        Tensor basis = Tensor::matrix(1, static_cast<std::size_t>(patch_size), 0.0);
        basis.at(0, static_cast<std::size_t>(m)) = 1.0;
        ws.patch_basis.push_back(std::move(basis));
    }
    ws.dist_sq = Tensor::matrix(slots, slots, 0.0);
    for (std::size_t i = 0; i < slots; ++i)
        for (std::size_t j = 0; j < slots; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            ws.dist_sq.at(i, j) = d * d;
        }
    ws.ones_col = Tensor::vector(slots, 1.0);
    for (std::size_t t = 0; t < slots; ++t) {
        Tensor pick = Tensor::matrix(1, slots, 0.0);
        pick.at(0, t) = 1.0;
        ws.row_picks.push_back(std::move(pick));
    }
    return ws;
}

Val build_gate(Graph& g, const AttentionWorkspace& ws, Val sigma) {
    Val dist_sq = g.constant(ws.dist_sq);
    Val ones = g.constant(Tensor::matrix(ws.slots, ws.slots, 1.0));
    // G = 1 - exp(-(i-j)^2 / sigma^2); the zero diagonal falls out exactly.
    return g.sub(ones, g.exp(g.neg(g.div_scalar(dist_sq, g.square(sigma)))));
}

Tensor ungated_matrix(std::size_t slots) {
    Tensor ones = Tensor::matrix(slots, slots, 1.0);
    for (std::size_t i = 0; i < slots; ++i) ones.at(i, i) = 0.0;
    return ones;
}

LayerForward layer_forward(Graph& g, const std::vector<Val>& cols, const AttentionWorkspace& ws,
                           Val gate) {
    if (cols.empty()) throw std::invalid_argument("layer_forward: no dimensions");
    if (g.value(cols[0]).rows() != ws.slots)
        throw std::invalid_argument("layer_forward: workspace size mismatch");
    const int patch = ws.patch_size;

    std::vector<Val> shifts(static_cast<std::size_t>(patch));
    std::vector<Val> basis(static_cast<std::size_t>(patch));
    for (int m = 0; m < patch; ++m) {
        shifts[static_cast<std::size_t>(m)] = g.constant(ws.shifts[static_cast<std::size_t>(m)]);
        basis[static_cast<std::size_t>(m)] = g.constant(ws.patch_basis[static_cast<std::size_t>(m)]);
    }

    LayerForward out;
    for (const Val& col : cols) {
        // Patch matrix Q: row t holds the first p slots of window t, so
        // A = q k^T with q = k = Q.
        Val patches;
        for (int m = 0; m < patch; ++m) {
            Val shifted = g.matmul(shifts[static_cast<std::size_t>(m)], col);
            Val placed = g.matmul(shifted, basis[static_cast<std::size_t>(m)]);
            patches = m == 0 ? placed : g.add(patches, placed);
        }
        Val logits = g.matmul(patches, g.transpose(patches));
        Val attn = g.row_softmax(g.mul(logits, gate));
        out.recon_cols.push_back(g.matmul(attn, col));  // values are the window-final slots
        out.logits.push_back(logits);
    }
    return out;
}

StackForward stack_forward(Graph& g, const std::vector<Val>& cols, std::vector<SkimmingLayer>& layers,
                           bool gate_off, const AttentionWorkspace& ws) {
    if (layers.empty()) throw std::invalid_argument("stack_forward: no layers");
    const std::size_t dims = cols.size();

    StackForward out;
    std::vector<Val> current = cols;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        out.residual_cols.push_back(current);
        Val gate = gate_off ? g.constant(ungated_matrix(ws.slots))
                            : build_gate(g, ws, g.param(layers[l].sigma));
        LayerForward fwd = layer_forward(g, current, ws, gate);
        if (l == 0) out.logits0 = fwd.logits;
        out.layer_cols.push_back(fwd.recon_cols);
        std::vector<Val> next(dims);
        for (std::size_t d = 0; d < dims; ++d) next[d] = g.sub(current[d], fwd.recon_cols[d]);
        current = std::move(next);
    }

    out.recon_cols.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        Val acc = out.layer_cols[0][d];
        for (std::size_t l = 1; l < layers.size(); ++l) acc = g.add(acc, out.layer_cols[l][d]);
        out.recon_cols[d] = acc;
    }
    return out;
}

}  // namespace sorn::model
