#include "sorn/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sorn::model {

using diff::Graph;
using diff::Parameter;
using diff::Tensor;
using diff::Val;

std::vector<Parameter*> SornModel::parameters(const ModelFlags& flags) {
    std::vector<Parameter*> out;
    if (!flags.disable_skimming)
        for (auto& layer : layers) out.push_back(&layer.sigma);
    if (!flags.disable_picky) out.push_back(&sigma_hat);
    if (!flags.disable_ot) out.push_back(&transport_logits);
    return out;
}

SornModel make_model(std::size_t dims, int layers, int patch_size, double sigma_init,
                     double sigma_hat_init, double ot_init_kappa) {
    if (layers < 1) throw std::invalid_argument("make_model: need at least one layer");
    if (patch_size < 1) throw std::invalid_argument("make_model: patch_size must be >= 1");
    SornModel m;
    m.dims = dims;
    for (int l = 0; l < layers; ++l) {
        SkimmingLayer layer;
        layer.patch_size = patch_size;
        layer.sigma = Parameter("sigma_" + std::to_string(l), Tensor::scalar(sigma_init));
        m.layers.push_back(std::move(layer));
    }
    m.sigma_hat = Parameter("sigma_hat", Tensor::scalar(sigma_hat_init));
    Tensor logits = Tensor::matrix(dims, dims, 0.0);
    for (std::size_t i = 0; i < dims; ++i) logits.at(i, i) = ot_init_kappa;
    m.transport_logits = Parameter("transport_logits", std::move(logits));
    return m;
}

Val build_trust_weights(Graph& g, const std::vector<Val>& logits0, Val sigma_hat,
                        const AttentionWorkspace& ws) {
    const std::size_t dims = logits0.size();
    Val avg = logits0[0];
    for (std::size_t d = 1; d < dims; ++d) avg = g.add(avg, logits0[d]);
    avg = g.scale(avg, 1.0 / static_cast<double>(dims));
    Val gate = build_gate(g, ws, sigma_hat);
    Val row_sums = g.matmul(g.mul(avg, gate), g.constant(ws.ones_col));
    return g.col_softmax(row_sums);  // T x 1
}

WindowGraph build_window_graph(Graph& g, const Tensor& window, SornModel& model,
                               const ModelFlags& flags, const Tensor& cost, double lambda,
                               bool with_loss, const AttentionWorkspace* workspace) {
    if (window.rank() != 2) throw std::invalid_argument("build_window_graph: window must be T x D");
    const std::size_t slots = window.rows(), dims = window.cols();
    if (dims != model.dims)
        throw std::invalid_argument("build_window_graph: window dims " + std::to_string(dims) +
                                    " != model dims " + std::to_string(model.dims));
    AttentionWorkspace local;
    if (!workspace) {
        local = make_workspace(slots, model.layers[0].patch_size);
        workspace = &local;
    }
    const AttentionWorkspace& ws = *workspace;
    if (ws.slots != slots || ws.patch_size != model.layers[0].patch_size)
        throw std::invalid_argument("build_window_graph: workspace does not match window/patch");

    WindowGraph out;
    out.input = g.constant(window);

    // Per-dimension column leaves.
    std::vector<Val> cols(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        Tensor col = Tensor::vector(slots, 0.0);
        for (std::size_t t = 0; t < slots; ++t) col[t] = window.at(t, d);
        cols[d] = g.constant(std::move(col));
    }

    std::vector<SkimmingLayer>* layers = &model.layers;
    std::vector<SkimmingLayer> single;
    if (flags.disable_skimming) {
        single.push_back(model.layers[0]);
        layers = &single;
    }
    StackForward stack = stack_forward(g, cols, *layers, flags.disable_skimming, ws);
    out.logits0 = stack.logits0;
    out.layer_cols = stack.layer_cols;

    // Column-stack the reconstruction into T x D.
    Val recon;
    for (std::size_t d = 0; d < dims; ++d) {
        Tensor basis = Tensor::matrix(1, dims, 0.0);
        basis.at(0, d) = 1.0;
        Val placed = g.matmul(stack.recon_cols[d], g.constant(std::move(basis)));
        recon = d == 0 ? placed : g.add(recon, placed);
    }
    out.recon = recon;

    Val plan;
    if (flags.disable_ot) {
        out.recon_adjusted = recon;
    } else {
        plan = build_plan(g, g.param(model.transport_logits));
        out.recon_adjusted = build_transport(g, plan, recon);
    }

    if (flags.disable_picky) {
        out.trust = g.constant(Tensor::vector(slots, 1.0 / static_cast<double>(slots)));
    } else {
        out.trust = build_trust_weights(g, stack.logits0, g.param(model.sigma_hat), ws);
    }

    if (with_loss) {
        Val diff = g.sub(out.recon_adjusted, out.input);
        Val acc;
        for (std::size_t t = 0; t < slots; ++t) {
            Val row_sel = g.constant(ws.row_picks[t]);
            Val norm = g.l2norm(g.matmul(row_sel, diff));
            Val weighted = g.mul(g.matmul(row_sel, out.trust), norm);
            acc = t == 0 ? weighted : g.add(acc, weighted);
        }
        if (!flags.disable_ot && lambda != 0.0) {
            // sum_t trust[t] * <plan * x~[t], C> folded into one expression:
            // sum(plan (.) C (.) rows_of(x~^T trust)).
            Val weighted_mass = g.matmul(g.transpose(out.recon), out.trust);  // D x 1
            Val cost_leaf = g.constant(cost);
            Val pairing = g.sum(g.mul(g.mul(plan, cost_leaf), g.broadcast_rows(weighted_mass, dims)));
            acc = g.add(acc, g.scale(pairing, lambda));
        }
        out.loss = acc;
    }
    return out;
}

Tensor reconstruct_matrix(SornModel& model, const Tensor& x, const ModelFlags& flags,
                          int window_length, std::vector<Tensor>* layer_outputs) {
    const std::size_t slots = x.rows(), dims = x.cols();
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window_length), slots);
    Tensor cost = Tensor::matrix(dims, dims, 0.0);  // loss not built; placeholder
    Tensor out = Tensor::matrix(slots, dims, 0.0);
    const AttentionWorkspace ws = make_workspace(w, model.layers[0].patch_size);

    const std::size_t n_layers = flags.disable_skimming ? 1 : model.layers.size();
    if (layer_outputs) layer_outputs->assign(n_layers, Tensor::matrix(slots, dims, 0.0));

    std::size_t cached_start = slots;  // sentinel
    Tensor cached_recon;
    std::vector<Tensor> cached_layers;

    for (std::size_t t = 0; t < slots; ++t) {
        std::size_t start = t >= w / 2 ? t - w / 2 : 0;
        if (start + w > slots) start = slots - w;
        if (start != cached_start) {
            Tensor window = Tensor::matrix(w, dims, 0.0);
            for (std::size_t i = 0; i < w; ++i)
                for (std::size_t d = 0; d < dims; ++d) window.at(i, d) = x.at(start + i, d);
            diff::Graph g;
            WindowGraph wg = build_window_graph(g, window, model, flags, cost, 0.0, false, &ws);
            cached_recon = g.value(wg.recon_adjusted);
            if (layer_outputs) {
                cached_layers.assign(n_layers, Tensor::matrix(w, dims, 0.0));
                for (std::size_t l = 0; l < n_layers; ++l)
                    for (std::size_t d = 0; d < dims; ++d) {
                        const Tensor& col = g.value(wg.layer_cols[l][d]);
                        for (std::size_t i = 0; i < w; ++i) cached_layers[l].at(i, d) = col[i];
                    }
            }
            cached_start = start;
        }
        const std::size_t pos = t - cached_start;
        for (std::size_t d = 0; d < dims; ++d) {
            out.at(t, d) = cached_recon.at(pos, d);
            if (layer_outputs)
                for (std::size_t l = 0; l < n_layers; ++l)
                    (*layer_outputs)[l].at(t, d) = cached_layers[l].at(pos, d);
        }
    }
    return out;
}

}  // namespace sorn::model
