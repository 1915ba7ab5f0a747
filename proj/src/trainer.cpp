#include "sorn/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "sorn/neural_ot.hpp"

namespace sorn::train {

using diff::Graph;
using diff::Parameter;
using diff::Tensor;
using diff::Val;

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (window_length < 1) throw std::invalid_argument("config: window_length must be >= 1");
    if (skimming_layers < 1) throw std::invalid_argument("config: skimming_layers must be >= 1");
    if (patch_size < 1) throw std::invalid_argument("config: patch_size must be >= 1");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("config: lambda must be in [0,1]");
    if (!(sigma_init_factor > 0.0)) throw std::invalid_argument("config: sigma_init_factor must be > 0");
}

AdamOptimizer::AdamOptimizer(std::vector<Parameter*> params, double learning_rate)
    : params_(std::move(params)), lr_(learning_rate) {
    for (Parameter* p : params_) {
        m_.emplace_back(p->value.size(), 0.0);
        v_.emplace_back(p->value.size(), 0.0);
    }
}

void AdamOptimizer::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter* p = params_[i];
        for (std::size_t k = 0; k < p->value.size(); ++k) {
            const double g = p->grad[k];
            m_[i][k] = beta1_ * m_[i][k] + (1.0 - beta1_) * g;
            v_[i][k] = beta2_ * v_[i][k] + (1.0 - beta2_) * g * g;
            const double mhat = m_[i][k] / bc1;
            const double vhat = v_[i][k] / bc2;
            p->value[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void AdamOptimizer::zero_grad() {
    for (Parameter* p : params_) p->reset_grad();
}

namespace {

ModelCheckpoint train_impl(const Tensor& x, const std::vector<std::uint8_t>& missing,
                           const data::IntervalScheme& scheme, const TrainConfig& config) {
    config.validate();
    const std::size_t slots = x.rows(), dims = x.cols();
    const std::size_t w = static_cast<std::size_t>(config.window_length);
    if (slots < w)
        throw std::invalid_argument("train: series length " + std::to_string(slots) +
                                    " shorter than window " + std::to_string(w));

    ModelCheckpoint ck;
    ck.scheme = scheme;
    ck.config = config;
    ck.model = model::make_model(dims, config.skimming_layers, config.patch_size, config.sigma_init(),
                                 config.sigma_hat_start());
    const model::ModelFlags flags = config.flags();
    const Tensor cost = model::cost_matrix(scheme);

    // Valid window starts: whole window free of missing-flagged slots.
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + w <= slots; ++s) {
        bool ok = true;
        if (missing.size() == slots)
            for (std::size_t i = 0; i < w && ok; ++i) ok = missing[s + i] == 0;
        if (ok) starts.push_back(s);
    }
    if (starts.empty()) throw std::invalid_argument("train: no complete window without missing slots");

    AdamOptimizer opt(ck.model.parameters(flags), config.learning_rate);
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);
    const model::AttentionWorkspace ws = model::make_workspace(w, config.patch_size);

    const std::size_t batches_per_epoch =
        std::max<std::size_t>(1, starts.size() / static_cast<std::size_t>(config.batch_size));
    const double inv_batch = 1.0 / static_cast<double>(config.batch_size);

    double best_loss = std::numeric_limits<double>::infinity();
    int stall = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            opt.zero_grad();
            double batch_loss = 0.0;
            for (int k = 0; k < config.batch_size; ++k) {
                const std::size_t s = starts[pick(rng)];
                Tensor window = Tensor::matrix(w, dims, 0.0);
                for (std::size_t i = 0; i < w; ++i)
                    for (std::size_t d = 0; d < dims; ++d) window.at(i, d) = x.at(s + i, d);
                Graph g;
                model::WindowGraph wg =
                    model::build_window_graph(g, window, ck.model, flags, cost, config.lambda, true, &ws);
                batch_loss += g.scalar_value(wg.loss);
                g.backward(g.scale(wg.loss, inv_batch));
            }
            batch_loss *= inv_batch;
            if (!std::isfinite(batch_loss))
                throw std::runtime_error("train: non-finite loss in epoch " + std::to_string(epoch) +
                                         ", batch " + std::to_string(b));
            opt.step();
            epoch_loss += batch_loss;
        }
        epoch_loss /= static_cast<double>(batches_per_epoch);
        ck.loss_trace.push_back(epoch_loss);

        if (best_loss - epoch_loss < 1e-5) {
            if (++stall >= 5) break;
        } else {
            stall = 0;
        }
        best_loss = std::min(best_loss, epoch_loss);
    }
    return ck;
}

}  // namespace

ModelCheckpoint train(const data::DistributionSeries& normalized, const data::IntervalScheme& scheme,
                      const TrainConfig& config) {
    if (!normalized.normalized) throw std::invalid_argument("train: series must be normalized");
    return train_impl(normalized.proportions, normalized.missing, scheme, config);
}

ModelCheckpoint train_matrix(const Tensor& x, const data::IntervalScheme& scheme,
                             const TrainConfig& config) {
    return train_impl(x, {}, scheme, config);
}

Tensor reconstruct_series(ModelCheckpoint& ck, const data::DistributionSeries& normalized) {
    if (!normalized.normalized) throw std::invalid_argument("reconstruct: series must be normalized");
    const model::ModelFlags flags = ck.config.flags();
    return model::reconstruct_matrix(ck.model, normalized.proportions, flags, ck.config.window_length);
}

namespace {

nlohmann::json config_to_json(const TrainConfig& c) {
    return nlohmann::json{{"learning_rate", c.learning_rate},
                          {"batch_size", c.batch_size},
                          {"epochs", c.epochs},
                          {"window_length", c.window_length},
                          {"skimming_layers", c.skimming_layers},
                          {"patch_size", c.patch_size},
                          {"lambda", c.lambda},
                          {"seed", c.seed},
                          {"disable_skimming", c.disable_skimming},
                          {"disable_ot", c.disable_ot},
                          {"disable_picky", c.disable_picky},
                          {"threshold_policy", c.threshold_policy},
                          {"sigma_init_factor", c.sigma_init_factor},
                          {"sigma_hat_init", c.sigma_hat_init}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.window_length = j.at("window_length").get<int>();
    c.skimming_layers = j.at("skimming_layers").get<int>();
    c.patch_size = j.at("patch_size").get<int>();
    c.lambda = j.at("lambda").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.disable_skimming = j.at("disable_skimming").get<bool>();
    c.disable_ot = j.at("disable_ot").get<bool>();
    c.disable_picky = j.at("disable_picky").get<bool>();
    c.threshold_policy = j.at("threshold_policy").get<std::string>();
    c.sigma_init_factor = j.at("sigma_init_factor").get<double>();
    c.sigma_hat_init = j.at("sigma_hat_init").get<double>();
    return c;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelCheckpoint& ck) {
    nlohmann::json j;
    j["format_version"] = ck.format_version;
    j["scheme"] = {{"edges", ck.scheme.edges()}, {"overflow", ck.scheme.has_overflow()}};
    j["config"] = config_to_json(ck.config);
    std::vector<double> sigmas;
    for (const auto& layer : ck.model.layers) sigmas.push_back(layer.sigma.value[0]);
    j["sigma"] = sigmas;
    j["sigma_hat"] = ck.model.sigma_hat.value[0];
    const Tensor& p = ck.model.transport_logits.value;
    std::vector<std::vector<double>> rows(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t k = 0; k < p.cols(); ++k) rows[i].push_back(p.at(i, k));
    j["P_logits"] = rows;
    // Derived views for inspection.
    j["plan"] = [&] {
        Tensor plan = model::plan_matrix(p);
        std::vector<std::vector<double>> pr(plan.rows());
        for (std::size_t i = 0; i < plan.rows(); ++i)
            for (std::size_t k = 0; k < plan.cols(); ++k) pr[i].push_back(plan.at(i, k));
        return pr;
    }();
    j["cost"] = [&] {
        Tensor cost = model::cost_matrix(ck.scheme);
        std::vector<std::vector<double>> cr(cost.rows());
        for (std::size_t i = 0; i < cost.rows(); ++i)
            for (std::size_t k = 0; k < cost.cols(); ++k) cr[i].push_back(cost.at(i, k));
        return cr;
    }();
    j["loss_trace"] = ck.loss_trace;

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
    f << j.dump(2) << '\n';
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read checkpoint: " + path);
    nlohmann::json j = nlohmann::json::parse(f);

    ModelCheckpoint ck;
    ck.format_version = j.at("format_version").get<int>();
    ck.scheme = data::IntervalScheme(j.at("scheme").at("edges").get<std::vector<double>>(),
                                     j.at("scheme").at("overflow").get<bool>());
    ck.config = config_from_json(j.at("config"));
    const auto sigmas = j.at("sigma").get<std::vector<double>>();
    const auto p_rows = j.at("P_logits").get<std::vector<std::vector<double>>>();
    const std::size_t dims = p_rows.size();
    ck.model = model::make_model(dims, static_cast<int>(sigmas.size()), ck.config.patch_size,
                                 ck.config.sigma_init(), ck.config.sigma_hat_start());
    for (std::size_t l = 0; l < sigmas.size(); ++l) ck.model.layers[l].sigma.value[0] = sigmas[l];
    ck.model.sigma_hat.value[0] = j.at("sigma_hat").get<double>();
    for (std::size_t i = 0; i < dims; ++i)
        for (std::size_t k = 0; k < dims; ++k) ck.model.transport_logits.value.at(i, k) = p_rows[i][k];
    ck.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    return ck;
}

}  // namespace sorn::train
