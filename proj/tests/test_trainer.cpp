#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <random>

#include "doctest.h"
#include "sorn/model.hpp"
#include "sorn/synthgen.hpp"
#include "sorn/trainer.hpp"

using namespace sorn;
using diff::Graph;
using diff::Parameter;
using diff::Tensor;
using diff::Val;

namespace {

data::DistributionSeries two_tone_series(std::size_t slots, double slow_ratio = 0.0,
                                         std::uint64_t seed = 1) {
    synth::SynthSpec spec;
    spec.slots = slots;
    spec.tones = {{20.0, 96.0}, {5.0, 24.0}};
    spec.base_duration = 60.0;
    spec.tasks_per_slot = 200;
    spec.segments.clear();
    if (slow_ratio > 0.0)
        for (std::size_t s = 40; s + 3 < slots; s += 100) spec.segments.push_back({s, 3, slow_ratio, 120.0});
    spec.seed = seed;
    return data::normalize(synth::generate(spec).series);
}

train::TrainConfig quick_config() {
    train::TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.window_length = 24;
    cfg.skimming_layers = 2;
    cfg.patch_size = 2;
    cfg.learning_rate = 0.001;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("trust weights: zero series gives exactly uniform weights") {
    const std::size_t slots = 15;
    Tensor x = Tensor::matrix(slots, 3, 0.0);
    model::SornModel m = model::make_model(3, 2, 2, 4.0, 4.0);
    Graph g;
    auto wg = model::build_window_graph(g, x, m, {}, Tensor::matrix(3, 3, 0.0), 0.0, false);
    const Tensor& trust = g.value(wg.trust);
    double acc = 0.0;
    for (std::size_t t = 0; t < slots; ++t) {
        CHECK(trust[t] == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
        acc += trust[t];
    }
    CHECK(acc == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("trust weights sum to one on arbitrary windows") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        Tensor x = Tensor::matrix(13, 4, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = uni(rng);
        model::SornModel m = model::make_model(4, 2, 3, 6.0, 6.0);
        Graph g;
        auto wg = model::build_window_graph(g, x, m, {}, Tensor::matrix(4, 4, 0.0), 0.0, false);
        const Tensor& trust = g.value(wg.trust);
        double acc = 0.0;
        for (std::size_t t = 0; t < 13; ++t) acc += trust[t];
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("slot-weight softmax is shift invariant") {
    Graph g;
    Tensor r({6, 1}, {0.4, -1.0, 2.2, 0.0, 1.1, -0.7});
    Tensor shifted = r;
    for (std::size_t i = 0; i < 6; ++i) shifted[i] += 37.5;
    const Tensor& a = g.value(g.col_softmax(g.constant(r)));
    const Tensor& b = g.value(g.col_softmax(g.constant(shifted)));
    for (std::size_t i = 0; i < 6; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("full loss gradients match finite differences on a frozen window") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const std::size_t slots = 20, dims = 4;
    Tensor window = Tensor::matrix(slots, dims, 0.0);
    for (std::size_t t = 0; t < slots; ++t) {
        double sum = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            window.at(t, d) = uni(rng) + 0.02;
            sum += window.at(t, d);
        }
        for (std::size_t d = 0; d < dims; ++d) window.at(t, d) /= sum;
    }
    model::SornModel m = model::make_model(dims, 2, 3, 6.0, 6.0);
    std::normal_distribution<double> jitter(0.0, 0.5);
    for (std::size_t i = 0; i < m.transport_logits.value.size(); ++i)
        m.transport_logits.value[i] += jitter(rng);
    Tensor cost = model::cost_matrix({5, 15, 25, 40});

    auto builder = [&](Graph& g) {
        auto wg = model::build_window_graph(g, window, m, {}, cost, 0.5, true);
        return wg.loss;
    };
    auto params = m.parameters({});
    diff::FdReport rep = diff::finite_difference_check(builder, params, 1e-4);
    CAPTURE(rep.max_rel_error);
    CHECK(rep.max_rel_error <= 1e-4);
    CHECK(rep.entries.size() == 4);  // sigma_0, sigma_1, sigma_hat, transport logits
}

TEST_CASE("training reduces the loss on a clean periodic series") {
    data::DistributionSeries series = two_tone_series(400);
    train::TrainConfig cfg = quick_config();
    train::ModelCheckpoint ck = train::train(series, data::IntervalScheme::sync_default(), cfg);
    REQUIRE(ck.loss_trace.size() >= 2);
    CHECK(ck.loss_trace.back() < ck.loss_trace.front());
}

TEST_CASE("training is deterministic in seed, config and data") {
    data::DistributionSeries series = two_tone_series(300);
    train::TrainConfig cfg = quick_config();
    cfg.epochs = 2;
    train::ModelCheckpoint a = train::train(series, data::IntervalScheme::sync_default(), cfg);
    train::ModelCheckpoint b = train::train(series, data::IntervalScheme::sync_default(), cfg);
    CHECK(a.loss_trace == b.loss_trace);
    CHECK(a.model.transport_logits.value == b.model.transport_logits.value);
    for (std::size_t l = 0; l < a.model.layers.size(); ++l)
        CHECK(a.model.layers[l].sigma.value[0] == b.model.layers[l].sigma.value[0]);
    CHECK(a.model.sigma_hat.value[0] == b.model.sigma_hat.value[0]);
}

TEST_CASE("ablation switches train and keep their structural meaning") {
    data::DistributionSeries series = two_tone_series(300);
    train::TrainConfig cfg = quick_config();
    cfg.epochs = 1;

    cfg.disable_skimming = true;
    train::ModelCheckpoint std_ck = train::train(series, data::IntervalScheme::sync_default(), cfg);
    CHECK(std_ck.loss_trace.size() == 1);
    cfg.disable_skimming = false;

    cfg.disable_ot = true;
    train::ModelCheckpoint no_ot = train::train(series, data::IntervalScheme::sync_default(), cfg);
    // Transport logits receive no gradient and never move from the init.
    Tensor init_logits = model::make_model(14, 2, 2, 4.0, 4.0).transport_logits.value;
    CHECK(no_ot.model.transport_logits.value == init_logits);
    cfg.disable_ot = false;

    cfg.disable_picky = true;
    train::ModelCheckpoint no_picky = train::train(series, data::IntervalScheme::sync_default(), cfg);
    CHECK(no_picky.model.sigma_hat.value[0] == doctest::Approx(cfg.sigma_hat_start()));
}

TEST_CASE("window sampling refuses a series whose every window is contaminated") {
    data::DistributionSeries series = two_tone_series(12);
    series.missing.assign(12, 0);
    series.missing[5] = 1;
    train::TrainConfig cfg = quick_config();
    cfg.window_length = 10;
    CHECK_THROWS_WITH_AS(train::train(series, data::IntervalScheme::sync_default(), cfg),
                         doctest::Contains("missing"), std::invalid_argument);
}

TEST_CASE("non-finite loss aborts with the offending batch named") {
    data::DistributionSeries series = two_tone_series(60);
    series.proportions.at(30, 2) = std::numeric_limits<double>::infinity();
    train::TrainConfig cfg = quick_config();
    cfg.window_length = 50;  // every window covers the poisoned slot
    cfg.epochs = 1;
    CHECK_THROWS_WITH_AS(train::train(series, data::IntervalScheme::sync_default(), cfg),
                         doctest::Contains("batch"), std::runtime_error);
}

TEST_CASE("train requires a normalized series and a long-enough window") {
    synth::SynthSpec spec;
    spec.slots = 50;
    spec.segments.clear();
    data::DistributionSeries counts_only = synth::generate(spec).series;
    train::TrainConfig cfg = quick_config();
    CHECK_THROWS_AS(train::train(counts_only, spec.scheme, cfg), std::invalid_argument);

    data::DistributionSeries series = two_tone_series(10);
    cfg.window_length = 24;
    CHECK_THROWS_AS(train::train(series, data::IntervalScheme::sync_default(), cfg),
                    std::invalid_argument);
}

TEST_CASE("checkpoint save/load reproduces identical scores bit for bit") {
    data::DistributionSeries series = two_tone_series(200);
    train::TrainConfig cfg = quick_config();
    cfg.epochs = 2;
    train::ModelCheckpoint ck = train::train(series, data::IntervalScheme::sync_default(), cfg);

    const std::string path = "ck_roundtrip.json";
    train::save_checkpoint(path, ck);
    train::ModelCheckpoint back = train::load_checkpoint(path);
    std::remove(path.c_str());

    CHECK(back.config.window_length == cfg.window_length);
    CHECK(back.model.transport_logits.value == ck.model.transport_logits.value);
    CHECK(back.loss_trace == ck.loss_trace);

    Tensor recon_a = train::reconstruct_series(ck, series);
    Tensor recon_b = train::reconstruct_series(back, series);
    CHECK(recon_a == recon_b);
}

TEST_CASE("config validation rejects out-of-range values") {
    train::TrainConfig cfg;
    cfg.lambda = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.lambda = 0.5;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
