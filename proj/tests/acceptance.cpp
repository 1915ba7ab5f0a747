// Acceptance suite: prints one [PASS]/[FAIL] line per criterion and exits
// with the number of failed criteria. argv[1] is the path to the CLI binary,
// used by the determinism criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sorn/model.hpp"
#include "sorn/scoring.hpp"
#include "sorn/synthgen.hpp"
#include "sorn/theorem_oracle.hpp"
#include "sorn/trainer.hpp"

using namespace sorn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("[%s] %2d. %-22s %s (%.1f s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// Criterion-7 dataset and configuration, shared with criterion 8.
synth::SynthSpec detection_spec() {
    synth::SynthSpec spec;  // tones (40,288)+(10,48), base 60, 500 tasks, T=3000
    for (auto& seg : spec.segments) {
        seg.slow_ratio = 0.2;
        seg.avg_slowdown = 120.0;
    }
    spec.noise = 0.0;
    spec.distortion = 0.0;
    spec.seed = 1;
    return spec;
}

train::TrainConfig detection_config() {
    train::TrainConfig cfg;
    cfg.window_length = 20;
    cfg.skimming_layers = 2;
    cfg.patch_size = 2;
    cfg.batch_size = 100;
    cfg.learning_rate = 0.001;
    cfg.epochs = 50;
    cfg.seed = 1;
    return cfg;
}

struct DetectionRun {
    double best_f1 = 0.0;
    double quantile_f1 = 0.0;
    double train_seconds = 0.0;
};

DetectionRun run_detection(const synth::SynthResult& dataset, const train::TrainConfig& cfg) {
    data::DistributionSeries normalized = data::normalize(dataset.series);
    auto [train_part, test_part] = data::split(normalized, 0.7);
    auto [train_labels, test_labels] = data::split(dataset.labels, normalized.slots(), 0.7);

    const auto t0 = Clock::now();
    train::ModelCheckpoint ck = train::train(train_part, data::IntervalScheme::sync_default(), cfg);
    const auto t1 = Clock::now();

    diff::Tensor recon = eval::renormalize_rows(train::reconstruct_series(ck, normalized));
    std::vector<double> scores = eval::anomaly_score(normalized.proportions, recon,
                                                     data::IntervalScheme::sync_default().midpoints());
    const std::size_t cut = train_part.slots();
    std::vector<double> train_scores(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<double> test_scores(scores.begin() + static_cast<std::ptrdiff_t>(cut), scores.end());

    DetectionRun out;
    out.train_seconds = std::chrono::duration<double>(t1 - t0).count();
    out.best_f1 = eval::best_f1_threshold(test_scores, test_labels.labels).metrics.f1;
    const double threshold = eval::quantile_threshold(train_scores, 0.99);
    out.quantile_f1 =
        eval::evaluate(eval::apply_threshold(test_scores, threshold), test_labels.labels).f1;
    return out;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

// 1. Two-tone attention-weight identity against Simpson quadrature.
static void criterion_1() {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b) {
            if (a == b) continue;
            for (double c1 : {1.0, 2.0, 3.0})
                for (double c2 : {0.5, 1.0}) {
                    if (!(c2 < c1)) continue;
                    auto sig = oracle::TwoToneSignal::make(c1, c2, a, b);
                    worst = std::max(worst, oracle::theorem1_grid_error(sig, 100, 100000));
                }
        }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(1, "two-tone identity", worst <= 1e-6 && secs < 30.0,
           fmt("max normalized error %.3g", worst), secs);
}

// 2. General trigonometric-series identity on random signals.
static void criterion_2() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        oracle::FourierSignal sig;
        sig.p = 2.0;
        sig.a0 = coeff(rng);
        for (int n = 0; n < 5; ++n) {
            sig.a.push_back(coeff(rng));
            sig.b.push_back(coeff(rng));
        }
        worst = std::max(worst, oracle::theorem2_grid_error(sig, 50, 100000));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(2, "series identity", worst <= 1e-6, fmt("max normalized error %.3g", worst), secs);
}

// 3. Tape gradients against central finite differences on a frozen batch.
static void criterion_3() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const std::size_t slots = 50, dims = 5;
    diff::Tensor window = diff::Tensor::matrix(slots, dims, 0.0);
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
    diff::Tensor cost = model::cost_matrix({5, 15, 25, 40, 60});

    auto builder = [&](diff::Graph& g) {
        return model::build_window_graph(g, window, m, {}, cost, 0.5, true).loss;
    };
    diff::FdReport rep = diff::finite_difference_check(builder, m.parameters({}), 1e-4);
    std::size_t entries = 0;
    for (const auto& e : rep.entries) entries += e.rel_errors.size();
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(3, "gradient integrity", rep.max_rel_error <= 1e-4 && entries == 2 + 1 + dims * dims,
           fmt("max rel error %.3g over %.0f entries", rep.max_rel_error,
               static_cast<double>(entries)),
           secs);
}

// 4. Structural invariants of the plan, cost, gates and weights.
static void criterion_4() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string why = "all held";
    std::mt19937_64 rng(11);

    std::uniform_real_distribution<double> logit(-50.0, 50.0);
    for (int rep = 0; rep < 100 && pass; ++rep) {
        diff::Tensor logits = diff::Tensor::matrix(6, 6, 0.0);
        for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = logit(rng);
        diff::Tensor plan = model::plan_matrix(logits);
        for (std::size_t j = 0; j < 6; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < 6; ++i) acc += plan.at(i, j);
            if (std::abs(acc - 1.0) > 1e-9) {
                pass = false;
                why = "plan column sum off by " + std::to_string(acc - 1.0);
            }
        }
    }

    diff::Tensor cost = model::cost_matrix(data::IntervalScheme::sync_default());
    for (std::size_t i = 0; i < cost.rows() && pass; ++i)
        for (std::size_t j = i; j < cost.cols(); ++j)
            if (cost.at(i, j) != 0.0) {
                pass = false;
                why = "cost upper triangle not exactly zero";
            }

    std::uniform_real_distribution<double> sigma_draw(0.1, 50.0);
    for (int rep = 0; rep < 20 && pass; ++rep) {
        model::AttentionWorkspace ws = model::make_workspace(30, 2);
        diff::Graph g;
        diff::Parameter sigma("s", diff::Tensor::scalar(sigma_draw(rng)));
        const diff::Tensor& gate = g.value(model::build_gate(g, ws, g.param(sigma)));
        for (std::size_t i = 0; i < 30; ++i)
            if (gate.at(i, i) != 0.0) {
                pass = false;
                why = "gate diagonal not exactly zero";
            }
    }

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int rep = 0; rep < 10 && pass; ++rep) {
        const std::size_t slots = 25, dims = 4;
        diff::Tensor window = diff::Tensor::matrix(slots, dims, 0.0);
        for (std::size_t i = 0; i < window.size(); ++i) window[i] = uni(rng);
        model::SornModel m = model::make_model(dims, 2, 3, 6.0, 6.0);
        model::AttentionWorkspace ws = model::make_workspace(slots, 3);
        diff::Graph g;
        auto wg = model::build_window_graph(g, window, m, {}, diff::Tensor::matrix(dims, dims, 0.0),
                                            0.0, false, &ws);
        // Attention rows: rebuild the gated softmax from the layer-0 logits.
        diff::Val gate = model::build_gate(g, ws, g.param(m.layers[0].sigma));
        for (std::size_t d = 0; d < dims && pass; ++d) {
            const diff::Tensor& attn = g.value(g.row_softmax(g.mul(wg.logits0[d], gate)));
            for (std::size_t i = 0; i < slots; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < slots; ++j) acc += attn.at(i, j);
                if (std::abs(acc - 1.0) > 1e-9) {
                    pass = false;
                    why = "attention row sum off";
                }
            }
        }
        const diff::Tensor& trust = g.value(wg.trust);
        double acc = 0.0;
        for (std::size_t t = 0; t < slots; ++t) acc += trust[t];
        if (std::abs(acc - 1.0) > 1e-9) {
            pass = false;
            why = "trust weights sum off";
        }
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(4, "structural invariants", pass, why, secs);
}

// 5. Skimming reconstructs the low-amplitude tone that standard attention
// cannot; layer 0 tracks the dominant tone.
static void criterion_5() {
    const auto t0 = Clock::now();
    oracle::CompareSpec spec;
    spec.amp1 = 5.0;
    spec.period1 = 48.0;
    spec.amp2 = 1.0;
    spec.period2 = 12.0;
    spec.slots = 2000;
    spec.config.window_length = 100;
    spec.config.patch_size = 12;
    spec.config.skimming_layers = 2;
    spec.config.batch_size = 50;
    spec.config.learning_rate = 0.001;
    spec.config.epochs = 4;
    spec.config.seed = 1;
    oracle::CompareReport rep = oracle::compare_standard_vs_skimming(spec);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool corr_ok = rep.corr_layer0_high > rep.corr_layer0_low;
    const bool rmse_ok = rep.rmse_low_skimming <= 0.5 * rep.rmse_low_standard;
    report(5, "skimming ordering", corr_ok && rmse_ok && secs < 300.0,
           fmt("low-tone RMSE skim %.3f vs std %.3f; layer-0 corr %.2f",
               rep.rmse_low_skimming, rep.rmse_low_standard, rep.corr_layer0_high) +
               fmt(" vs %.2f", rep.corr_layer0_low),
           secs);
}

// 6. Trust weights sink on anomalous slots after training on contaminated data.
static void criterion_6() {
    const auto t0 = Clock::now();
    synth::SynthSpec spec;
    spec.slots = 1500;
    spec.segments.clear();
    for (std::size_t s = 75; s + 3 <= 1500; s += 150)
        spec.segments.push_back({s, 3, 0.3, 120.0});  // 10 x 3 slots = 2%
    spec.seed = 3;
    synth::SynthResult dataset = synth::generate(spec);
    std::size_t labeled = 0;
    for (int l : dataset.labels.labels) labeled += static_cast<std::size_t>(l);

    data::DistributionSeries normalized = data::normalize(dataset.series);
    train::TrainConfig cfg;
    cfg.window_length = 20;
    cfg.skimming_layers = 2;
    cfg.patch_size = 2;
    cfg.batch_size = 50;
    cfg.epochs = 15;
    cfg.seed = 1;
    train::ModelCheckpoint ck = train::train(normalized, spec.scheme, cfg);

    // Average trust weight per slot over non-overlapping windows.
    const std::size_t w = static_cast<std::size_t>(cfg.window_length);
    const model::AttentionWorkspace ws = model::make_workspace(w, cfg.patch_size);
    const diff::Tensor cost = model::cost_matrix(spec.scheme);
    double sum_anom = 0.0, sum_norm = 0.0;
    std::size_t n_anom = 0, n_norm = 0;
    for (std::size_t start = 0; start + w <= normalized.slots(); start += w) {
        diff::Tensor window = diff::Tensor::matrix(w, normalized.dims(), 0.0);
        for (std::size_t i = 0; i < w; ++i)
            for (std::size_t d = 0; d < normalized.dims(); ++d)
                window.at(i, d) = normalized.proportions.at(start + i, d);
        diff::Graph g;
        auto wg = model::build_window_graph(g, window, ck.model, cfg.flags(), cost, cfg.lambda,
                                            false, &ws);
        const diff::Tensor& trust = g.value(wg.trust);
        for (std::size_t i = 0; i < w; ++i) {
            if (dataset.labels.labels[start + i]) {
                sum_anom += trust[i];
                ++n_anom;
            } else {
                sum_norm += trust[i];
                ++n_norm;
            }
        }
    }
    const double mean_anom = sum_anom / static_cast<double>(n_anom);
    const double mean_norm = sum_norm / static_cast<double>(n_norm);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(6, "picky robustness", labeled >= 25 && mean_anom < mean_norm,
           fmt("mean trust: anomalous %.5f vs normal %.5f", mean_anom, mean_norm), secs);
}

// 7. End-to-end detection quality on the synthetic benchmark.
static DetectionRun criterion_7(const synth::SynthResult& dataset) {
    const auto t0 = Clock::now();
    DetectionRun run = run_detection(dataset, detection_config());
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(7, "end-to-end detection",
           run.best_f1 >= 0.90 && run.quantile_f1 >= 0.85 && run.train_seconds < 600.0,
           fmt("best-F1 %.3f, quantile(0.99) F1 %.3f, train %.0f s", run.best_f1, run.quantile_f1,
               run.train_seconds),
           secs);
    return run;
}

// 8. The full model matches or beats every ablation (0.02 slack).
static void criterion_8(const synth::SynthResult& dataset, double full_f1) {
    const auto t0 = Clock::now();
    double worst_gap = 1.0;
    std::string detail = fmt("full %.3f", full_f1);
    const char* names[3] = {"no-skimming", "no-transport", "uniform-weights"};
    for (int variant = 0; variant < 3; ++variant) {
        train::TrainConfig cfg = detection_config();
        if (variant == 0) {
            cfg.disable_skimming = true;
            cfg.skimming_layers = 1;
        } else if (variant == 1) {
            cfg.disable_ot = true;
        } else {
            cfg.disable_picky = true;
        }
        DetectionRun run = run_detection(dataset, cfg);
        detail += std::string(", ") + names[variant] + fmt(" %.3f", run.best_f1);
        worst_gap = std::min(worst_gap, full_f1 - run.best_f1);
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(8, "ablation ordering", worst_gap >= -0.02, detail + fmt("; worst gap %.3f", worst_gap),
           secs);
}

// 9. Anomaly-score identities hold exactly.
static void criterion_9() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.01, 1.0);
    diff::Tensor x = diff::Tensor::matrix(12, 5, 0.0);
    for (std::size_t t = 0; t < 12; ++t) {
        double sum = 0.0;
        for (std::size_t d = 0; d < 5; ++d) {
            x.at(t, d) = uni(rng);
            sum += x.at(t, d);
        }
        for (std::size_t d = 0; d < 5; ++d) x.at(t, d) /= sum;
    }
    bool pass = true;
    for (double s : eval::anomaly_score(x, x, {5, 15, 25, 40, 60}))
        if (s != 0.0) pass = false;

    diff::Tensor observed({1, 4}, {0.0, 0.0, 0.0, 1.0});
    diff::Tensor recon({1, 4}, {1.0, 0.0, 0.0, 0.0});
    const double gap = eval::anomaly_score(observed, recon, {5, 15, 25, 35})[0];
    if (gap != 30.0) pass = false;
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(9, "score identities", pass, fmt("identity scores exact, single-mass gap %.0f", gap), secs);
}

// 10. generate + train + score through the CLI is bit-reproducible.
static void criterion_10(const std::string& cli) {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string why = "score CSVs byte-identical";
    if (cli.empty() || !fs::exists(cli)) {
        report(10, "pipeline determinism", false, "CLI binary not found: " + cli, 0.0);
        return;
    }
    const std::string base = "acceptance_tmp";
    fs::remove_all(base);
    auto run_pipeline = [&](const std::string& dir) {
        fs::create_directories(dir);
        std::string cmd = cli + " generate --out-dir " + dir + "/data --slots 600 --tasks-per-slot 150 "
                          "--seed 9 >/dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) return false;
        cmd = cli + " train --series " + dir + "/data/series.csv --out-dir " + dir +
              "/run --epochs 3 --batch-size 32 --window-length 20 --seed 9 >/dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) return false;
        cmd = cli + " score --checkpoint " + dir + "/run/checkpoint.json --series " + dir +
              "/data/series.csv --train-scores " + dir + "/run/train_scores.csv --out " + dir +
              "/scores.csv >/dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    if (!run_pipeline(base + "/a") || !run_pipeline(base + "/b")) {
        pass = false;
        why = "pipeline command failed";
    } else {
        if (slurp(base + "/a/data/series.csv") != slurp(base + "/b/data/series.csv")) {
            pass = false;
            why = "generated series differ";
        }
        if (slurp(base + "/a/scores.csv") != slurp(base + "/b/scores.csv")) {
            pass = false;
            why = "score CSVs differ";
        }
        if (slurp(base + "/a/scores.csv").empty()) {
            pass = false;
            why = "empty score CSV";
        }
    }
    fs::remove_all(base);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(10, "pipeline determinism", pass, why, secs);
}

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    std::printf("acceptance suite\n");

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();

    synth::SynthResult dataset = synth::generate(detection_spec());
    DetectionRun full = criterion_7(dataset);
    criterion_8(dataset, full.best_f1);

    criterion_9();
    criterion_10(cli);

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ALL PASS" : "RESULT", failures);
    return failures;
}
