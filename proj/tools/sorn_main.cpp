// Command-line front end: generate synthetic datasets, ingest task events,
// train the detector, score series, evaluate detections, verify the
// attention-weight identities, and export SVG traces.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "sorn/csv_io.hpp"
#include "sorn/run_config.hpp"
#include "sorn/scoring.hpp"
#include "sorn/svg.hpp"
#include "sorn/synthgen.hpp"
#include "sorn/theorem_oracle.hpp"
#include "sorn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t env_seed_fallback() {
    if (const char* env = std::getenv("SORN_SEED")) return std::strtoull(env, nullptr, 10);
    return 1;
}

sorn::config::RunConfig resolve_config(const std::string& config_path) {
    sorn::config::RunConfig cfg;
    cfg.train.seed = env_seed_fallback();
    cfg.synth.seed = cfg.train.seed;
    if (!config_path.empty()) cfg = sorn::config::load_run_config(config_path, cfg);
    return cfg;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << j.dump(2) << '\n';
}

sorn::data::DistributionSeries load_series(const std::string& series_path, std::string scheme_path,
                                           sorn::data::SchemeSidecar* sidecar_out) {
    if (scheme_path.empty()) scheme_path = sorn::data::default_scheme_path(series_path);
    sorn::data::SchemeSidecar sidecar = sorn::data::read_scheme_json(scheme_path);
    sorn::data::DistributionSeries series = sorn::data::read_series_csv(series_path, sidecar.normalized);
    series.slot_duration = sidecar.slot_duration;
    if (series.dims() != sidecar.scheme.dims())
        throw InputError("series " + series_path + " has " + std::to_string(series.dims()) +
                         " bins but the scheme defines " + std::to_string(sidecar.scheme.dims()));
    if (sidecar_out) *sidecar_out = sidecar;
    return series;
}

std::vector<double> score_range(sorn::train::ModelCheckpoint& ck,
                                const sorn::data::DistributionSeries& normalized) {
    sorn::diff::Tensor recon =
        sorn::eval::renormalize_rows(sorn::train::reconstruct_series(ck, normalized));
    return sorn::eval::anomaly_score(normalized.proportions, recon, ck.scheme.midpoints());
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 const sorn::config::RunConfig& overrides, const std::vector<std::string>& set_flags) {
    sorn::config::RunConfig cfg = resolve_config(config_path);
    // Apply the handful of direct flags that were actually passed.
    for (const std::string& key : set_flags) {
        if (key == "seed") {
            cfg.train.seed = overrides.train.seed;
            cfg.synth.seed = overrides.train.seed;
        } else if (key == "slots") {
            cfg.synth.slots = overrides.synth.slots;
            if (!cfg.explicit_segments)
                cfg.synth.segments = sorn::synth::SynthSpec::default_segments(cfg.synth.slots);
        }
        else if (key == "noise") cfg.synth.noise = overrides.synth.noise;
        else if (key == "distortion") cfg.synth.distortion = overrides.synth.distortion;
        else if (key == "tasks_per_slot") cfg.synth.tasks_per_slot = overrides.synth.tasks_per_slot;
        else if (key == "base_duration") cfg.synth.base_duration = overrides.synth.base_duration;
        else if (key == "tolerance") cfg.synth.tolerance = overrides.synth.tolerance;
        else if (key == "slow_ratio") {
            for (auto& seg : cfg.synth.segments) seg.slow_ratio = overrides.synth.segments[0].slow_ratio;
        } else if (key == "avg_slowdown") {
            for (auto& seg : cfg.synth.segments) seg.avg_slowdown = overrides.synth.segments[0].avg_slowdown;
        }
    }
    cfg.synth.validate();

    fs::create_directories(out_dir);
    sorn::synth::SynthResult result = sorn::synth::generate(cfg.synth);

    const std::string series_path = out_dir + "/series.csv";
    sorn::data::write_series_csv(series_path, result.series);
    sorn::data::write_scheme_json(sorn::data::default_scheme_path(series_path), cfg.synth.scheme,
                                  cfg.synth.slot_duration, false);
    sorn::data::write_labels_csv(out_dir + "/labels.csv", result.labels);

    json spec_json = json::parse(sorn::config::run_config_json(cfg));
    write_json(out_dir + "/spec.json", spec_json);
    sorn::config::write_resolved_config(out_dir + "/resolved_config.json", cfg);

    std::size_t anomalous = 0;
    for (int label : result.labels.labels) anomalous += static_cast<std::size_t>(label);
    std::cout << "generated " << result.series.slots() << " slots, " << anomalous
              << " labeled anomalous (" << 100.0 * anomalous / result.series.slots() << "%)\n";
    return 0;
}

int cmd_ingest(const std::string& events_path, const std::string& scheme_path, double slot_duration,
               double span_start, double span_end, const std::string& out_path) {
    sorn::data::EventParseReport parse_report;
    std::vector<sorn::data::TaskEvent> events = sorn::data::read_events_csv(events_path, &parse_report);

    sorn::data::SchemeSidecar sidecar = sorn::data::read_scheme_json(scheme_path);
    if (slot_duration <= 0.0) slot_duration = sidecar.slot_duration;
    if (slot_duration <= 0.0) throw InputError("slot duration must be positive (flag or scheme JSON)");

    if (events.empty()) {
        std::cerr << "warning: no parseable events in " << events_path << "\n";
    } else if (span_end <= span_start) {
        double lo = events[0].end_timestamp, hi = events[0].end_timestamp;
        for (const auto& ev : events) {
            lo = std::min(lo, ev.end_timestamp);
            hi = std::max(hi, ev.end_timestamp);
        }
        span_start = std::floor(lo / slot_duration) * slot_duration;
        span_end = (std::floor(hi / slot_duration) + 1.0) * slot_duration;
    }

    sorn::data::BinReport bin_report;
    sorn::data::DistributionSeries series;
    if (!events.empty())
        series = sorn::data::bin_events(events, sidecar.scheme, slot_duration, span_start, span_end,
                                        &bin_report);
    else {
        series.slot_duration = slot_duration;
        series.counts = sorn::diff::Tensor::matrix(1, sidecar.scheme.dims(), 0.0);
        series.timestamps = {0.0};
        series.missing = {1};
    }

    sorn::data::write_series_csv(out_path, series);
    sorn::data::write_scheme_json(sorn::data::default_scheme_path(out_path), sidecar.scheme,
                                  slot_duration, false);

    json report;
    report["total_rows"] = parse_report.total_rows;
    report["parsed"] = parse_report.parsed;
    report["malformed"] = parse_report.malformed;
    json errors = json::array();
    for (const auto& [line, reason] : parse_report.errors) errors.push_back({{"line", line}, {"reason", reason}});
    for (const auto& [index, reason] : bin_report.rejections) errors.push_back({{"event", index}, {"reason", reason}});
    report["errors"] = errors;
    report["binned"] = bin_report.binned;
    report["rejected"] = bin_report.rejected;
    report["dropped_out_of_span"] = bin_report.dropped_out_of_span;
    report["slots"] = series.slots();
    write_json(out_path + ".report.json", report);
    std::cout << report.dump(2) << '\n';

    if (parse_report.total_rows > 0 &&
        static_cast<double>(parse_report.malformed) > 0.01 * static_cast<double>(parse_report.total_rows))
        throw InputError("more than 1% malformed rows (" + std::to_string(parse_report.malformed) +
                         " of " + std::to_string(parse_report.total_rows) + ")");
    return 0;
}

void train_one(const std::string& series_path, const std::string& scheme_path,
               const sorn::config::RunConfig& cfg, const std::string& out_dir) {
    sorn::data::SchemeSidecar sidecar;
    sorn::data::DistributionSeries raw = load_series(series_path, scheme_path, &sidecar);
    sorn::data::DistributionSeries normalized = sorn::data::normalize(raw);

    sorn::data::DistributionSeries train_part = normalized;
    if (cfg.train_fraction < 1.0) train_part = sorn::data::split(normalized, cfg.train_fraction).first;

    sorn::train::ModelCheckpoint ck = sorn::train::train(train_part, sidecar.scheme, cfg.train);

    fs::create_directories(out_dir);
    sorn::train::save_checkpoint(out_dir + "/checkpoint.json", ck);
    sorn::config::write_resolved_config(out_dir + "/resolved_config.json", cfg);

    // Scores of the final model over its own training range, for the
    // label-free quantile threshold policy downstream.
    std::vector<double> train_scores = score_range(ck, train_part);
    sorn::data::ScoreRows rows;
    rows.timestamps = train_part.timestamps;
    rows.scores = train_scores;
    rows.predictions.assign(train_scores.size(), 0);
    sorn::data::write_scores_csv(out_dir + "/train_scores.csv", rows);

    std::cout << "trained on " << train_part.slots() << " slots, final loss "
              << (ck.loss_trace.empty() ? 0.0 : ck.loss_trace.back()) << ", checkpoint at " << out_dir
              << "/checkpoint.json\n";
}

int cmd_train(const std::vector<std::string>& series_paths, const std::string& scheme_path,
              const sorn::config::RunConfig& cfg, const std::string& out_dir, int parallel_subsets) {
    cfg.train.validate();
    if (series_paths.size() == 1) {
        train_one(series_paths[0], scheme_path, cfg, out_dir);
        return 0;
    }
    // One model per subset, trained in parallel batches of threads.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(series_paths.size());
    std::size_t next = 0;
    while (next < series_paths.size()) {
        const std::size_t burst =
            std::min<std::size_t>(static_cast<std::size_t>(std::max(parallel_subsets, 1)),
                                  series_paths.size() - next);
        pool.clear();
        for (std::size_t k = 0; k < burst; ++k) {
            const std::size_t idx = next + k;
            pool.emplace_back([&, idx] {
                try {
                    train_one(series_paths[idx], scheme_path, cfg,
                              out_dir + "/subset_" + std::to_string(idx));
                } catch (...) {
                    errors[idx] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        next += burst;
    }
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return 0;
}

int cmd_score(const std::string& checkpoint_path, const std::string& series_path,
              const std::string& scheme_path, const std::string& out_path, std::string policy_text,
              const std::string& train_scores_path, double from_fraction, double to_fraction) {
    sorn::train::ModelCheckpoint ck = sorn::train::load_checkpoint(checkpoint_path);
    sorn::data::SchemeSidecar sidecar;
    sorn::data::DistributionSeries raw = load_series(series_path, scheme_path, &sidecar);
    if (!(sidecar.scheme == ck.scheme))
        throw InputError("checkpoint/scheme mismatch: series bins differ from the checkpoint scheme");
    sorn::data::DistributionSeries normalized = sorn::data::normalize(raw);

    std::vector<double> scores = score_range(ck, normalized);

    if (policy_text.empty()) policy_text = ck.config.threshold_policy;
    sorn::eval::ThresholdPolicy policy = sorn::eval::ThresholdPolicy::parse(policy_text);
    if (policy.kind == sorn::eval::ThresholdPolicy::Kind::BestF1)
        throw InputError("best_f1 is an eval-only policy (needs labels); use `eval`");

    std::optional<std::vector<double>> train_scores;
    if (!train_scores_path.empty()) train_scores = sorn::data::read_scores_csv(train_scores_path).scores;
    const double threshold = sorn::eval::resolve_threshold(policy, train_scores, scores, nullptr);
    std::vector<int> preds = sorn::eval::apply_threshold(scores, threshold);

    const std::size_t slots = scores.size();
    std::size_t lo = static_cast<std::size_t>(std::floor(from_fraction * static_cast<double>(slots)));
    std::size_t hi = static_cast<std::size_t>(std::floor(to_fraction * static_cast<double>(slots)));
    hi = std::min(hi, slots);
    if (lo >= hi) throw InputError("empty score range after applying --from/--to fractions");

    sorn::data::ScoreRows rows;
    for (std::size_t t = lo; t < hi; ++t) {
        rows.timestamps.push_back(normalized.timestamps[t]);
        rows.scores.push_back(scores[t]);
        rows.predictions.push_back(preds[t]);
    }
    sorn::data::write_scores_csv(out_path, rows);

    json meta;
    meta["threshold"] = threshold;
    meta["policy"] = policy.describe();
    meta["checkpoint"] = checkpoint_path;
    meta["series"] = series_path;
    meta["range"] = {{"from", lo}, {"to", hi}};
    write_json(out_path + ".meta.json", meta);
    std::cout << "scored " << (hi - lo) << " slots, threshold " << threshold << " (" << policy.describe()
              << ")\n";
    return 0;
}

int cmd_eval(const std::string& scores_path, const std::string& labels_path, const std::string& out_path,
             const std::string& policy_text, const std::string& train_scores_path, bool point_adjust) {
    sorn::data::ScoreRows rows = sorn::data::read_scores_csv(scores_path);
    sorn::data::LabelSeries labels = sorn::data::read_labels_csv(labels_path);

    // Align labels to score rows by timestamp.
    std::vector<int> aligned(rows.scores.size(), 0);
    std::size_t li = 0;
    for (std::size_t i = 0; i < rows.timestamps.size(); ++i) {
        while (li < labels.timestamps.size() && labels.timestamps[li] < rows.timestamps[i]) ++li;
        if (li >= labels.timestamps.size() || labels.timestamps[li] != rows.timestamps[i])
            throw InputError("labels do not cover score timestamp " +
                             sorn::data::format_double(rows.timestamps[i]));
        aligned[i] = labels.labels[li];
    }

    json report;
    report["point_adjust"] = point_adjust;
    sorn::eval::Metrics metrics;
    if (policy_text == "use-pred") {
        metrics = sorn::eval::evaluate(rows.predictions, aligned, point_adjust);
        report["policy"] = "use-pred";
    } else {
        sorn::eval::ThresholdPolicy policy = sorn::eval::ThresholdPolicy::parse(policy_text);
        std::optional<std::vector<double>> train_scores;
        if (!train_scores_path.empty())
            train_scores = sorn::data::read_scores_csv(train_scores_path).scores;
        const double threshold =
            sorn::eval::resolve_threshold(policy, train_scores, rows.scores, &aligned, point_adjust);
        metrics = sorn::eval::evaluate(sorn::eval::apply_threshold(rows.scores, threshold), aligned,
                                       point_adjust);
        report["policy"] = policy.describe();
        report["threshold"] = threshold;
        if (policy.kind == sorn::eval::ThresholdPolicy::Kind::BestF1)
            report["threshold_provenance"] = "best_f1 sweep over evaluation scores (eval-only)";
        else if (policy.kind == sorn::eval::ThresholdPolicy::Kind::Quantile)
            report["threshold_provenance"] = "quantile over training scores " + train_scores_path;
        else
            report["threshold_provenance"] = "fixed value";
    }
    report["precision"] = metrics.precision;
    report["recall"] = metrics.recall;
    report["f1"] = metrics.f1;
    report["tp"] = metrics.tp;
    report["fp"] = metrics.fp;
    report["fn"] = metrics.fn;
    write_json(out_path, report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_verify_theorems(const std::string& out_path) {
    json report;
    bool all_pass = true;

    // Two-tone identity over the full acceptance grid.
    double worst1 = 0.0;
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b) {
            if (a == b) continue;
            for (double c1 : {1.0, 2.0, 3.0})
                for (double c2 : {0.5, 1.0}) {
                    if (!(c2 < c1)) continue;
                    auto sig = sorn::oracle::TwoToneSignal::make(c1, c2, a, b);
                    worst1 = std::max(worst1, sorn::oracle::theorem1_grid_error(sig, 100, 100000));
                }
        }
    const bool pass1 = worst1 <= 1e-6;
    report["two_tone"] = {{"max_normalized_error", worst1}, {"pass", pass1}};
    all_pass = all_pass && pass1;

    // General trigonometric-series identity on random signals.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    double worst2 = 0.0;
    for (int s = 0; s < 20; ++s) {
        sorn::oracle::FourierSignal sig;
        sig.p = 2.0;
        sig.a0 = coeff(rng);
        for (int n = 0; n < 5; ++n) {
            sig.a.push_back(coeff(rng));
            sig.b.push_back(coeff(rng));
        }
        worst2 = std::max(worst2, sorn::oracle::theorem2_grid_error(sig, 50, 100000));
    }
    const bool pass2 = worst2 <= 1e-6;
    report["general_series"] = {{"max_normalized_error", worst2}, {"pass", pass2}};
    all_pass = all_pass && pass2;

    // Dominant-period placement of the weight maxima.
    auto dom = sorn::oracle::dominance_report(sorn::oracle::TwoToneSignal::make(2.0, 1.0, 2, 3));
    const bool pass3 = dom.all_at_t1_multiples && !dom.any_t2_only && !dom.maximizers.empty();
    report["dominance"] = {{"maximizers", dom.maximizers}, {"pass", pass3}};
    all_pass = all_pass && pass3;

    report["pass"] = all_pass;
    if (!out_path.empty()) write_json(out_path, report);
    std::cout << report.dump(2) << '\n';
    return all_pass ? 0 : 1;
}

int cmd_export_plots(const std::string& scores_path, const std::string& labels_path,
                     const std::string& checkpoint_path, const std::string& series_path,
                     const std::string& scheme_path, const std::string& out_dir) {
    fs::create_directories(out_dir);

    if (!scores_path.empty()) {
        sorn::data::ScoreRows rows = sorn::data::read_scores_csv(scores_path);
        std::vector<sorn::plot::LineSeries> traces;
        traces.push_back({"anomaly score (min)", rows.scores, "#1f77b4"});
        if (!labels_path.empty()) {
            sorn::data::LabelSeries labels = sorn::data::read_labels_csv(labels_path);
            double peak = 1.0;
            for (double s : rows.scores) peak = std::max(peak, std::abs(s));
            std::vector<double> scaled;
            for (std::size_t i = 0; i < rows.timestamps.size(); ++i) {
                int lab = 0;
                for (std::size_t k = 0; k < labels.timestamps.size(); ++k)
                    if (labels.timestamps[k] == rows.timestamps[i]) {
                        lab = labels.labels[k];
                        break;
                    }
                scaled.push_back(lab * peak);
            }
            traces.push_back({"label", scaled, "#d62728"});
        }
        sorn::plot::write_line_chart(out_dir + "/scores.svg", "anomaly score", traces);
    }

    if (!checkpoint_path.empty()) {
        sorn::train::ModelCheckpoint ck = sorn::train::load_checkpoint(checkpoint_path);
        sorn::plot::write_line_chart(out_dir + "/loss.svg", "training loss",
                                     {{"epoch mean loss", ck.loss_trace, "#2ca02c"}});
        if (!series_path.empty()) {
            sorn::data::DistributionSeries normalized =
                sorn::data::normalize(load_series(series_path, scheme_path, nullptr));
            sorn::diff::Tensor recon = sorn::train::reconstruct_series(ck, normalized);
            const auto& mids = ck.scheme.midpoints();
            std::vector<double> observed, reconstructed;
            for (std::size_t t = 0; t < normalized.slots(); ++t) {
                observed.push_back(sorn::data::expected_duration(normalized.proportions, t, mids));
                reconstructed.push_back(sorn::data::expected_duration(recon, t, mids));
            }
            sorn::plot::write_line_chart(out_dir + "/reconstruction.svg",
                                         "expected duration: observed vs reconstruction",
                                         {{"observed", observed, "#1f77b4"},
                                          {"reconstruction", reconstructed, "#ff7f0e"}});

            // Trust weights over non-overlapping training-length windows.
            const std::size_t w = std::min<std::size_t>(
                static_cast<std::size_t>(ck.config.window_length), normalized.slots());
            std::vector<double> weights(normalized.slots(), 0.0);
            const sorn::diff::Tensor cost = sorn::model::cost_matrix(ck.scheme);
            for (std::size_t start = 0; start + w <= normalized.slots(); start += w) {
                sorn::diff::Tensor window = sorn::diff::Tensor::matrix(w, normalized.dims(), 0.0);
                for (std::size_t i = 0; i < w; ++i)
                    for (std::size_t d = 0; d < normalized.dims(); ++d)
                        window.at(i, d) = normalized.proportions.at(start + i, d);
                sorn::diff::Graph g;
                auto wg = sorn::model::build_window_graph(g, window, ck.model, ck.config.flags(), cost,
                                                          ck.config.lambda, false);
                for (std::size_t i = 0; i < w; ++i) weights[start + i] = g.value(wg.trust)[i];
            }
            sorn::plot::write_line_chart(out_dir + "/weights.svg", "per-slot trust weights",
                                         {{"trust weight", weights, "#9467bd"}});
        }
    }
    std::cout << "plots written to " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cluster-wide task slowdown detector"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a synthetic dataset");
    std::string gen_config, gen_out;
    sorn::config::RunConfig flag_values;
    flag_values.synth.segments = {{0, 1, 0.3, 120.0}};  // carrier for ratio/slowdown overrides
    gen->add_option("--config", gen_config, "run config JSON");
    gen->add_option("--out-dir", gen_out, "output directory")->required();
    std::vector<std::string> gen_set;
    gen->add_option("--seed", flag_values.train.seed, "rng seed")
        ->each([&](const std::string&) { gen_set.push_back("seed"); });
    gen->add_option("--slots", flag_values.synth.slots, "series length")
        ->each([&](const std::string&) { gen_set.push_back("slots"); });
    gen->add_option("--noise", flag_values.synth.noise, "noise fraction of max amplitude")
        ->each([&](const std::string&) { gen_set.push_back("noise"); });
    gen->add_option("--distortion", flag_values.synth.distortion, "period stretch bound R")
        ->each([&](const std::string&) { gen_set.push_back("distortion"); });
    gen->add_option("--tasks-per-slot", flag_values.synth.tasks_per_slot, "tasks sampled per slot")
        ->each([&](const std::string&) { gen_set.push_back("tasks_per_slot"); });
    gen->add_option("--base-duration", flag_values.synth.base_duration, "mean duration base, minutes")
        ->each([&](const std::string&) { gen_set.push_back("base_duration"); });
    gen->add_option("--tolerance", flag_values.synth.tolerance, "labeling tolerance, minutes")
        ->each([&](const std::string&) { gen_set.push_back("tolerance"); });
    gen->add_option("--slow-ratio", flag_values.synth.segments[0].slow_ratio,
                    "slowed task fraction for every segment")
        ->each([&](const std::string&) { gen_set.push_back("slow_ratio"); });
    gen->add_option("--avg-slowdown", flag_values.synth.segments[0].avg_slowdown,
                    "mean added delay for every segment, minutes")
        ->each([&](const std::string&) { gen_set.push_back("avg_slowdown"); });

    // ingest
    auto* ing = app.add_subcommand("ingest", "bin a task-event CSV into a series");
    std::string ing_events, ing_scheme, ing_out;
    double ing_slot = 0.0, ing_start = 0.0, ing_end = 0.0;
    ing->add_option("--events", ing_events, "events CSV (task_id,end_timestamp,duration_min)")->required();
    ing->add_option("--scheme", ing_scheme, "scheme JSON")->required();
    ing->add_option("--slot-duration", ing_slot, "slot duration in minutes");
    ing->add_option("--span-start", ing_start, "span start (minutes)");
    ing->add_option("--span-end", ing_end, "span end (minutes, exclusive)");
    ing->add_option("--out", ing_out, "output series CSV")->required();

    // train
    auto* tr = app.add_subcommand("train", "train a detector on a series");
    std::vector<std::string> tr_series;
    std::string tr_scheme, tr_config, tr_out;
    int tr_parallel = 1;
    tr->add_option("--series", tr_series, "series CSV (repeatable for per-subset models)")->required();
    tr->add_option("--scheme", tr_scheme, "scheme JSON (default: sibling of the series)");
    tr->add_option("--config", tr_config, "run config JSON");
    tr->add_option("--out-dir", tr_out, "output directory")->required();
    tr->add_option("--parallel-subsets", tr_parallel, "parallel per-subset trainings");
    sorn::config::RunConfig tr_cfg;
    bool tr_dsk = false, tr_dot = false, tr_dpk = false;
    double tr_lr = -1, tr_lambda = -1, tr_fraction = -1, tr_sigf = -1, tr_sigh = -1;
    std::int64_t tr_seed = -1;
    int tr_batch = -1, tr_epochs = -1, tr_window = -1, tr_layers = -1, tr_patch = -1;
    std::string tr_policy;
    tr->add_option("--learning-rate", tr_lr, "optimizer learning rate");
    tr->add_option("--batch-size", tr_batch, "windows per optimizer step");
    tr->add_option("--epochs", tr_epochs, "training epochs");
    tr->add_option("--window-length", tr_window, "training window length, slots");
    tr->add_option("--skimming-layers", tr_layers, "number of skimming layers");
    tr->add_option("--patch-size", tr_patch, "attention patch size, slots");
    tr->add_option("--lambda", tr_lambda, "transport-cost weight in [0,1]");
    tr->add_option("--seed", tr_seed, "rng seed");
    tr->add_flag("--disable-skimming", tr_dsk, "single standard-attention layer");
    tr->add_flag("--disable-ot", tr_dot, "skip the transport adjustment");
    tr->add_flag("--disable-picky", tr_dpk, "uniform slot weights (MSE-style)");
    tr->add_option("--threshold-policy", tr_policy, "fixed:<v> | quantile:<q> | best_f1");
    tr->add_option("--train-fraction", tr_fraction, "prefix fraction used for training");
    tr->add_option("--sigma-init-factor", tr_sigf, "gate width init = factor * patch");
    tr->add_option("--sigma-hat-init", tr_sigh, "picky gate width init (0: factor * patch)");

    // score
    auto* sc = app.add_subcommand("score", "score a series with a checkpoint");
    std::string sc_ck, sc_series, sc_scheme, sc_out, sc_policy, sc_train_scores;
    double sc_from = 0.0, sc_to = 1.0;
    sc->add_option("--checkpoint", sc_ck, "checkpoint JSON")->required();
    sc->add_option("--series", sc_series, "series CSV")->required();
    sc->add_option("--scheme", sc_scheme, "scheme JSON (default: sibling)");
    sc->add_option("--out", sc_out, "output scores CSV")->required();
    sc->add_option("--threshold-policy", sc_policy, "fixed:<v> | quantile:<q> (default: checkpoint)");
    sc->add_option("--train-scores", sc_train_scores, "training scores CSV for quantile policies");
    sc->add_option("--from-fraction", sc_from, "emit slots from this fraction");
    sc->add_option("--to-fraction", sc_to, "emit slots up to this fraction");

    // eval
    auto* ev = app.add_subcommand("eval", "precision/recall/F1 of scores against labels");
    std::string ev_scores, ev_labels, ev_out = "metrics.json", ev_policy = "use-pred", ev_train_scores;
    bool ev_adjust = false;
    ev->add_option("--scores", ev_scores, "scores CSV")->required();
    ev->add_option("--labels", ev_labels, "labels CSV")->required();
    ev->add_option("--out", ev_out, "metrics JSON");
    ev->add_option("--policy", ev_policy, "use-pred | best_f1 | fixed:<v> | quantile:<q>");
    ev->add_option("--train-scores", ev_train_scores, "training scores CSV for quantile policies");
    ev->add_flag("--point-adjust", ev_adjust, "segment-level hit counting");

    // verify-theorems
    auto* vt = app.add_subcommand("verify-theorems", "numeric check of the attention-weight identities");
    std::string vt_out;
    vt->add_option("--out", vt_out, "report JSON path");

    // export-plots
    auto* xp = app.add_subcommand("export-plots", "SVG traces for scores, loss, reconstruction, weights");
    std::string xp_scores, xp_labels, xp_ck, xp_series, xp_scheme, xp_out;
    xp->add_option("--scores", xp_scores, "scores CSV");
    xp->add_option("--labels", xp_labels, "labels CSV");
    xp->add_option("--checkpoint", xp_ck, "checkpoint JSON");
    xp->add_option("--series", xp_series, "series CSV for the reconstruction overlay");
    xp->add_option("--scheme", xp_scheme, "scheme JSON (default: sibling)");
    xp->add_option("--out-dir", xp_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_config, gen_out, flag_values, gen_set);
        if (ing->parsed()) return cmd_ingest(ing_events, ing_scheme, ing_slot, ing_start, ing_end, ing_out);
        if (tr->parsed()) {
            sorn::config::RunConfig cfg = resolve_config(tr_config);
            if (tr_lr > 0) cfg.train.learning_rate = tr_lr;
            if (tr_batch > 0) cfg.train.batch_size = tr_batch;
            if (tr_epochs > 0) cfg.train.epochs = tr_epochs;
            if (tr_window > 0) cfg.train.window_length = tr_window;
            if (tr_layers > 0) cfg.train.skimming_layers = tr_layers;
            if (tr_patch > 0) cfg.train.patch_size = tr_patch;
            if (tr_lambda >= 0) cfg.train.lambda = tr_lambda;
            if (tr_seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(tr_seed);
            if (tr_dsk) cfg.train.disable_skimming = true;
            if (tr_dot) cfg.train.disable_ot = true;
            if (tr_dpk) cfg.train.disable_picky = true;
            if (!tr_policy.empty()) cfg.train.threshold_policy = tr_policy;
            if (tr_fraction > 0) cfg.train_fraction = tr_fraction;
            if (tr_sigf > 0) cfg.train.sigma_init_factor = tr_sigf;
            if (tr_sigh >= 0) cfg.train.sigma_hat_init = tr_sigh;
            return cmd_train(tr_series, tr_scheme, cfg, tr_out, tr_parallel);
        }
        if (sc->parsed())
            return cmd_score(sc_ck, sc_series, sc_scheme, sc_out, sc_policy, sc_train_scores, sc_from, sc_to);
        if (ev->parsed())
            return cmd_eval(ev_scores, ev_labels, ev_out, ev_policy, ev_train_scores, ev_adjust);
        if (vt->parsed()) return cmd_verify_theorems(vt_out);
        if (xp->parsed()) return cmd_export_plots(xp_scores, xp_labels, xp_ck, xp_series, xp_scheme, xp_out);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
