#include "sorn/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "sorn/scoring.hpp"

namespace sorn::config {

namespace {

const std::set<std::string> kKnownKeys = {
    "learning_rate", "batch_size", "epochs", "window_length", "skimming_layers", "patch_size",
    "lambda", "seed", "disable_skimming", "disable_ot", "disable_picky", "threshold_policy",
    "sigma_init_factor", "sigma_hat_init",
    "tones", "base_duration", "tasks_per_slot", "slots", "edges", "overflow", "slot_duration",
    "noise", "distortion", "segments", "tolerance",
    "train_fraction", "point_adjust",
};

}  // namespace

void RunConfig::validate() const {
    train.validate();
    synth.validate();
    eval::ThresholdPolicy::parse(train.threshold_policy);
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("config: train_fraction must be in (0,1)");
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config: " + path);
    nlohmann::json j = nlohmann::json::parse(f);
    if (!j.is_object()) throw std::runtime_error("config must be a JSON object: " + path);

    for (const auto& [key, _] : j.items())
        if (!kKnownKeys.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

    RunConfig cfg = std::move(base);
    auto& t = cfg.train;
    if (j.contains("learning_rate")) t.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("batch_size")) t.batch_size = j["batch_size"].get<int>();
    if (j.contains("epochs")) t.epochs = j["epochs"].get<int>();
    if (j.contains("window_length")) t.window_length = j["window_length"].get<int>();
    if (j.contains("skimming_layers")) t.skimming_layers = j["skimming_layers"].get<int>();
    if (j.contains("patch_size")) t.patch_size = j["patch_size"].get<int>();
    if (j.contains("lambda")) t.lambda = j["lambda"].get<double>();
    if (j.contains("seed")) {
        t.seed = j["seed"].get<std::uint64_t>();
        cfg.synth.seed = t.seed;
    }
    if (j.contains("disable_skimming")) t.disable_skimming = j["disable_skimming"].get<bool>();
    if (j.contains("disable_ot")) t.disable_ot = j["disable_ot"].get<bool>();
    if (j.contains("disable_picky")) t.disable_picky = j["disable_picky"].get<bool>();
    if (j.contains("threshold_policy")) t.threshold_policy = j["threshold_policy"].get<std::string>();
    if (j.contains("sigma_init_factor")) t.sigma_init_factor = j["sigma_init_factor"].get<double>();
    if (j.contains("sigma_hat_init")) t.sigma_hat_init = j["sigma_hat_init"].get<double>();

    auto& s = cfg.synth;
    if (j.contains("tones")) {
        s.tones.clear();
        for (const auto& pair : j["tones"])
            s.tones.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    if (j.contains("base_duration")) s.base_duration = j["base_duration"].get<double>();
    if (j.contains("tasks_per_slot")) s.tasks_per_slot = j["tasks_per_slot"].get<int>();
    if (j.contains("slots")) {
        s.slots = j["slots"].get<std::size_t>();
        if (!j.contains("segments") && !cfg.explicit_segments)
            s.segments = synth::SynthSpec::default_segments(s.slots);
    }
    if (j.contains("edges") || j.contains("overflow")) {
        std::vector<double> edges =
            j.contains("edges") ? j["edges"].get<std::vector<double>>() : s.scheme.edges();
        bool overflow = j.contains("overflow") ? j["overflow"].get<bool>() : s.scheme.has_overflow();
        s.scheme = data::IntervalScheme(edges, overflow);
    }
    if (j.contains("slot_duration")) s.slot_duration = j["slot_duration"].get<double>();
    if (j.contains("noise")) s.noise = j["noise"].get<double>();
    if (j.contains("distortion")) s.distortion = j["distortion"].get<double>();
    if (j.contains("segments")) {
        s.segments.clear();
        for (const auto& seg : j["segments"])
            s.segments.push_back({seg.at(0).get<std::size_t>(), seg.at(1).get<std::size_t>(),
                                  seg.at(2).get<double>(), seg.at(3).get<double>()});
        cfg.explicit_segments = true;
    }
    if (j.contains("tolerance")) s.tolerance = j["tolerance"].get<double>();

    if (j.contains("train_fraction")) cfg.train_fraction = j["train_fraction"].get<double>();
    if (j.contains("point_adjust")) cfg.point_adjust = j["point_adjust"].get<bool>();
    return cfg;
}

std::string run_config_json(const RunConfig& cfg) {
    nlohmann::json j;
    const auto& t = cfg.train;
    j["learning_rate"] = t.learning_rate;
    j["batch_size"] = t.batch_size;
    j["epochs"] = t.epochs;
    j["window_length"] = t.window_length;
    j["skimming_layers"] = t.skimming_layers;
    j["patch_size"] = t.patch_size;
    j["lambda"] = t.lambda;
    j["seed"] = t.seed;
    j["disable_skimming"] = t.disable_skimming;
    j["disable_ot"] = t.disable_ot;
    j["disable_picky"] = t.disable_picky;
    j["threshold_policy"] = t.threshold_policy;
    j["sigma_init_factor"] = t.sigma_init_factor;
    j["sigma_hat_init"] = t.sigma_hat_init;

    const auto& s = cfg.synth;
    std::vector<std::vector<double>> tones;
    for (const auto& tone : s.tones) tones.push_back({tone.amplitude, tone.period});
    j["tones"] = tones;
    j["base_duration"] = s.base_duration;
    j["tasks_per_slot"] = s.tasks_per_slot;
    j["slots"] = s.slots;
    j["edges"] = s.scheme.edges();
    j["overflow"] = s.scheme.has_overflow();
    j["slot_duration"] = s.slot_duration;
    j["noise"] = s.noise;
    j["distortion"] = s.distortion;
    std::vector<nlohmann::json> segs;
    for (const auto& seg : s.segments)
        segs.push_back({seg.start, seg.length, seg.slow_ratio, seg.avg_slowdown});
    j["segments"] = segs;
    j["tolerance"] = s.tolerance;

    j["train_fraction"] = cfg.train_fraction;
    j["point_adjust"] = cfg.point_adjust;
    return j.dump(2);
}

void write_resolved_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write resolved config: " + path);
    f << run_config_json(cfg) << '\n';
}

}  // namespace sorn::config
