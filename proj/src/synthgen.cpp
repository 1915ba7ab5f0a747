#include "sorn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sorn::synth {

std::vector<AnomalySegment> SynthSpec::default_segments(std::size_t slots) {
    std::vector<AnomalySegment> segs;
    for (std::size_t start = 150; start + 3 <= slots; start += 300)
        segs.push_back({start, 3, 0.3, 120.0});
    return segs;
}

void SynthSpec::validate() const {
    double amp_sum = 0.0;
    for (const Tone& tone : tones) {
        if (tone.amplitude < 0.0) throw std::invalid_argument("synth: tone amplitude must be >= 0");
        if (!(tone.period > 0.0)) throw std::invalid_argument("synth: tone period must be > 0");
        amp_sum += tone.amplitude;
    }
    if (!(base_duration > amp_sum))
        throw std::invalid_argument("synth: base_duration must exceed the summed tone amplitudes");
    if (tasks_per_slot < 1) throw std::invalid_argument("synth: tasks_per_slot must be >= 1");
    if (slots < 1) throw std::invalid_argument("synth: slots must be >= 1");
    if (noise < 0.0) throw std::invalid_argument("synth: noise must be >= 0");
    if (distortion < 0.0) throw std::invalid_argument("synth: distortion must be >= 0");
    if (!(tolerance > 0.0)) throw std::invalid_argument("synth: tolerance must be > 0");
    if (!(slot_duration > 0.0)) throw std::invalid_argument("synth: slot_duration must be > 0");
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const AnomalySegment& seg : segments) {
        if (seg.slow_ratio < 0.0 || seg.slow_ratio > 1.0)
            throw std::invalid_argument("synth: slow_ratio must be in [0,1]");
        if (seg.avg_slowdown < 0.0) throw std::invalid_argument("synth: avg_slowdown must be >= 0");
        if (seg.start + seg.length > slots)
            throw std::invalid_argument("synth: segment extends past the series end");
        spans.emplace_back(seg.start, seg.start + seg.length);
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first < spans[i - 1].second)
            throw std::invalid_argument("synth: overlapping anomaly segments");
}

double ToneTimeline::phase_at(double t) const {
    // Cycles are ordered; find the one containing t.
    auto it = std::upper_bound(cycle_starts.begin(), cycle_starts.end(), t);
    std::size_t k = it == cycle_starts.begin() ? 0 : static_cast<std::size_t>(it - cycle_starts.begin()) - 1;
    const double len = period * stretches[k];
    const double frac = (t - cycle_starts[k]) / len;
    return 2.0 * std::numbers::pi * frac;
}

ToneTimeline distort_periods(const Tone& tone, double distortion, std::size_t slots,
                             std::mt19937_64& rng) {
    ToneTimeline tl;
    tl.period = tone.period;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double t = 0.0;
    while (t < static_cast<double>(slots)) {
        // u in (1, 1+R]: flip the half-open end of uniform [0,1).
        const double u = distortion > 0.0 ? 1.0 + distortion * (1.0 - uni(rng)) : 1.0;
        tl.cycle_starts.push_back(t);
        tl.stretches.push_back(u);
        t += tone.period * u;
    }
    return tl;
}

std::vector<double> mean_curve(const SynthSpec& spec) {
    std::vector<double> mu(spec.slots, spec.base_duration);
    for (const Tone& tone : spec.tones)
        for (std::size_t t = 0; t < spec.slots; ++t)
            mu[t] += tone.amplitude *
                     std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / tone.period);
    return mu;
}

std::vector<double> inject_noise(const std::vector<double>& mu, double noise, double max_amplitude,
                                 std::mt19937_64& rng) {
    if (noise < 0.0) throw std::invalid_argument("inject_noise: noise must be >= 0");
    if (noise == 0.0) return mu;
    std::normal_distribution<double> gauss(0.0, noise * max_amplitude);
    std::vector<double> out = mu;
    for (double& v : out) v += gauss(rng);
    return out;
}

namespace {

constexpr double kGammaShape = 4.0;

double max_amplitude(const SynthSpec& spec) {
    double mx = 0.0;
    for (const Tone& tone : spec.tones) mx = std::max(mx, tone.amplitude);
    return mx;
}

std::vector<double> distorted_mean_curve(const SynthSpec& spec, std::mt19937_64& rng) {
    std::vector<ToneTimeline> timelines;
    for (const Tone& tone : spec.tones)
        timelines.push_back(distort_periods(tone, spec.distortion, spec.slots, rng));
    std::vector<double> mu(spec.slots, spec.base_duration);
    for (std::size_t i = 0; i < spec.tones.size(); ++i)
        for (std::size_t t = 0; t < spec.slots; ++t)
            mu[t] += spec.tones[i].amplitude * std::cos(timelines[i].phase_at(static_cast<double>(t)));
    return mu;
}

std::vector<std::vector<double>> sample_tasks(const std::vector<double>& mu, int tasks_per_slot,
                                              std::mt19937_64& rng) {
    std::vector<std::vector<double>> durations(mu.size());
    for (std::size_t t = 0; t < mu.size(); ++t) {
        // Gamma around the mean curve; floor the mean so heavy noise cannot
        // push the sampler into non-positive territory.
        const double mean = std::max(mu[t], 1.0);
        std::gamma_distribution<double> gamma(kGammaShape, mean / kGammaShape);
        durations[t].resize(static_cast<std::size_t>(tasks_per_slot));
        for (double& d : durations[t]) d = gamma(rng);
    }
    return durations;
}

data::DistributionSeries bin_durations(const std::vector<std::vector<double>>& durations,
                                       const SynthSpec& spec) {
    data::DistributionSeries series;
    series.slot_duration = spec.slot_duration;
    series.counts = diff::Tensor::matrix(durations.size(), spec.scheme.dims(), 0.0);
    series.timestamps.resize(durations.size());
    series.missing.assign(durations.size(), 0);
    for (std::size_t t = 0; t < durations.size(); ++t) {
        series.timestamps[t] = static_cast<double>(t) * spec.slot_duration;
        for (double d : durations[t]) {
            const int bin = spec.scheme.bin_of(d);
            if (bin >= 0) series.counts.at(t, static_cast<std::size_t>(bin)) += 1.0;
        }
    }
    return series;
}

double quantile_sorted(const std::vector<double>& sorted, double alpha) {
    const double pos = alpha * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

int label_slot(std::vector<double> clean, std::vector<double> dirty, double tolerance) {
    std::sort(clean.begin(), clean.end());
    std::sort(dirty.begin(), dirty.end());
    double worst = 0.0;
    for (int k = 1; k <= 9; ++k) {
        const double alpha = static_cast<double>(k) / 10.0;
        worst = std::max(worst, quantile_sorted(dirty, alpha) - quantile_sorted(clean, alpha));
    }
    return worst > tolerance ? 1 : 0;
}

GenBase gen_base(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    GenBase out;
    out.mu = mean_curve(spec);
    for (double v : out.mu)
        if (!(v > 0.0)) throw std::invalid_argument("gen_base: non-positive mean duration");
    out.series = bin_durations(sample_tasks(out.mu, spec.tasks_per_slot, rng), spec);
    return out;
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);

    SynthResult out;
    out.mu_clean = mean_curve(spec);
    out.mu = spec.distortion > 0.0 ? distorted_mean_curve(spec, rng) : out.mu_clean;
    out.mu = inject_noise(out.mu, spec.noise, max_amplitude(spec), rng);
    for (double v : out.mu_clean)
        if (!(v > 0.0)) throw std::invalid_argument("generate: non-positive mean duration");

    std::vector<std::vector<double>> durations = sample_tasks(out.mu, spec.tasks_per_slot, rng);
    std::vector<std::vector<double>> clean = durations;

    // Slow a fixed fraction of tasks per segment slot by an exponential delay.
    for (const AnomalySegment& seg : spec.segments) {
        if (seg.avg_slowdown <= 0.0 || seg.slow_ratio <= 0.0) continue;
        std::exponential_distribution<double> delay(1.0 / seg.avg_slowdown);
        for (std::size_t t = seg.start; t < seg.start + seg.length; ++t) {
            auto& slot = durations[t];
            const std::size_t n_slow = static_cast<std::size_t>(
                std::llround(seg.slow_ratio * static_cast<double>(slot.size())));
            // Deterministic subset: shuffle indices with the seeded generator.
            std::vector<std::size_t> idx(slot.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
            std::shuffle(idx.begin(), idx.end(), rng);
            for (std::size_t i = 0; i < n_slow; ++i) slot[idx[i]] += delay(rng);
        }
    }

    out.series = bin_durations(durations, spec);
    out.labels.timestamps = out.series.timestamps;
    out.labels.labels.resize(spec.slots, 0);
    for (std::size_t t = 0; t < spec.slots; ++t)
        out.labels.labels[t] = label_slot(clean[t], durations[t], spec.tolerance);

    out.slot_mean_duration.resize(spec.slots, 0.0);
    for (std::size_t t = 0; t < spec.slots; ++t) {
        double acc = 0.0;
        for (double d : durations[t]) acc += d;
        out.slot_mean_duration[t] = acc / static_cast<double>(durations[t].size());
    }
    return out;
}

}  // namespace sorn::synth
