#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sorn/interval_scheme.hpp"
#include "sorn/series.hpp"

namespace sorn::synth {

struct Tone {
    double amplitude = 0.0;  // minutes
    double period = 1.0;     // slots
};

struct AnomalySegment {
    std::size_t start = 0;
    std::size_t length = 0;
    double slow_ratio = 0.0;     // fraction of tasks slowed per slot
    double avg_slowdown = 0.0;   // minutes, mean of the added exponential delay
};

struct SynthSpec {
    std::vector<Tone> tones{{40.0, 288.0}, {10.0, 48.0}};
    double base_duration = 60.0;  // minutes
    int tasks_per_slot = 500;
    std::size_t slots = 3000;
    data::IntervalScheme scheme = data::IntervalScheme::sync_default();
    double slot_duration = 5.0;  // minutes
    double noise = 0.0;          // fraction of the maximum tone amplitude
    double distortion = 0.0;     // R: per-period stretch sampled from (1, 1+R]
    std::vector<AnomalySegment> segments = default_segments();
    double tolerance = 10.0;  // minutes, labeling tolerance
    std::uint64_t seed = 1;

    /// Three-slot segments every 300 slots starting at 150 (about 1% of
    /// slots at any length).
    static std::vector<AnomalySegment> default_segments(std::size_t slots = 3000);
    void validate() const;
};

/// Stretched timeline of one tone: cycle k covers
/// [cycle_start[k], cycle_start[k] + period * stretch[k]).
struct ToneTimeline {
    std::vector<double> cycle_starts;
    std::vector<double> stretches;
    double period = 1.0;

    double phase_at(double t) const;  // in [0, 2*pi)
};

/// Per-period stretch factors sampled uniformly from (1, 1+R]; R = 0 leaves
/// strict periodicity.
ToneTimeline distort_periods(const Tone& tone, double distortion, std::size_t slots,
                             std::mt19937_64& rng);

/// Strict compound-periodic mean curve (no distortion, no noise).
std::vector<double> mean_curve(const SynthSpec& spec);

/// Adds zero-mean Gaussian with std = noise * max tone amplitude to the mean
/// curve. noise = 0 returns the input bit-identically.
std::vector<double> inject_noise(const std::vector<double>& mu, double noise, double max_amplitude,
                                 std::mt19937_64& rng);

struct SynthResult {
    data::DistributionSeries series;  // counts
    data::LabelSeries labels;
    std::vector<double> mu;           // effective mean curve used for sampling
    std::vector<double> mu_clean;     // strict tones only
    std::vector<double> slot_mean_duration;  // empirical per-slot mean (post-injection)
};

struct GenBase {
    data::DistributionSeries series;
    std::vector<double> mu;
};

/// Strict tones only: per-slot gamma(shape 4) samples around mu(t), binned.
GenBase gen_base(const SynthSpec& spec);

/// Full pipeline: distorted tones -> noisy mean -> gamma task durations ->
/// slowdown injection -> binning -> quantile-rule labels against the
/// pre-injection sample.
SynthResult generate(const SynthSpec& spec);

/// The labeling rule of the generator: 1 iff the maximum decile-quantile gap
/// between the post- and pre-injection duration samples exceeds tolerance.
int label_slot(std::vector<double> clean, std::vector<double> dirty, double tolerance);

}  // namespace sorn::synth
