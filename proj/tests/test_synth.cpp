#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "sorn/synthgen.hpp"

using namespace sorn::synth;

namespace {

double autocorrelation(const std::vector<double>& x, std::size_t lag) {
    const std::size_t n = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < n; ++t) den += (x[t] - mean) * (x[t] - mean);
    for (std::size_t t = 0; t + lag < n; ++t) num += (x[t] - mean) * (x[t + lag] - mean);
    if (den == 0.0) return 0.0;
    // Normalize both sums by their own term counts.
    return (num / static_cast<double>(n - lag)) / (den / static_cast<double>(n));
}

}  // namespace

TEST_CASE("per-slot mean duration tracks the clean mean curve") {
    SynthSpec spec;
    spec.slots = 1200;
    spec.tones = {{30.0, 96.0}};
    spec.base_duration = 80.0;
    spec.tasks_per_slot = 400;
    spec.segments.clear();
    SynthResult r = generate(spec);

    // Gamma(shape 4) around mu: slot-mean standard error is mu/(2 sqrt(n)).
    std::size_t within = 0;
    for (std::size_t t = 0; t < spec.slots; ++t) {
        const double se = r.mu[t] / (2.0 * std::sqrt(static_cast<double>(spec.tasks_per_slot)));
        if (std::abs(r.slot_mean_duration[t] - r.mu[t]) <= 3.0 * se) ++within;
    }
    CHECK(static_cast<double>(within) / static_cast<double>(spec.slots) >= 0.99);
}

TEST_CASE("zero tones leave no autocorrelation structure") {
    SynthSpec spec;
    spec.slots = 1500;
    spec.tones.clear();
    spec.base_duration = 60.0;
    spec.segments.clear();
    SynthResult r = generate(spec);
    for (std::size_t lag : {7UL, 48UL, 288UL})
        CHECK(std::abs(autocorrelation(r.slot_mean_duration, lag)) < 0.1);
}

TEST_CASE("default scheme dimension is 14 including overflow") {
    SynthSpec spec;
    CHECK(spec.scheme.dims() == 14);
    spec.slots = 20;
    spec.segments.clear();
    SynthResult r = generate(spec);
    CHECK(r.series.counts.cols() == 14);
}

TEST_CASE("zero noise leaves the mean curve bit-identical") {
    SynthSpec spec;
    std::mt19937_64 rng(3);
    std::vector<double> mu = mean_curve(spec);
    std::vector<double> same = inject_noise(mu, 0.0, 40.0, rng);
    CHECK(same == mu);
    CHECK_THROWS_AS(inject_noise(mu, -0.1, 40.0, rng), std::invalid_argument);
}

TEST_CASE("noise standard deviation matches the requested fraction") {
    SynthSpec spec;
    spec.slots = 4000;
    spec.tones = {{40.0, 288.0}};
    spec.base_duration = 400.0;  // headroom so the noise never clips
    std::mt19937_64 rng(11);
    std::vector<double> mu = mean_curve(spec);
    std::vector<double> noisy = inject_noise(mu, 0.5, 40.0, rng);
    double acc = 0.0;
    for (std::size_t t = 0; t < mu.size(); ++t) {
        const double d = noisy[t] - mu[t];
        acc += d * d;
    }
    const double sd = std::sqrt(acc / static_cast<double>(mu.size()));
    CHECK(sd == doctest::Approx(20.0).epsilon(0.10));
}

TEST_CASE("strict periodicity scores high autocorrelation at the period lag") {
    SynthSpec spec;
    spec.slots = 2000;
    spec.tones = {{40.0, 100.0}};
    spec.base_duration = 80.0;
    spec.tasks_per_slot = 400;
    spec.segments.clear();
    spec.distortion = 0.0;
    SynthResult strict = generate(spec);
    const double ac_strict = autocorrelation(strict.slot_mean_duration, 100);
    CHECK(ac_strict >= 0.95);

    spec.distortion = 0.5;
    SynthResult lax = generate(spec);
    const double ac_lax = autocorrelation(lax.slot_mean_duration, 100);
    CHECK(ac_lax < ac_strict);
}

TEST_CASE("stretch scalars stay in (1, 1+R]") {
    std::mt19937_64 rng(17);
    Tone tone{10.0, 48.0};
    ToneTimeline tl = distort_periods(tone, 0.5, 5000, rng);
    CHECK(tl.stretches.size() > 50);
    for (double u : tl.stretches) {
        CHECK(u > 1.0);
        CHECK(u <= 1.5);
    }
    ToneTimeline strict = distort_periods(tone, 0.0, 500, rng);
    for (double u : strict.stretches) CHECK(u == 1.0);
}

TEST_CASE("slow ratio zero yields all-zero labels") {
    SynthSpec spec;
    spec.slots = 600;
    for (auto& seg : spec.segments) seg.slow_ratio = 0.0;
    spec.segments.resize(2);
    spec.segments[0].start = 100;
    spec.segments[1].start = 300;
    SynthResult r = generate(spec);
    for (int label : r.labels.labels) CHECK(label == 0);
}

TEST_CASE("full slow ratio with heavy delay labels every segment slot") {
    SynthSpec spec;
    spec.slots = 600;
    spec.segments = {{100, 5, 1.0, 120.0}, {400, 4, 1.0, 120.0}};
    spec.tolerance = 10.0;
    SynthResult r = generate(spec);
    for (const auto& seg : spec.segments)
        for (std::size_t t = seg.start; t < seg.start + seg.length; ++t) CHECK(r.labels.labels[t] == 1);
    // Labels come from the quantile rule, not segment bookkeeping.
    std::size_t labeled = 0;
    for (int l : r.labels.labels) labeled += static_cast<std::size_t>(l);
    CHECK(labeled == 9);
}

TEST_CASE("sub-tolerance slowdowns stay unlabeled") {
    SynthSpec spec;
    spec.slots = 300;
    spec.segments = {{100, 5, 0.05, 4.0}};  // tiny ratio, delay below tolerance
    spec.tolerance = 10.0;
    SynthResult r = generate(spec);
    std::size_t labeled = 0;
    for (int l : r.labels.labels) labeled += static_cast<std::size_t>(l);
    CHECK(labeled == 0);
}

TEST_CASE("generation is reproducible for a fixed seed") {
    SynthSpec spec;
    spec.slots = 400;
    spec.segments = {{100, 3, 0.4, 120.0}, {250, 3, 0.4, 120.0}};
    spec.noise = 0.2;
    spec.distortion = 0.3;
    spec.seed = 99;
    SynthResult a = generate(spec);
    SynthResult b = generate(spec);
    CHECK(a.series.counts == b.series.counts);
    CHECK(a.labels.labels == b.labels.labels);
    CHECK(a.mu == b.mu);

    spec.seed = 100;
    SynthResult c = generate(spec);
    CHECK(a.series.counts.data() != c.series.counts.data());
}

TEST_CASE("default spec labels about one percent of slots") {
    SynthSpec spec;
    SynthResult r = generate(spec);
    double labeled = 0.0;
    for (int l : r.labels.labels) labeled += l;
    const double ratio = labeled / static_cast<double>(spec.slots);
    CHECK(ratio >= 0.005);
    CHECK(ratio <= 0.015);
}

TEST_CASE("invalid specs are rejected") {
    SynthSpec overlapping;
    overlapping.segments = {{100, 10, 0.5, 60.0}, {105, 10, 0.5, 60.0}};
    CHECK_THROWS_WITH_AS(overlapping.validate(), doctest::Contains("overlap"), std::invalid_argument);

    SynthSpec thin;
    thin.base_duration = 45.0;  // below the 40+10 summed amplitudes
    CHECK_THROWS_AS(thin.validate(), std::invalid_argument);

    SynthSpec negative_noise;
    negative_noise.noise = -0.5;
    CHECK_THROWS_AS(negative_noise.validate(), std::invalid_argument);

    SynthSpec out_of_range;
    out_of_range.segments = {{2990, 20, 0.5, 60.0}};
    CHECK_THROWS_AS(out_of_range.validate(), std::invalid_argument);
}
