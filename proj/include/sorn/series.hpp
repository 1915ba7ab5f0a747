#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sorn/interval_scheme.hpp"
#include "sorn/tensor.hpp"

namespace sorn::data {

/// One finished task, the ingestion precursor to a binned series.
struct TaskEvent {
    std::string task_id;
    double end_timestamp = 0.0;  // minutes since epoch
    double duration = 0.0;       // minutes, >= 0
};

/// Per-slot binary labels, 1 = cluster-wide slowdown.
struct LabelSeries {
    std::vector<double> timestamps;
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
};

/// T x D series of per-slot duration-time distributions. Carries raw counts
/// and, after normalize(), row-stochastic proportions. All-zero slots
/// normalize to uniform and are flagged missing.
struct DistributionSeries {
    std::vector<double> timestamps;  // slot start times, uniform step
    double slot_duration = 0.0;      // minutes
    diff::Tensor counts;             // T x D
    diff::Tensor proportions;        // T x D, valid when normalized
    bool normalized = false;
    std::vector<std::uint8_t> missing;  // per-slot flag

    std::size_t slots() const { return timestamps.size(); }
    std::size_t dims() const { return counts.size() ? counts.cols() : proportions.cols(); }
};

struct BinReport {
    std::size_t total_events = 0;
    std::size_t binned = 0;
    std::size_t dropped_out_of_span = 0;
    std::size_t rejected = 0;
    std::vector<std::pair<std::size_t, std::string>> rejections;  // (event index, reason), capped
};

/// Bins events into per-slot duration counts over [span_start, span_end).
/// Durations land in left-closed right-open intervals; durations past the
/// last edge go to the overflow bin when the scheme has one.
DistributionSeries bin_events(const std::vector<TaskEvent>& events, const IntervalScheme& scheme,
                              double slot_duration, double span_start, double span_end,
                              BinReport* report = nullptr);

/// Row-normalizes counts into proportions. All-zero rows become uniform 1/D
/// and are flagged missing. Idempotent on already-normalized series.
DistributionSeries normalize(const DistributionSeries& series);

/// Contiguous prefix split at floor(T * train_fraction); labels split the
/// same way. Throws when either side would be empty or lengths mismatch.
std::pair<DistributionSeries, DistributionSeries> split(const DistributionSeries& series,
                                                        double train_fraction);
std::pair<LabelSeries, LabelSeries> split(const LabelSeries& labels, std::size_t series_slots,
                                          double train_fraction);

/// Expectation of the slot's duration distribution in minutes.
double expected_duration(const diff::Tensor& proportions, std::size_t row,
                         const std::vector<double>& midpoints);

}  // namespace sorn::data
