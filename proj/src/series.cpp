#include "sorn/series.hpp"

#include <cmath>
#include <stdexcept>

namespace sorn::data {

DistributionSeries bin_events(const std::vector<TaskEvent>& events, const IntervalScheme& scheme,
                              double slot_duration, double span_start, double span_end,
                              BinReport* report) {
    if (!(slot_duration > 0.0)) throw std::invalid_argument("bin_events: slot_duration must be > 0");
    if (!(span_end > span_start)) throw std::invalid_argument("bin_events: empty span");

    const std::size_t slots =
        static_cast<std::size_t>(std::ceil((span_end - span_start) / slot_duration));
    const std::size_t dims = scheme.dims();

    DistributionSeries out;
    out.slot_duration = slot_duration;
    out.counts = diff::Tensor::matrix(slots, dims, 0.0);
    out.timestamps.resize(slots);
    for (std::size_t t = 0; t < slots; ++t) out.timestamps[t] = span_start + static_cast<double>(t) * slot_duration;
    out.missing.assign(slots, 0);

    BinReport local;
    local.total_events = events.size();
    for (std::size_t i = 0; i < events.size(); ++i) {
        const TaskEvent& ev = events[i];
        if (ev.duration < 0.0) {
            local.rejected++;
            if (local.rejections.size() < 32)
                local.rejections.emplace_back(i, "negative duration " + std::to_string(ev.duration));
            continue;
        }
        if (ev.end_timestamp < span_start || ev.end_timestamp >= span_end) {
            local.dropped_out_of_span++;
            continue;
        }
        const int bin = scheme.bin_of(ev.duration);
        if (bin < 0) {
            local.dropped_out_of_span++;  // duration outside every interval
            continue;
        }
        const std::size_t t =
            static_cast<std::size_t>(std::floor((ev.end_timestamp - span_start) / slot_duration));
        out.counts.at(t, static_cast<std::size_t>(bin)) += 1.0;
        local.binned++;
    }
    if (report) *report = local;
    return out;
}

DistributionSeries normalize(const DistributionSeries& series) {
    DistributionSeries out = series;
    const diff::Tensor& src = series.normalized ? series.proportions : series.counts;
    if (src.size() == 0) throw std::invalid_argument("normalize: series has no counts");
    const std::size_t slots = src.rows(), dims = src.cols();

    out.proportions = diff::Tensor::matrix(slots, dims, 0.0);
    out.missing.assign(slots, 0);
    for (std::size_t t = 0; t < slots; ++t) {
        double row_sum = 0.0;
        for (std::size_t d = 0; d < dims; ++d) row_sum += src.at(t, d);
        if (row_sum == 0.0) {
            for (std::size_t d = 0; d < dims; ++d) out.proportions.at(t, d) = 1.0 / static_cast<double>(dims);
            out.missing[t] = 1;
        } else {
            for (std::size_t d = 0; d < dims; ++d) out.proportions.at(t, d) = src.at(t, d) / row_sum;
        }
    }
    // Preserve missing flags of an already-normalized input (rows are
    // re-normalized to the same values; a uniform row is not "missing"
    // evidence by itself).
    if (series.normalized && series.missing.size() == slots) out.missing = series.missing;
    out.normalized = true;
    return out;
}

std::pair<DistributionSeries, DistributionSeries> split(const DistributionSeries& series,
                                                        double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split: train_fraction must be in (0,1)");
    const std::size_t slots = series.slots();
    const std::size_t cut = static_cast<std::size_t>(std::floor(static_cast<double>(slots) * train_fraction));
    if (cut == 0 || cut >= slots)
        throw std::invalid_argument("split: split index " + std::to_string(cut) + " of " +
                                    std::to_string(slots) + " leaves an empty side");

    auto take = [&](std::size_t from, std::size_t to) {
        DistributionSeries part;
        part.slot_duration = series.slot_duration;
        part.normalized = series.normalized;
        const std::size_t n = to - from;
        part.timestamps.assign(series.timestamps.begin() + static_cast<std::ptrdiff_t>(from),
                               series.timestamps.begin() + static_cast<std::ptrdiff_t>(to));
        if (series.missing.size() == slots)
            part.missing.assign(series.missing.begin() + static_cast<std::ptrdiff_t>(from),
                                series.missing.begin() + static_cast<std::ptrdiff_t>(to));
        auto slice = [&](const diff::Tensor& m) {
            if (m.size() == 0) return diff::Tensor();
            diff::Tensor s = diff::Tensor::matrix(n, m.cols(), 0.0);
            for (std::size_t t = 0; t < n; ++t)
                for (std::size_t d = 0; d < m.cols(); ++d) s.at(t, d) = m.at(from + t, d);
            return s;
        };
        part.counts = slice(series.counts);
        part.proportions = slice(series.proportions);
        return part;
    };
    return {take(0, cut), take(cut, slots)};
}

std::pair<LabelSeries, LabelSeries> split(const LabelSeries& labels, std::size_t series_slots,
                                          double train_fraction) {
    if (labels.size() != series_slots)
        throw std::invalid_argument("split: labels length " + std::to_string(labels.size()) +
                                    " does not match series length " + std::to_string(series_slots));
    const std::size_t cut =
        static_cast<std::size_t>(std::floor(static_cast<double>(series_slots) * train_fraction));
    if (cut == 0 || cut >= series_slots) throw std::invalid_argument("split: empty side");
    LabelSeries a, b;
    a.labels.assign(labels.labels.begin(), labels.labels.begin() + static_cast<std::ptrdiff_t>(cut));
    b.labels.assign(labels.labels.begin() + static_cast<std::ptrdiff_t>(cut), labels.labels.end());
    if (labels.timestamps.size() == series_slots) {
        a.timestamps.assign(labels.timestamps.begin(),
                            labels.timestamps.begin() + static_cast<std::ptrdiff_t>(cut));
        b.timestamps.assign(labels.timestamps.begin() + static_cast<std::ptrdiff_t>(cut),
                            labels.timestamps.end());
    }
    return {a, b};
}

double expected_duration(const diff::Tensor& proportions, std::size_t row,
                         const std::vector<double>& midpoints) {
    double acc = 0.0;
    for (std::size_t d = 0; d < midpoints.size(); ++d) acc += proportions.at(row, d) * midpoints[d];
    return acc;
}

}  // namespace sorn::data
