#pragma once

#include <cstddef>
#include <vector>

namespace sorn::data {

/// Duration-time bins: finite intervals [edges[i], edges[i+1]) in minutes,
/// optionally followed by an overflow interval [edges.back(), inf).
class IntervalScheme {
public:
    IntervalScheme() = default;
    IntervalScheme(std::vector<double> edges, bool with_overflow);

    /// The stock scheme used by the synthetic generator:
    /// edges {0,10,20,30,40,70,110,150,190,230,280,330,380,430} plus overflow,
    /// 14 bins total.
    static IntervalScheme sync_default();

    std::size_t dims() const { return midpoints_.size(); }
    const std::vector<double>& edges() const { return edges_; }
    bool has_overflow() const { return overflow_; }

    /// Bin representatives: midpoints of finite intervals; the overflow bin
    /// is represented by last_edge + half the last finite width.
    const std::vector<double>& midpoints() const { return midpoints_; }
    double overflow_representative() const;

    /// Bin index for a duration, or -1 when the duration falls outside every
    /// bin (possible only without overflow, or below the first edge).
    /// Intervals are left-closed, right-open.
    int bin_of(double duration_min) const;

    bool operator==(const IntervalScheme& other) const {
        return edges_ == other.edges_ && overflow_ == other.overflow_;
    }

private:
    std::vector<double> edges_;
    bool overflow_ = false;
    std::vector<double> midpoints_;
};

}  // namespace sorn::data
