#include "sorn/interval_scheme.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sorn::data {

IntervalScheme::IntervalScheme(std::vector<double> edges, bool with_overflow)
    : edges_(std::move(edges)), overflow_(with_overflow) {
    if (edges_.size() < 2)
        throw std::invalid_argument("IntervalScheme: need at least 2 edges, got " +
                                    std::to_string(edges_.size()));
    for (std::size_t i = 1; i < edges_.size(); ++i)
        if (!(edges_[i] > edges_[i - 1]))
            throw std::invalid_argument("IntervalScheme: edges must be strictly increasing at index " +
                                        std::to_string(i));
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
        midpoints_.push_back(0.5 * (edges_[i] + edges_[i + 1]));
    if (overflow_) midpoints_.push_back(overflow_representative());
}

IntervalScheme IntervalScheme::sync_default() {
    return IntervalScheme({0, 10, 20, 30, 40, 70, 110, 150, 190, 230, 280, 330, 380, 430}, true);
}

double IntervalScheme::overflow_representative() const {
    const std::size_t n = edges_.size();
    return edges_[n - 1] + 0.5 * (edges_[n - 1] - edges_[n - 2]);
}

int IntervalScheme::bin_of(double duration_min) const {
    if (duration_min < edges_.front()) return -1;
    if (duration_min >= edges_.back()) return overflow_ ? static_cast<int>(dims()) - 1 : -1;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), duration_min);
    return static_cast<int>(it - edges_.begin()) - 1;
}

}  // namespace sorn::data
