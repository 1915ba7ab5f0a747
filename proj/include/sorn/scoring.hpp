#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sorn/tensor.hpp"

namespace sorn::eval {

/// Expectation-gap anomaly score per slot, in minutes: the expected duration
/// under the observed distribution minus under the reconstruction. Positive
/// means observed tasks run slower than the model expects. Both inputs must
/// be row-normalized within 1e-6.
std::vector<double> anomaly_score(const diff::Tensor& x, const diff::Tensor& recon,
                                  const std::vector<double>& midpoints);

/// Rescales each row to unit mass. The per-dimension attention maps preserve
/// row sums only approximately, so reconstructions are renormalized before
/// they enter the expectation-gap score.
diff::Tensor renormalize_rows(const diff::Tensor& m);

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0;
};

struct ThresholdPolicy {
    enum class Kind { Fixed, Quantile, BestF1 };
    Kind kind = Kind::Quantile;
    double value = 0.99;  // fixed threshold or quantile level

    /// "fixed:<v>", "quantile:<q>", "best_f1".
    static ThresholdPolicy parse(const std::string& text);
    std::string describe() const;
};

/// Empirical quantile over training scores (nearest-rank, upper).
double quantile_threshold(const std::vector<double>& train_scores, double q);

/// prediction[t] = 1 iff score[t] > threshold (one-sided: only slow shifts).
std::vector<int> apply_threshold(const std::vector<double>& scores, double threshold);

/// Point-wise precision/recall/F1; with point_adjust, any hit inside a
/// contiguous labeled segment counts the whole segment as detected.
Metrics evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                 bool point_adjust = false);

struct BestF1Result {
    double threshold = 0.0;
    Metrics metrics;
};

/// Sweeps every distinct score value as a cut point and returns the best F1.
/// Evaluation-only (needs labels).
BestF1Result best_f1_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                               bool point_adjust = false);

/// Resolves a policy into a concrete threshold. Quantile policies need
/// training scores; best_f1 needs labels.
double resolve_threshold(const ThresholdPolicy& policy,
                         const std::optional<std::vector<double>>& train_scores,
                         const std::vector<double>& scores, const std::vector<int>* labels,
                         bool point_adjust = false);

}  // namespace sorn::eval
