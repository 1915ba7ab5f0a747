#include "sorn/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sorn::eval {

std::vector<double> anomaly_score(const diff::Tensor& x, const diff::Tensor& recon,
                                  const std::vector<double>& midpoints) {
    if (!x.same_shape(recon))
        throw std::invalid_argument("anomaly_score: shape mismatch " + x.shape_str() + " vs " +
                                    recon.shape_str());
    const std::size_t slots = x.rows(), dims = x.cols();
    if (dims != midpoints.size()) throw std::invalid_argument("anomaly_score: midpoint count mismatch");
    for (std::size_t t = 0; t < slots; ++t) {
        double sx = 0.0, sr = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            sx += x.at(t, d);
            sr += recon.at(t, d);
        }
        if (std::abs(sx - 1.0) > 1e-6 || std::abs(sr - 1.0) > 1e-6)
            throw std::invalid_argument("anomaly_score: row " + std::to_string(t) +
                                        " not normalized within 1e-6");
    }

    std::vector<double> scores(slots, 0.0);
    for (std::size_t t = 0; t < slots; ++t) {
        double ex = 0.0, er = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            ex += x.at(t, d) * midpoints[d];
            er += recon.at(t, d) * midpoints[d];
        }
        scores[t] = ex - er;
    }
    return scores;
}

diff::Tensor renormalize_rows(const diff::Tensor& m) {
    diff::Tensor out = m;
    for (std::size_t t = 0; t < m.rows(); ++t) {
        double sum = 0.0;
        for (std::size_t d = 0; d < m.cols(); ++d) sum += m.at(t, d);
        if (!(sum > 0.0))
            throw std::invalid_argument("renormalize_rows: row " + std::to_string(t) +
                                        " has non-positive mass " + std::to_string(sum));
        for (std::size_t d = 0; d < m.cols(); ++d) out.at(t, d) = m.at(t, d) / sum;
    }
    return out;
}

ThresholdPolicy ThresholdPolicy::parse(const std::string& text) {
    ThresholdPolicy p;
    if (text == "best_f1") {
        p.kind = Kind::BestF1;
        return p;
    }
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    if (colon == std::string::npos || colon + 1 >= text.size())
        throw std::invalid_argument("threshold policy: expected fixed:<v>, quantile:<q> or best_f1, got '" +
                                    text + "'");
    const double v = std::stod(text.substr(colon + 1));
    if (head == "fixed") {
        p.kind = Kind::Fixed;
        p.value = v;
    } else if (head == "quantile") {
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("threshold policy: quantile must be in [0,1]");
        p.kind = Kind::Quantile;
        p.value = v;
    } else {
        throw std::invalid_argument("threshold policy: unknown kind '" + head + "'");
    }
    return p;
}

std::string ThresholdPolicy::describe() const {
    switch (kind) {
        case Kind::Fixed: return "fixed:" + std::to_string(value);
        case Kind::Quantile: return "quantile:" + std::to_string(value);
        case Kind::BestF1: return "best_f1";
    }
    return "?";
}

double quantile_threshold(const std::vector<double>& train_scores, double q) {
    if (train_scores.empty())
        throw std::invalid_argument("quantile_threshold: no training scores available");
    std::vector<double> sorted = train_scores;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::size_t idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(n)));
    if (idx >= n) idx = n - 1;
    return sorted[idx];
}

std::vector<int> apply_threshold(const std::vector<double>& scores, double threshold) {
    std::vector<int> preds(scores.size(), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] > threshold ? 1 : 0;
    return preds;
}

namespace {

std::vector<int> point_adjusted(const std::vector<int>& preds, const std::vector<int>& labels) {
    std::vector<int> adj = preds;
    std::size_t i = 0;
    const std::size_t n = labels.size();
    while (i < n) {
        if (labels[i] == 1) {
            std::size_t j = i;
            while (j < n && labels[j] == 1) ++j;
            bool hit = false;
            for (std::size_t k = i; k < j && !hit; ++k) hit = preds[k] == 1;
            if (hit)
                for (std::size_t k = i; k < j; ++k) adj[k] = 1;
            i = j;
        } else {
            ++i;
        }
    }
    return adj;
}

}  // namespace

Metrics evaluate(const std::vector<int>& predictions, const std::vector<int>& labels,
                 bool point_adjust) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("evaluate: predictions length " + std::to_string(predictions.size()) +
                                    " != labels length " + std::to_string(labels.size()));
    const std::vector<int> preds = point_adjust ? point_adjusted(predictions, labels) : predictions;

    Metrics m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (preds[i] == 1 && labels[i] == 1) ++m.tp;
        else if (preds[i] == 1 && labels[i] == 0) ++m.fp;
        else if (preds[i] == 0 && labels[i] == 1) ++m.fn;
    }
    m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

BestF1Result best_f1_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                               bool point_adjust) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("best_f1_threshold: need matching non-empty scores and labels");
    std::vector<double> candidates = scores;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    BestF1Result best;
    best.threshold = candidates.back();
    bool first = true;
    for (double cut : candidates) {
        const Metrics m = evaluate(apply_threshold(scores, cut), labels, point_adjust);
        if (first || m.f1 > best.metrics.f1) {
            best.metrics = m;
            best.threshold = cut;
            first = false;
        }
    }
    return best;
}

double resolve_threshold(const ThresholdPolicy& policy,
                         const std::optional<std::vector<double>>& train_scores,
                         const std::vector<double>& scores, const std::vector<int>* labels,
                         bool point_adjust) {
    switch (policy.kind) {
        case ThresholdPolicy::Kind::Fixed:
            return policy.value;
        case ThresholdPolicy::Kind::Quantile:
            if (!train_scores)
                throw std::invalid_argument("quantile threshold policy requires training scores");
            return quantile_threshold(*train_scores, policy.value);
        case ThresholdPolicy::Kind::BestF1:
            if (!labels) throw std::invalid_argument("best_f1 policy requires labels (eval-only)");
            return best_f1_threshold(scores, *labels, point_adjust).threshold;
    }
    throw std::logic_error("resolve_threshold: unreachable");
}

}  // namespace sorn::eval
