#pragma once

#include <string>
#include <vector>

#include "sorn/interval_scheme.hpp"
#include "sorn/series.hpp"

namespace sorn::data {

struct EventParseReport {
    std::size_t total_rows = 0;
    std::size_t parsed = 0;
    std::size_t malformed = 0;
    std::vector<std::pair<std::size_t, std::string>> errors;  // (line number, reason), capped
};

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

// events CSV: task_id,end_timestamp,duration_min
std::vector<TaskEvent> read_events_csv(const std::string& path, EventParseReport* report = nullptr);
void write_events_csv(const std::string& path, const std::vector<TaskEvent>& events);

// series CSV: timestamp,bin_0,...,bin_{D-1}; values are counts or proportions
// depending on the normalized flag recorded in the sibling scheme JSON.
void write_series_csv(const std::string& path, const DistributionSeries& series);
DistributionSeries read_series_csv(const std::string& path, bool normalized);

// scheme JSON sidecar: edges, overflow, slot_duration, normalized.
void write_scheme_json(const std::string& path, const IntervalScheme& scheme,
                       double slot_duration, bool normalized);
struct SchemeSidecar {
    IntervalScheme scheme;
    double slot_duration = 0.0;
    bool normalized = false;
};
SchemeSidecar read_scheme_json(const std::string& path);

// labels CSV: timestamp,label
void write_labels_csv(const std::string& path, const LabelSeries& labels);
LabelSeries read_labels_csv(const std::string& path);

// score CSV: timestamp,score,prediction
struct ScoreRows {
    std::vector<double> timestamps;
    std::vector<double> scores;
    std::vector<int> predictions;
};
void write_scores_csv(const std::string& path, const ScoreRows& rows);
ScoreRows read_scores_csv(const std::string& path);

/// Default sidecar path: "<series>.scheme.json" next to the series file.
std::string default_scheme_path(const std::string& series_path);

}  // namespace sorn::data
