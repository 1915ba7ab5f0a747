#include "sorn/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sorn::data {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_num(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e && !s.empty();
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<TaskEvent> read_events_csv(const std::string& path, EventParseReport* report) {
    auto f = open_in(path);
    std::string line;
    EventParseReport rep;
    std::vector<TaskEvent> events;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("task_id,", 0) == 0) continue;  // header row
        }
        ++rep.total_rows;
        auto fields = split_fields(line);
        TaskEvent ev;
        double ts = 0.0, dur = 0.0;
        if (fields.size() != 3 || !parse_num(fields[1], ts) || !parse_num(fields[2], dur)) {
            ++rep.malformed;
            if (rep.errors.size() < 32) rep.errors.emplace_back(line_no, "unparseable row");
            continue;
        }
        ev.task_id = fields[0];
        ev.end_timestamp = ts;
        ev.duration = dur;
        events.push_back(std::move(ev));
        ++rep.parsed;
    }
    if (report) *report = rep;
    return events;
}

void write_events_csv(const std::string& path, const std::vector<TaskEvent>& events) {
    auto f = open_out(path);
    f << "task_id,end_timestamp,duration_min\n";
    for (const auto& ev : events)
        f << ev.task_id << ',' << format_double(ev.end_timestamp) << ',' << format_double(ev.duration)
          << '\n';
}

void write_series_csv(const std::string& path, const DistributionSeries& series) {
    const diff::Tensor& m = series.normalized ? series.proportions : series.counts;
    if (m.size() == 0) throw std::invalid_argument("write_series_csv: series is empty");
    auto f = open_out(path);
    f << "timestamp";
    for (std::size_t d = 0; d < m.cols(); ++d) f << ",bin_" << d;
    f << '\n';
    for (std::size_t t = 0; t < m.rows(); ++t) {
        f << format_double(series.timestamps[t]);
        for (std::size_t d = 0; d < m.cols(); ++d) f << ',' << format_double(m.at(t, d));
        f << '\n';
    }
}

DistributionSeries read_series_csv(const std::string& path, bool normalized) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty series CSV: " + path);
    auto header = split_fields(line);
    if (header.size() < 2 || header[0] != "timestamp")
        throw std::runtime_error("series CSV header must be timestamp,bin_0,...: " + path);
    const std::size_t dims = header.size() - 1;

    std::vector<double> timestamps;
    std::vector<double> values;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != dims + 1)
            throw std::runtime_error("series CSV row has " + std::to_string(fields.size()) +
                                     " fields, expected " + std::to_string(dims + 1));
        double ts = 0.0;
        if (!parse_num(fields[0], ts)) throw std::runtime_error("bad timestamp: " + fields[0]);
        timestamps.push_back(ts);
        for (std::size_t d = 0; d < dims; ++d) {
            double v = 0.0;
            if (!parse_num(fields[d + 1], v)) throw std::runtime_error("bad value: " + fields[d + 1]);
            values.push_back(v);
        }
    }
    DistributionSeries out;
    out.timestamps = std::move(timestamps);
    diff::Tensor m({out.timestamps.size(), dims}, std::move(values));
    if (normalized) {
        out.proportions = std::move(m);
        out.normalized = true;
    } else {
        out.counts = std::move(m);
    }
    out.missing.assign(out.timestamps.size(), 0);
    if (out.timestamps.size() >= 2) out.slot_duration = out.timestamps[1] - out.timestamps[0];
    return out;
}

void write_scheme_json(const std::string& path, const IntervalScheme& scheme, double slot_duration,
                       bool normalized) {
    nlohmann::json j;
    j["edges"] = scheme.edges();
    j["overflow"] = scheme.has_overflow();
    j["slot_duration"] = slot_duration;
    j["normalized"] = normalized;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

SchemeSidecar read_scheme_json(const std::string& path) {
    auto f = open_in(path);
    nlohmann::json j = nlohmann::json::parse(f);
    SchemeSidecar sc;
    sc.scheme = IntervalScheme(j.at("edges").get<std::vector<double>>(), j.at("overflow").get<bool>());
    sc.slot_duration = j.at("slot_duration").get<double>();
    sc.normalized = j.value("normalized", false);
    return sc;
}

void write_labels_csv(const std::string& path, const LabelSeries& labels) {
    auto f = open_out(path);
    f << "timestamp,label\n";
    for (std::size_t t = 0; t < labels.size(); ++t) {
        const double ts = t < labels.timestamps.size() ? labels.timestamps[t] : static_cast<double>(t);
        f << format_double(ts) << ',' << labels.labels[t] << '\n';
    }
}

LabelSeries read_labels_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty labels CSV: " + path);
    LabelSeries out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 2) throw std::runtime_error("labels CSV row needs 2 fields");
        double ts = 0.0, lab = 0.0;
        if (!parse_num(fields[0], ts) || !parse_num(fields[1], lab))
            throw std::runtime_error("bad labels row: " + line);
        out.timestamps.push_back(ts);
        out.labels.push_back(lab != 0.0 ? 1 : 0);
    }
    return out;
}

void write_scores_csv(const std::string& path, const ScoreRows& rows) {
    auto f = open_out(path);
    f << "timestamp,score,prediction\n";
    for (std::size_t t = 0; t < rows.scores.size(); ++t)
        f << format_double(rows.timestamps[t]) << ',' << format_double(rows.scores[t]) << ','
          << rows.predictions[t] << '\n';
}

ScoreRows read_scores_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty scores CSV: " + path);
    ScoreRows out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != 3) throw std::runtime_error("scores CSV row needs 3 fields");
        double ts = 0.0, sc = 0.0, pred = 0.0;
        if (!parse_num(fields[0], ts) || !parse_num(fields[1], sc) || !parse_num(fields[2], pred))
            throw std::runtime_error("bad scores row: " + line);
        out.timestamps.push_back(ts);
        out.scores.push_back(sc);
        out.predictions.push_back(pred != 0.0 ? 1 : 0);
    }
    return out;
}

std::string default_scheme_path(const std::string& series_path) {
    const std::string suffix = ".csv";
    if (series_path.size() > suffix.size() &&
        series_path.compare(series_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return series_path.substr(0, series_path.size() - suffix.size()) + ".scheme.json";
    return series_path + ".scheme.json";
}

}  // namespace sorn::data
