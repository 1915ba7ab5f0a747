#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <random>

#include "doctest.h"
#include "sorn/csv_io.hpp"
#include "sorn/interval_scheme.hpp"
#include "sorn/series.hpp"

using namespace sorn::data;
using sorn::diff::Tensor;

TEST_CASE("sync scheme has 14 bins and increasing midpoints") {
    IntervalScheme scheme = IntervalScheme::sync_default();
    CHECK(scheme.dims() == 14);
    const auto& mids = scheme.midpoints();
    CHECK(mids[0] == 5.0);
    CHECK(mids[1] == 15.0);
    CHECK(mids.back() == 455.0);  // 430 + half the last 50-minute width
    for (std::size_t i = 1; i < mids.size(); ++i) CHECK(mids[i] > mids[i - 1]);
}

TEST_CASE("edges must be strictly increasing") {
    CHECK_THROWS_AS(IntervalScheme({0, 10, 10, 20}, false), std::invalid_argument);
    CHECK_THROWS_AS(IntervalScheme({5}, false), std::invalid_argument);
}

TEST_CASE("binning drops, rejects and counts as reported") {
    IntervalScheme scheme({0, 10, 20, 30}, false);
    std::vector<TaskEvent> events = {
        {"a", 5.0, 15.0},    // slot 0, bin [10,20)
        {"b", 5.0, 10.0},    // boundary duration 10 -> left-closed bin [10,20)
        {"c", 25.0, 31.0},   // duration outside the last edge, no overflow -> dropped
        {"d", -1.0, 5.0},    // before span
        {"e", 40.0, 5.0},    // at span end -> dropped
        {"f", 12.0, -2.0},   // negative duration -> rejected
    };
    BinReport report;
    DistributionSeries s = bin_events(events, scheme, 10.0, 0.0, 40.0, &report);
    CHECK(s.slots() == 4);
    CHECK(s.counts.at(0, 1) == 2.0);
    CHECK(report.total_events == 6);
    CHECK(report.binned == 2);
    CHECK(report.dropped_out_of_span == 3);
    CHECK(report.rejected == 1);
    REQUIRE(report.rejections.size() == 1);
    CHECK(report.rejections[0].first == 5);
}

TEST_CASE("duration 15 lands in the second sync bin; overflow catches the tail") {
    IntervalScheme scheme = IntervalScheme::sync_default();
    std::vector<TaskEvent> events = {{"a", 1.0, 15.0}, {"b", 1.0, 9000.0}};
    DistributionSeries s = bin_events(events, scheme, 5.0, 0.0, 5.0);
    CHECK(s.counts.at(0, 1) == 1.0);
    CHECK(s.counts.at(0, 13) == 1.0);
}

TEST_CASE("empty event list bins to all zeros") {
    DistributionSeries s = bin_events({}, IntervalScheme::sync_default(), 5.0, 0.0, 25.0);
    CHECK(s.slots() == 5);
    for (std::size_t i = 0; i < s.counts.size(); ++i) CHECK(s.counts[i] == 0.0);
}

TEST_CASE("binning conserves mass") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ts(0.0, 500.0), dur(0.0, 600.0);
    IntervalScheme scheme = IntervalScheme::sync_default();
    std::vector<TaskEvent> events;
    for (int i = 0; i < 5000; ++i) events.push_back({"t", ts(rng), dur(rng)});
    BinReport report;
    DistributionSeries s = bin_events(events, scheme, 10.0, 0.0, 500.0, &report);
    double total = 0.0;
    for (std::size_t i = 0; i < s.counts.size(); ++i) total += s.counts[i];
    CHECK(total == doctest::Approx(static_cast<double>(report.binned)));
    CHECK(report.binned + report.dropped_out_of_span + report.rejected == report.total_events);
}

TEST_CASE("normalize divides rows and flags all-zero slots") {
    DistributionSeries s;
    s.timestamps = {0.0, 5.0};
    s.slot_duration = 5.0;
    s.counts = Tensor({2, 4}, {2, 2, 0, 0, 0, 0, 0, 0});
    DistributionSeries n = normalize(s);
    CHECK(n.proportions.at(0, 0) == 0.5);
    CHECK(n.proportions.at(0, 1) == 0.5);
    CHECK(n.proportions.at(1, 2) == 0.25);
    CHECK(n.missing[0] == 0);
    CHECK(n.missing[1] == 1);

    DistributionSeries again = normalize(n);  // idempotent
    CHECK(again.proportions == n.proportions);
    CHECK(again.missing == n.missing);
}

TEST_CASE("normalized expectation stays within the midpoint range") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mass(0.0, 9.0);
    IntervalScheme scheme = IntervalScheme::sync_default();
    DistributionSeries s;
    s.timestamps = {0};
    s.counts = Tensor::matrix(1, scheme.dims(), 0.0);
    for (int rep = 0; rep < 50; ++rep) {
        for (std::size_t d = 0; d < scheme.dims(); ++d) s.counts.at(0, d) = std::floor(mass(rng));
        DistributionSeries n = normalize(s);
        const double e = expected_duration(n.proportions, 0, scheme.midpoints());
        CHECK(e >= scheme.midpoints().front());
        CHECK(e <= scheme.midpoints().back());
    }
}

TEST_CASE("split takes a contiguous prefix") {
    DistributionSeries s;
    for (int t = 0; t < 10; ++t) s.timestamps.push_back(t * 5.0);
    s.slot_duration = 5.0;
    s.counts = Tensor::matrix(10, 2, 1.0);
    auto [train, test] = split(s, 0.7);
    CHECK(train.slots() == 7);
    CHECK(test.slots() == 3);
    CHECK(test.timestamps[0] == 35.0);

    DistributionSeries tiny;
    tiny.timestamps = {0, 1, 2};
    tiny.counts = Tensor::matrix(3, 2, 1.0);
    auto [a, b] = split(tiny, 0.7);
    CHECK(a.slots() == 2);
    CHECK(b.slots() == 1);
}

TEST_CASE("split rejects empty sides and mismatched labels") {
    DistributionSeries s;
    s.timestamps = {0.0};
    s.counts = Tensor::matrix(1, 2, 1.0);
    CHECK_THROWS_AS(split(s, 0.7), std::invalid_argument);

    LabelSeries labels;
    labels.labels = {0, 1};
    CHECK_THROWS_AS(split(labels, 10, 0.7), std::invalid_argument);
}

TEST_CASE("series CSV round trip is bit-identical") {
    IntervalScheme scheme({0, 10, 20}, true);
    DistributionSeries s;
    s.timestamps = {0.0, 7.5, 15.0};
    s.slot_duration = 7.5;
    s.counts = Tensor({3, 3}, {1, 0, 2, 5, 3, 1, 0, 0, 4});
    const std::string path = "roundtrip_series.csv";
    write_series_csv(path, s);
    write_scheme_json(default_scheme_path(path), scheme, s.slot_duration, false);

    DistributionSeries back = read_series_csv(path, false);
    SchemeSidecar sidecar = read_scheme_json(default_scheme_path(path));
    CHECK(back.counts == s.counts);
    CHECK(back.timestamps == s.timestamps);
    CHECK(sidecar.scheme == scheme);
    CHECK(sidecar.slot_duration == 7.5);
    std::remove(path.c_str());
    std::remove(default_scheme_path(path).c_str());
}

TEST_CASE("labels and scores CSV round trip") {
    LabelSeries labels;
    labels.timestamps = {0, 5, 10};
    labels.labels = {0, 1, 0};
    write_labels_csv("rt_labels.csv", labels);
    LabelSeries back = read_labels_csv("rt_labels.csv");
    CHECK(back.labels == labels.labels);
    CHECK(back.timestamps == labels.timestamps);
    std::remove("rt_labels.csv");

    ScoreRows rows;
    rows.timestamps = {0, 5};
    rows.scores = {1.25, -0.5};
    rows.predictions = {1, 0};
    write_scores_csv("rt_scores.csv", rows);
    ScoreRows rows_back = read_scores_csv("rt_scores.csv");
    CHECK(rows_back.scores == rows.scores);
    CHECK(rows_back.predictions == rows.predictions);
    std::remove("rt_scores.csv");
}

TEST_CASE("event CSV reports malformed rows with line numbers") {
    {
        std::FILE* f = std::fopen("rt_events.csv", "w");
        std::fputs("task_id,end_timestamp,duration_min\nt1,5,12.5\nbroken,row\nt2,9,x\nt3,11,30\n", f);
        std::fclose(f);
    }
    EventParseReport report;
    auto events = read_events_csv("rt_events.csv", &report);
    CHECK(events.size() == 2);
    CHECK(report.malformed == 2);
    REQUIRE(report.errors.size() == 2);
    CHECK(report.errors[0].first == 3);
    CHECK(report.errors[1].first == 4);
    std::remove("rt_events.csv");
}
