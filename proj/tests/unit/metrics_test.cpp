#include <gtest/gtest.h>

#include <cmath>

#include "serene/metrics.hpp"
#include "test_support.hpp"

using namespace serene;
using serene::testing::block_roster;
using serene::testing::range_ids;

namespace {

RunTrace trace_with(std::size_t colluding, double activation, std::vector<double> detections) {
    RunTrace t;
    t.roster = block_roster(20, colluding);
    t.config.colluding_fraction = static_cast<double>(colluding) / 20.0;
    t.activation_time = activation;
    for (double d : detections) t.detections.push_back({d, TaskId{}, {}, 0, d < activation});
    return t;
}

MitigationReport report(WorkerSet honest, WorkerSet colluding, WorkerSet malicious = {}) {
    MitigationReport r;
    r.honest = std::move(honest);
    r.colluding = std::move(colluding);
    r.malicious = std::move(malicious);
    r.complete = true;
    return r;
}

}  // namespace

TEST(F1, Examples) {
    EXPECT_DOUBLE_EQ(*f1_score({10, 0, 0, 5}), 1.0);
    EXPECT_NEAR(*f1_score({98, 0, 2, 0}), 0.9899, 1e-4);
    EXPECT_DOUBLE_EQ(*f1_score({0, 3, 4, 0}), 0.0);
    EXPECT_FALSE(f1_score({0, 0, 0, 9}).has_value());
}

TEST(DetectionDelay, Examples) {
    EXPECT_NEAR(*detection_delay(trace_with(10, 10.0, {10.85})), 0.85, 1e-12);
    EXPECT_TRUE(std::isinf(*detection_delay(trace_with(10, 10.0, {}))));
    EXPECT_FALSE(detection_delay(trace_with(0, 10.0, {})).has_value());
    EXPECT_EQ(detection_outcome(trace_with(0, 10.0, {})), DetectionOutcome::TrueNegative);
}

TEST(DetectionDelay, EarlyDeclarationIsFalsePositive) {
    const auto t = trace_with(10, 10.0, {4.0, 11.0});
    EXPECT_EQ(detection_outcome(t), DetectionOutcome::FalsePositive);
    EXPECT_FALSE(detection_delay(t).has_value());
    EXPECT_EQ(detection_outcome(trace_with(0, 10.0, {50.0})), DetectionOutcome::FalsePositive);
}

TEST(MitigationF1, Examples) {
    const auto truth = block_roster(20, 10);
    EXPECT_DOUBLE_EQ(mitigation_f1(report(range_ids(10, 20), range_ids(0, 10)), truth), 1.0);

    auto colluding = range_ids(0, 11);  // honest worker 10 misclassified
    EXPECT_NEAR(mitigation_f1(report(range_ids(11, 20), colluding), truth), 20.0 / 21.0, 1e-12);
    EXPECT_NEAR(20.0 / 21.0, 0.952, 5e-4);

    EXPECT_DOUBLE_EQ(mitigation_f1(report(range_ids(0, 10), range_ids(10, 20)), truth), 0.0);
}

TEST(MitigationF1, MaliciousAndNaiveExcluded) {
    const auto truth = block_roster(20, 10, 2);  // 10 and 11 naive
    // M holds naive 10 and colluder 0; naive 11 mislabeled honest is ignored.
    const auto r = report(range_ids(11, 20), range_ids(1, 10), serene::testing::ids({0, 10}));
    EXPECT_DOUBLE_EQ(mitigation_f1(r, truth), 1.0);
}

TEST(MitigationLatency, Examples) {
    auto t = trace_with(10, 10.0, {10.5});
    t.mitigation = report({}, {});
    t.mitigation->end_time = 12.3;
    EXPECT_NEAR(*mitigation_latency(t), 2.3, 1e-12);
    t.mitigation->complete = false;
    EXPECT_TRUE(std::isinf(*mitigation_latency(t)));
    t.mitigation.reset();
    EXPECT_TRUE(std::isinf(*mitigation_latency(t)));
    EXPECT_FALSE(mitigation_latency(trace_with(0, 10.0, {})).has_value());
}

TEST(MakeRow, IncompleteMitigationScoresZero) {
    auto t = trace_with(10, 10.0, {10.5});
    t.mitigation = report({}, {});
    t.mitigation->complete = false;
    const auto row = make_row(t, "x");
    EXPECT_TRUE(row.mitigation_triggered);
    EXPECT_FALSE(row.mitigation_complete);
    EXPECT_DOUBLE_EQ(*row.mitigation_f1, 0.0);
    EXPECT_TRUE(row.detected);
    EXPECT_EQ(row.cell, "x");
}

TEST(Quantile, Examples) {
    EXPECT_DOUBLE_EQ(*median({4, 1, 3, 2}), 2.5);
    EXPECT_DOUBLE_EQ(*median({1, 2, kInf}), 2.0);
    EXPECT_TRUE(std::isinf(*median({1, kInf})));
    EXPECT_TRUE(std::isinf(*median({1, kInf, kInf})));
    EXPECT_DOUBLE_EQ(*quantile({0, 10}, 0.1), 1.0);
    EXPECT_FALSE(median({}).has_value());
}

TEST(DetectionConfusionProperty, MatchesRecountFromTraces) {
    std::vector<MetricRow> rows;
    Confusion expect;
    for (std::uint64_t seed = 1; seed <= 24; ++seed) {
        ScenarioConfig cfg;
        cfg.colluding_fraction = seed % 4 == 0 ? 0.0 : 0.05 * static_cast<double>(seed % 6 + 1);
        cfg.p_collude = seed % 2 ? 0.1 : 0.5;
        cfg.rng_seed = seed;
        cfg.collusion_start_max = 10.0;
        cfg.sim_end = 15.0;
        const auto t = run(cfg, seed % 3 ? Scheme::Serene : Scheme::Sne8);
        rows.push_back(make_row(t));

        // Recount straight from the trace.
        bool colluders = false;
        for (auto c : t.roster) colluders = colluders || c == WorkerClass::Colluding;
        if (t.detections.empty()) {
            ++(colluders ? expect.fn : expect.tn);
        } else if (!colluders || t.detections[0].time < t.activation_time) {
            ++expect.fp;
            if (colluders) ++expect.fn;
        } else {
            ++expect.tp;
        }
    }
    const auto got = detection_confusion(rows);
    EXPECT_EQ(got.tp, expect.tp);
    EXPECT_EQ(got.fp, expect.fp);
    EXPECT_EQ(got.fn, expect.fn);
    EXPECT_EQ(got.tn, expect.tn);
    EXPECT_GT(expect.tp, 0U);
    EXPECT_GT(expect.tn, 0U);
}
