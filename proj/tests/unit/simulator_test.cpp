#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "serene/config.hpp"
#include "serene/simulator.hpp"

using namespace serene;

namespace {

ScenarioConfig quick(double colluding, double pc, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.colluding_fraction = colluding;
    cfg.p_collude = pc;
    cfg.rng_seed = seed;
    // Early activation keeps each run short.
    cfg.collusion_start_min = 3.0;
    cfg.collusion_start_max = 8.0;
    return cfg;
}

}  // namespace

TEST(Schemes, NamesRoundTrip) {
    for (auto s : {Scheme::Serene, Scheme::SerenePrt, Scheme::SerenePrtG1, Scheme::Sne8, Scheme::Sne12})
        EXPECT_EQ(parse_scheme(to_string(s)), s);
    EXPECT_EQ(parse_scheme("partitioning-only"), Scheme::SerenePrt);
    EXPECT_EQ(parse_scheme("group-identification"), Scheme::SerenePrtG1);
    EXPECT_THROW(parse_scheme("minctc"), ConfigError);
    EXPECT_TRUE(is_sne(Scheme::Sne8));
    EXPECT_FALSE(is_sne(Scheme::SerenePrt));
}

TEST(Simulator, ControlRunGeneratesEveryGenuineTask) {
    ScenarioConfig cfg;
    cfg.colluding_fraction = 0.0;
    cfg.rng_seed = 3;
    const auto t = run(cfg, Scheme::Serene);
    EXPECT_EQ(t.stats.genuine_generated, 100000U);
    EXPECT_TRUE(t.detections.empty());
    EXPECT_FALSE(t.mitigation.has_value());
    EXPECT_DOUBLE_EQ(t.stats.end_time, 100.0);
}

TEST(Simulator, ActivationWithinWindow) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ScenarioConfig cfg;
        cfg.colluding_fraction = 0.5;
        cfg.p_collude = 0.9;
        cfg.rng_seed = seed;
        const auto t = run(cfg, Scheme::Serene);
        EXPECT_GE(t.activation_time, 3.0);
        EXPECT_LE(t.activation_time, 90.0);
    }
}

TEST(Simulator, DetectsAndMitigatesMajorityRing) {
    const auto t = run(quick(0.7, 0.5, 4), Scheme::Serene);
    ASSERT_FALSE(t.detections.empty());
    EXPECT_GE(t.detections.front().time, t.activation_time);
    EXPECT_FALSE(t.detections.front().triggering.empty());
    ASSERT_TRUE(t.mitigation.has_value());
    EXPECT_TRUE(t.mitigation->complete);
    EXPECT_GE(t.mitigation->start_time, t.detections.front().time);
    EXPECT_DOUBLE_EQ(t.stats.end_time, t.mitigation->end_time);
}

TEST(Simulator, SneMitigationIsItsDetection) {
    const auto t = run(quick(0.3, 0.9, 5), Scheme::Sne12);
    ASSERT_FALSE(t.detections.empty());
    ASSERT_TRUE(t.mitigation.has_value());
    EXPECT_DOUBLE_EQ(t.mitigation->end_time, t.detections.front().time);
    EXPECT_EQ(t.stats.probes, 0U);
}

TEST(Simulator, KeepsRunningWithoutHalt) {
    auto cfg = quick(0.5, 0.9, 6);
    cfg.halt_on_finalize = false;
    cfg.sim_end = 20.0;
    const auto t = run(cfg, Scheme::Serene);
    ASSERT_TRUE(t.mitigation.has_value());
    EXPECT_DOUBLE_EQ(t.stats.end_time, 20.0);
    EXPECT_EQ(t.stats.genuine_generated, 20000U);
}

TEST(Simulator, DispatchLogRecordsPools) {
    auto cfg = quick(0.0, 0.5, 7);
    cfg.sim_end = 1.0;
    cfg.record_dispatch_log = true;
    const auto t = run(cfg, Scheme::Serene);
    ASSERT_FALSE(t.dispatch_log.empty());
    for (const auto& d : t.dispatch_log) EXPECT_EQ(d.pool.size(), 3U);
}

TEST(SimulatorProperty, DeterministicPerSeed) {
    for (auto scheme : {Scheme::Serene, Scheme::Sne12}) {
        const auto a = run(quick(0.5, 0.5, 11), scheme);
        const auto b = run(quick(0.5, 0.5, 11), scheme);
        EXPECT_EQ(a.digest, b.digest);
        EXPECT_EQ(a.stats.events, b.stats.events);
        ASSERT_EQ(a.detections.size(), b.detections.size());
        EXPECT_EQ(a.detections.front().time, b.detections.front().time);
        ASSERT_TRUE(a.mitigation && b.mitigation);
        EXPECT_EQ(a.mitigation->colluding, b.mitigation->colluding);
        EXPECT_NE(a.digest, run(quick(0.5, 0.5, 12), scheme).digest);
    }
}

TEST(SimulatorProperty, MonotonicTimeAndNoLostVotes) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto t = run(quick(0.1 * static_cast<double>(seed % 9 + 1), 0.5, seed), Scheme::Serene);
        EXPECT_TRUE(t.stats.time_monotonic);
        EXPECT_EQ(t.stats.votes_dispatched, t.stats.votes_delivered);
        EXPECT_GT(t.stats.votes_delivered, 0U);
    }
}

TEST(SimulatorProperty, ConservationOverHundredFinalizedRuns) {
    int finalized = 0;
    for (std::uint64_t seed = 1; finalized < 100 && seed < 400; ++seed) {
        auto cfg = quick(0.1 * static_cast<double>(seed % 9 + 1), seed % 3 == 0 ? 0.1 : (seed % 3 == 1 ? 0.5 : 0.9),
                         seed);
        cfg.naive_fraction = seed % 4 == 0 ? 0.05 : 0.0;
        if (cfg.colluding_fraction + cfg.naive_fraction > 0.9) cfg.naive_fraction = 0.0;
        const auto t = run(cfg, Scheme::Serene);
        if (!t.mitigation || !t.mitigation->complete) continue;
        ++finalized;
        const auto& m = *t.mitigation;
        std::set<WorkerId> all;
        for (const auto* part : {&m.honest, &m.colluding, &m.malicious})
            for (auto w : *part) EXPECT_TRUE(all.insert(w).second);
        EXPECT_EQ(m.honest.size() + m.colluding.size() + m.malicious.size(), 20U);
        EXPECT_EQ(all.size(), 20U);
    }
    EXPECT_EQ(finalized, 100);
}

TEST(Batch, MatchesSequentialRunsInOrder) {
    std::vector<BatchJob> jobs;
    for (std::uint64_t s = 1; s <= 4; ++s) jobs.push_back({quick(0.4, 0.5, s), Scheme::Serene, "c" + std::to_string(s)});
    const auto results = run_batch(jobs, 2);
    ASSERT_EQ(results.size(), jobs.size());
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        EXPECT_EQ(results[i].job.cell, jobs[i].cell);
        EXPECT_EQ(results[i].trace.digest, run(jobs[i].config, jobs[i].scheme).digest);
    }
}
