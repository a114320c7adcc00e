#include <gtest/gtest.h>

#include "serene/behaviors.hpp"
#include "serene/detection.hpp"
#include "serene/replication.hpp"
#include "test_support.hpp"

using namespace serene;
using serene::testing::ids;

namespace {

Vote vote(std::uint64_t task, int worker, std::uint64_t value) {
    return Vote{TaskId{task}, WorkerId(worker), ResultValue{value}};
}

}  // namespace

TEST(CvtTable, AdmitSetsMajority) {
    CvtTable table(5, 20);
    EXPECT_TRUE(table.admit(TaskId{1}, ResultValue{9}));
    EXPECT_EQ(table.size(), 1U);
    EXPECT_EQ(table.find(TaskId{1})->majority, ResultValue{9});
}

TEST(CvtTable, DuplicateRejected) {
    CvtTable table(5, 20);
    EXPECT_TRUE(table.admit(TaskId{1}, ResultValue{9}));
    EXPECT_FALSE(table.admit(TaskId{1}, ResultValue{7}));
    EXPECT_EQ(table.size(), 1U);
    EXPECT_EQ(table.find(TaskId{1})->majority, ResultValue{9});
}

TEST(CvtTable, FullTableOnlyChangesThroughReplacement) {
    CvtTable table(2, 20);
    table.admit(TaskId{1}, ResultValue{1});
    table.admit(TaskId{2}, ResultValue{2});
    EXPECT_FALSE(table.admit(TaskId{3}, ResultValue{3}));
    EXPECT_TRUE(table.replace(TaskId{1}, TaskId{3}, ResultValue{3}));
    EXPECT_FALSE(table.contains(TaskId{1}));
    EXPECT_TRUE(table.contains(TaskId{3}));
    EXPECT_EQ(table.size(), 2U);
}

TEST(CvtTable, OriginalVotesAreRecorded) {
    CvtTable table(5, 20);
    const std::vector<Vote> original{vote(1, 0, 5), vote(1, 1, 5), vote(1, 2, 6)};
    table.admit(TaskId{1}, ResultValue{5}, original);
    const auto* e = table.find(TaskId{1});
    EXPECT_EQ(e->unprobed(), 17U);
    EXPECT_TRUE(e->holds_value(ResultValue{6}));
}

TEST(SelectProbe, FreshEntryDrawsFromEveryone) {
    CvtTable table(5, 20);
    table.admit(TaskId{1}, ResultValue{1});
    Rng rng(1);
    const auto sel = select_probe(table, 3, rng);
    ASSERT_TRUE(std::holds_alternative<ProbeRequest>(sel));
    EXPECT_EQ(std::get<ProbeRequest>(sel).pool.size(), 3U);
}

TEST(SelectProbe, TwoUnprobedNeedsReplacement) {
    CvtTable table(5, 20);
    std::vector<Vote> original;
    for (int w = 0; w < 18; ++w) original.push_back(vote(1, w, 1));
    table.admit(TaskId{1}, ResultValue{1}, original);
    Rng rng(2);
    const auto sel = select_probe(table, 3, rng);
    ASSERT_TRUE(std::holds_alternative<ReplacementNeeded>(sel));
    EXPECT_EQ(std::get<ReplacementNeeded>(sel).task, TaskId{1});
}

TEST(SelectProbe, KPlusOneUnprobedStillProbes) {
    CvtTable table(5, 20);
    std::vector<Vote> original;
    for (int w = 0; w < 16; ++w) original.push_back(vote(1, w, 1));
    table.admit(TaskId{1}, ResultValue{1}, original);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto sel = select_probe(table, 3, rng);
        ASSERT_TRUE(std::holds_alternative<ProbeRequest>(sel));
        for (auto w : std::get<ProbeRequest>(sel).pool) EXPECT_GE(w.index(), 16U);
    }
}

TEST(SelectProbe, EmptyTableIsNoOp) {
    CvtTable table(5, 20);
    Rng rng(4);
    EXPECT_TRUE(std::holds_alternative<std::monostate>(select_probe(table, 3, rng)));
}

TEST(SelectProbe, InFlightProbesAreNotReprobed) {
    CvtTable table(5, 20);
    table.admit(TaskId{1}, ResultValue{1});
    table.mark_sent(TaskId{1}, ids({0, 1, 2}));
    EXPECT_EQ(table.find(TaskId{1})->unprobed(), 17U);
}

TEST(Detect, AgreeingVoteIsNoCollusion) {
    CvtEntry e(TaskId{1}, ResultValue{1}, 20);
    EXPECT_EQ(detect(e, vote(1, 4, 1)), DetectOutcome::NoCollusion);
    EXPECT_TRUE(e.recorded[4].has_value());
}

TEST(Detect, SecondMatchingMinorityValueIsCollusion) {
    CvtEntry e(TaskId{1}, ResultValue{1}, 20);
    EXPECT_EQ(detect(e, vote(1, 3, 2)), DetectOutcome::NoCollusion);
    EXPECT_EQ(detect(e, vote(1, 4, 2)), DetectOutcome::Collusion);
}

TEST(Detect, NullMajorityIsAdopted) {
    CvtEntry e(TaskId{1}, std::nullopt, 20);
    EXPECT_EQ(detect(e, vote(1, 3, 2)), DetectOutcome::NoCollusion);
    EXPECT_EQ(e.majority, ResultValue{2});
}

TEST(Detect, DistinctWrongValuesNeverTrigger) {
    CvtEntry e(TaskId{1}, ResultValue{1}, 20);
    for (int w = 0; w < 20; ++w) EXPECT_EQ(detect(e, vote(1, w, 100 + w)), DetectOutcome::NoCollusion);
}

TEST(Detect, VoteForOtherTaskIgnored) {
    CvtEntry e(TaskId{1}, ResultValue{1}, 20);
    e.record(WorkerId(3), ResultValue{2});
    EXPECT_EQ(detect(e, vote(2, 4, 2)), DetectOutcome::NoCollusion);
    EXPECT_FALSE(e.recorded[4].has_value());
}

TEST(Detect, EvidenceSplitsVoters) {
    CvtEntry e(TaskId{1}, ResultValue{1}, 20);
    detect(e, vote(1, 0, 1));
    detect(e, vote(1, 1, 1));
    detect(e, vote(1, 2, 2));
    const auto trigger = vote(1, 5, 2);
    ASSERT_EQ(detect(e, trigger), DetectOutcome::Collusion);
    const auto ev = collect_evidence(e, trigger);
    EXPECT_EQ(ev.minority, ids({2, 5}));
    EXPECT_EQ(ev.majority_voters, ids({0, 1}));
    EXPECT_EQ(ev.probed, ids({0, 1, 2, 5}));
}

TEST(DetectProperty, NoFalsePositivesOverMillionHonestProbes) {
    // Honest-only network, eps = 0: the probe protocol runs 10^6 detect
    // calls over continually replaced entries and must never fire.
    const std::size_t n = 20;
    const auto roster = serene::testing::block_roster(n, 0);
    auto model = serene::testing::make_model(roster, 0.0, 0.0, 1);
    CvtTable table(5, n);
    Rng rng(2);
    std::uint64_t next = 0;
    auto fresh = [&] {
        const TaskId t{next++};
        const auto pool = select_pool(all_workers(n), 3, rng);
        const auto values = model.respond(t, pool, 0.0);
        std::vector<Vote> votes;
        for (std::size_t i = 0; i < pool.size(); ++i) votes.push_back({t, pool[i], values[i]});
        return std::make_pair(t, votes);
    };
    while (!table.full()) {
        auto [t, v] = fresh();
        table.admit(t, v.front().value, v);
    }
    std::uint64_t calls = 0;
    while (calls < 1000000) {
        const auto sel = select_probe(table, 3, rng);
        if (const auto* r = std::get_if<ReplacementNeeded>(&sel)) {
            auto [t, v] = fresh();
            table.replace(r->task, t, v.front().value, v);
            continue;
        }
        const auto& p = std::get<ProbeRequest>(sel);
        table.mark_sent(p.task, p.pool);
        const auto values = model.respond(p.task, p.pool, 0.0);
        auto* entry = table.find(p.task);
        for (std::size_t i = 0; i < p.pool.size(); ++i, ++calls)
            ASSERT_EQ(detect(*entry, Vote{p.task, p.pool[i], values[i]}), DetectOutcome::NoCollusion);
    }
}

TEST(DetectProperty, CostIsConstantInWorkerCount) {
    std::vector<DetectStats> per_n;
    for (std::size_t n : {20U, 200U, 2000U}) {
        CvtEntry e(TaskId{1}, ResultValue{1}, n);
        for (std::size_t w = 0; w + 1 < n; ++w) e.record(WorkerId(w), ResultValue{w % 2 == 0 ? 1U : 1000U + w});
        DetectStats s;
        detect(e, Vote{TaskId{1}, WorkerId(n - 1), ResultValue{7}}, &s);
        per_n.push_back(s);
    }
    for (const auto& s : per_n) {
        EXPECT_EQ(s.comparisons, per_n.front().comparisons);
        EXPECT_EQ(s.lookups, per_n.front().lookups);
    }
    EXPECT_LE(per_n.front().comparisons + per_n.front().lookups, 2U);
}
