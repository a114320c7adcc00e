#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "serene/behaviors.hpp"
#include "serene/graph.hpp"
#include "serene/mitigation.hpp"
#include "serene/roster.hpp"

namespace serene::testing {

/// Synchronous VoteChannel over a WorkerModel: each genuine task advances
/// the clock by one inter-arrival gap, each wait by one round trip.
class DirectChannel : public VoteChannel {
public:
    explicit DirectChannel(WorkerModel& model, double start = 0.0) : model_(model), now_(start) {}

    /// Expire once this many genuine tasks have been requested.
    void limit_genuine(std::size_t n) { genuine_limit_ = n; }

    double now() const override { return now_; }

    TaskId dispatch_genuine(std::span<const WorkerId> pool) override {
        if (genuine_limit_ && genuine_sent_ >= *genuine_limit_) throw SimulationExpired();
        ++genuine_sent_;
        now_ += 0.001;
        const TaskId task{next_seq_++, TaskOrigin::Genuine};
        std::vector<Vote> votes;
        const auto values = model_.respond(task, pool, now_);
        for (std::size_t i = 0; i < pool.size(); ++i) votes.push_back({task, pool[i], values[i], now_ + 0.02});
        held_.push_back(std::move(votes));
        return task;
    }

    std::vector<std::vector<Vote>> await_genuine(std::span<const TaskId> tasks) override {
        now_ += 0.025;
        std::vector<std::vector<Vote>> out;
        for (auto t : tasks)
            for (auto& v : held_)
                if (!v.empty() && v.front().task == t) out.push_back(v);
        return out;
    }

    std::vector<std::vector<ResultValue>> run_round(std::span<const Dispatch> round) override {
        now_ += 0.025;
        ++rounds;
        std::vector<std::vector<ResultValue>> out;
        for (const auto& d : round) {
            dispatched += d.pool.size();
            out.push_back(model_.respond(d.task, d.pool, now_));
        }
        return out;
    }

    std::size_t genuine_sent() const { return genuine_sent_; }
    std::size_t rounds = 0;
    std::size_t dispatched = 0;

private:
    WorkerModel& model_;
    double now_;
    std::uint64_t next_seq_ = 1;
    std::size_t genuine_sent_ = 0;
    std::optional<std::size_t> genuine_limit_;
    std::vector<std::vector<Vote>> held_;
};

/// Roster with the first `colluding` ids colluding, the next `naive` naive,
/// the rest honest.
inline Roster block_roster(std::size_t n, std::size_t colluding, std::size_t naive = 0) {
    Roster r(n, WorkerClass::Honest);
    for (std::size_t i = 0; i < colluding; ++i) r[i] = WorkerClass::Colluding;
    for (std::size_t i = colluding; i < colluding + naive; ++i) r[i] = WorkerClass::NaiveMalicious;
    return r;
}

inline WorkerModel make_model(const Roster& roster, double p_collude, double epsilon = 0.0, std::uint64_t seed = 7) {
    return WorkerModel(roster, ColluderState(roster, 0.0, 0xabcdefULL), epsilon, p_collude, Rng(seed));
}

inline WorkerSet ids(std::initializer_list<int> v) {
    WorkerSet out;
    for (int i : v) out.emplace_back(i);
    return out;
}

inline WorkerSet range_ids(int lo, int hi) {
    WorkerSet out;
    for (int i = lo; i < hi; ++i) out.emplace_back(i);
    return out;
}

/// Graph whose pair (i, j) shared `co` pools and agreed in `agree(i, j)`.
inline SimilarityGraph graph_from(std::size_t n, int co, const std::function<int(std::size_t, std::size_t)>& agree) {
    SimilarityGraph g(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const int a = agree(i, j);
            for (int t = 0; t < co; ++t) g.observe(WorkerId(i), WorkerId(j), t < a);
        }
    return g;
}

/// `count` trusted tasks nobody has seen, valued at the correct result.
inline TrustedTaskSet fresh_trusted(std::size_t n, std::uint64_t first_seq, std::size_t count) {
    TrustedTaskSet tt;
    tt.used_by.assign(n, 0);
    for (std::size_t i = 0; i < count; ++i) {
        const TaskId t{first_seq + i};
        tt.tasks.push_back({t, correct_value(t), std::vector<bool>(n, false), false});
    }
    return tt;
}

}  // namespace serene::testing
