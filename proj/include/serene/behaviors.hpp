#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "serene/rng.hpp"
#include "serene/roster.hpp"
#include "serene/types.hpp"

namespace serene {

// Result-value encoding. The correct value of a task is a hash of its
// sequence number; the ring's agreed wrong value hashes the sequence with a
// ring salt; independent wrong values are fresh random draws.
ResultValue correct_value(TaskId task);
ResultValue ring_value(TaskId task, std::uint64_t ring_salt);

ResultValue honest_vote(TaskId task, double epsilon, Rng& rng);
ResultValue naive_vote(TaskId task, Rng& rng);

/// Grow-only membership over dense task sequence numbers.
class TaskBitset {
public:
    bool contains(std::uint64_t seq) const {
        const auto word = seq / 64;
        return word < words_.size() && ((words_[word] >> (seq % 64)) & 1U) != 0;
    }
    void insert(std::uint64_t seq) {
        const auto word = seq / 64;
        if (word >= words_.size()) words_.resize(std::max<std::size_t>(word + 1, words_.size() * 2), 0);
        words_[word] |= std::uint64_t{1} << (seq % 64);
    }

private:
    std::vector<std::uint64_t> words_;
};

/// Shared state of the single colluding ring.
struct ColluderState {
    std::vector<bool> in_ring;         // indexed by worker
    std::vector<TaskBitset> seen;      // per-worker evasive memory
    TaskBitset ring_seen;              // used when memory is ring-wide
    double active_from = 0.0;
    std::uint64_t salt = 0;
    bool joint_draw = true;
    bool shared_memory = false;

    ColluderState() = default;
    ColluderState(const Roster& roster, double active_from, std::uint64_t salt);

    bool member(WorkerId w) const { return w.index() < in_ring.size() && in_ring[w.index()]; }
    bool has_seen(WorkerId w, TaskId t) const;
};

struct ColludeWith {
    ResultValue value;
};
struct ActHonest {};
using CollusionDecision = std::variant<ColludeWith, ActHonest>;

/// Joint decision of the ring members in `pool`. Colludes only when the
/// ring is active, holds a strict majority of the pool, none of the pooled
/// members has seen the task, and the collusion draw succeeds. Every pooled
/// member records the task as seen afterwards.
CollusionDecision ring_decide(TaskId task, std::span<const WorkerId> pool, ColluderState& state, double p_collude,
                              double now, Rng& rng);

/// Produces the votes of every worker class for a dispatched pool.
class WorkerModel {
public:
    WorkerModel(Roster roster, ColluderState ring, double epsilon, double p_collude, Rng rng);

    /// Votes of `pool` for `task`, aligned with `pool`.
    std::vector<ResultValue> respond(TaskId task, std::span<const WorkerId> pool, double now);

    const Roster& roster() const { return roster_; }
    const ColluderState& ring() const { return ring_; }
    ColluderState& ring() { return ring_; }
    std::uint64_t collusions() const { return collusions_; }

private:
    Roster roster_;
    ColluderState ring_;
    double epsilon_;
    double p_collude_;
    Rng rng_;
    std::uint64_t collusions_ = 0;
};

}  // namespace serene
