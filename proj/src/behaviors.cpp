#include "serene/behaviors.hpp"

#include <algorithm>

namespace serene {

namespace {
constexpr std::uint64_t kCorrectDomain = 0x5e7e4e0c0ffee000ULL;

ResultValue random_other_than(ResultValue avoid, Rng& rng) {
    ResultValue v{rng()};
    while (v == avoid) v = ResultValue{rng()};
    return v;
}
}  // namespace

ResultValue correct_value(TaskId task) { return ResultValue{mix64(task.seq ^ kCorrectDomain)}; }

ResultValue ring_value(TaskId task, std::uint64_t ring_salt) {
    const ResultValue correct = correct_value(task);
    ResultValue v{mix64(task.seq ^ ring_salt)};
    if (v == correct) v.bits ^= 1;
    return v;
}

ResultValue honest_vote(TaskId task, double epsilon, Rng& rng) {
    const ResultValue correct = correct_value(task);
    if (bernoulli(rng, epsilon)) return random_other_than(correct, rng);
    return correct;
}

ResultValue naive_vote(TaskId task, Rng& rng) { return random_other_than(correct_value(task), rng); }

ColluderState::ColluderState(const Roster& roster, double active_from_, std::uint64_t salt_)
    : in_ring(roster.size(), false), seen(roster.size()), active_from(active_from_), salt(salt_) {
    for (std::size_t i = 0; i < roster.size(); ++i) in_ring[i] = roster[i] == WorkerClass::Colluding;
}

bool ColluderState::has_seen(WorkerId w, TaskId t) const {
    if (shared_memory) return ring_seen.contains(t.seq);
    return seen[w.index()].contains(t.seq);
}

CollusionDecision ring_decide(TaskId task, std::span<const WorkerId> pool, ColluderState& state, double p_collude,
                              double now, Rng& rng) {
    std::size_t members = 0;
    bool any_seen = false;
    for (auto w : pool) {
        if (!state.member(w)) continue;
        ++members;
        any_seen = any_seen || state.has_seen(w, task);
    }

    CollusionDecision decision = ActHonest{};
    const bool eligible = members > 0 && now >= state.active_from && 2 * members > pool.size() && !any_seen;
    if (eligible) {
        bool go = false;
        if (state.joint_draw) {
            go = bernoulli(rng, p_collude);
        } else {
            go = true;
            for (std::size_t i = 0; i < members; ++i) go = bernoulli(rng, p_collude) && go;
        }
        if (go) decision = ColludeWith{ring_value(task, state.salt)};
    }

    for (auto w : pool) {
        if (!state.member(w)) continue;
        state.seen[w.index()].insert(task.seq);
        state.ring_seen.insert(task.seq);
    }
    return decision;
}

WorkerModel::WorkerModel(Roster roster, ColluderState ring, double epsilon, double p_collude, Rng rng)
    : roster_(std::move(roster)), ring_(std::move(ring)), epsilon_(epsilon), p_collude_(p_collude), rng_(rng) {}

std::vector<ResultValue> WorkerModel::respond(TaskId task, std::span<const WorkerId> pool, double now) {
    const bool has_member = std::any_of(pool.begin(), pool.end(), [&](WorkerId w) { return ring_.member(w); });
    CollusionDecision decision = ActHonest{};
    if (has_member) decision = ring_decide(task, pool, ring_, p_collude_, now, rng_);
    if (std::holds_alternative<ColludeWith>(decision)) ++collusions_;

    std::vector<ResultValue> out;
    out.reserve(pool.size());
    for (auto w : pool) {
        switch (roster_[w.index()]) {
            case WorkerClass::Honest: out.push_back(honest_vote(task, epsilon_, rng_)); break;
            case WorkerClass::NaiveMalicious: out.push_back(naive_vote(task, rng_)); break;
            case WorkerClass::Colluding:
                if (const auto* c = std::get_if<ColludeWith>(&decision)) {
                    out.push_back(c->value);
                } else {
                    out.push_back(correct_value(task));
                }
                break;
        }
    }
    return out;
}

}  // namespace serene
