#include "serene/detection.hpp"

#include <algorithm>

#include "serene/replication.hpp"

namespace serene {

CvtEntry::CvtEntry(TaskId t, std::optional<ResultValue> v, std::size_t n_workers)
    : task(t), majority(v), recorded(n_workers), received(n_workers, false) {}

std::size_t CvtEntry::unprobed() const {
    return static_cast<std::size_t>(std::count(received.begin(), received.end(), false));
}

void CvtEntry::record(WorkerId w, ResultValue v) {
    recorded[w.index()] = v;
    received[w.index()] = true;
    ++value_counts_[v];
}

CvtTable::CvtTable(std::size_t capacity, std::size_t n_workers) : capacity_(capacity), n_workers_(n_workers) {
    entries_.reserve(capacity);
}

CvtEntry CvtTable::make_entry(TaskId task, std::optional<ResultValue> majority, std::span<const Vote> votes) const {
    CvtEntry e(task, majority, n_workers_);
    for (const auto& v : votes)
        if (v.worker.index() < n_workers_) e.record(v.worker, v.value);
    return e;
}

bool CvtTable::admit(TaskId task, std::optional<ResultValue> majority, std::span<const Vote> original_votes) {
    if (full() || contains(task)) return false;
    entries_.push_back(make_entry(task, majority, original_votes));
    return true;
}

bool CvtTable::replace(TaskId exhausted, TaskId fresh, std::optional<ResultValue> majority,
                       std::span<const Vote> original_votes) {
    if (contains(fresh)) return false;
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const CvtEntry& e) { return e.task == exhausted; });
    if (it == entries_.end()) return false;
    *it = make_entry(fresh, majority, original_votes);
    return true;
}

CvtEntry* CvtTable::find(TaskId task) {
    for (auto& e : entries_)
        if (e.task == task) return &e;
    return nullptr;
}

const CvtEntry* CvtTable::find(TaskId task) const {
    for (const auto& e : entries_)
        if (e.task == task) return &e;
    return nullptr;
}

void CvtTable::mark_sent(TaskId task, std::span<const WorkerId> pool) {
    if (auto* e = find(task))
        for (auto w : pool) e->received[w.index()] = true;
}

ProbeSelection select_probe(const CvtTable& table, int k, Rng& rng) {
    if (table.empty()) return std::monostate{};
    const auto pick = std::uniform_int_distribution<std::size_t>(0, table.size() - 1)(rng);
    const CvtEntry& entry = table.entries()[pick];

    WorkerSet candidates;
    for (std::size_t i = 0; i < entry.received.size(); ++i)
        if (!entry.received[i]) candidates.emplace_back(i);
    if (candidates.size() <= static_cast<std::size_t>(k)) return ReplacementNeeded{entry.task};
    return ProbeRequest{entry.task, select_pool(candidates, k, rng)};
}

DetectOutcome detect(CvtEntry& entry, const Vote& vote, DetectStats* stats) {
    if (!(vote.task == entry.task) || vote.worker.index() >= entry.recorded.size() ||
        entry.recorded[vote.worker.index()].has_value())
        return DetectOutcome::NoCollusion;

    if (stats) ++stats->comparisons;
    const bool agrees = entry.majority && *entry.majority == vote.value;
    if (entry.majority && !agrees) {
        if (stats) ++stats->lookups;
        if (entry.holds_value(vote.value)) return DetectOutcome::Collusion;
    }
    if (!entry.majority) entry.majority = vote.value;
    entry.record(vote.worker, vote.value);
    return DetectOutcome::NoCollusion;
}

DetectionEvidence collect_evidence(const CvtEntry& entry, const Vote& trigger) {
    DetectionEvidence ev;
    ev.task = entry.task;
    ev.majority = entry.majority;
    for (std::size_t i = 0; i < entry.recorded.size(); ++i) {
        const auto& r = entry.recorded[i];
        if (!r) continue;
        ev.probed.emplace_back(i);
        if (*r == trigger.value) ev.minority.emplace_back(i);
        if (entry.majority && *r == *entry.majority) ev.majority_voters.emplace_back(i);
    }
    ev.minority.push_back(trigger.worker);
    ev.probed.push_back(trigger.worker);
    std::sort(ev.minority.begin(), ev.minority.end());
    std::sort(ev.probed.begin(), ev.probed.end());
    return ev;
}

}  // namespace serene
