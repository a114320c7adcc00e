#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "serene/rng.hpp"
#include "serene/types.hpp"

namespace serene {

/// One collusion-verification task: the majority value V (nullopt = NULL)
/// and, per worker, the recorded result (nullopt = never returned).
struct CvtEntry {
    TaskId task;
    std::optional<ResultValue> majority;
    std::vector<std::optional<ResultValue>> recorded;
    /// Workers the task was ever sent to, including votes still in flight.
    std::vector<bool> received;

    CvtEntry(TaskId t, std::optional<ResultValue> v, std::size_t n_workers);

    /// Number of workers that never received the task (|C_P|).
    std::size_t unprobed() const;
    bool holds_value(ResultValue v) const { return value_counts_.contains(v); }
    void record(WorkerId w, ResultValue v);

private:
    std::unordered_map<ResultValue, int> value_counts_;
};

class CvtTable {
public:
    CvtTable(std::size_t capacity, std::size_t n_workers);

    /// Inserts a verified genuine task with its original pool votes. Returns
    /// false (no state change) for a duplicate or when the table is full.
    bool admit(TaskId task, std::optional<ResultValue> majority, std::span<const Vote> original_votes = {});

    /// Evicts `exhausted` and inserts `fresh` in its place.
    bool replace(TaskId exhausted, TaskId fresh, std::optional<ResultValue> majority,
                 std::span<const Vote> original_votes = {});

    CvtEntry* find(TaskId task);
    const CvtEntry* find(TaskId task) const;
    bool contains(TaskId task) const { return find(task) != nullptr; }
    void mark_sent(TaskId task, std::span<const WorkerId> pool);
    void wipe() { entries_.clear(); }

    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool full() const { return entries_.size() >= capacity_; }
    bool empty() const { return entries_.empty(); }
    const std::vector<CvtEntry>& entries() const { return entries_; }
    std::size_t n_workers() const { return n_workers_; }

private:
    CvtEntry make_entry(TaskId task, std::optional<ResultValue> majority, std::span<const Vote> votes) const;

    std::size_t capacity_;
    std::size_t n_workers_;
    std::vector<CvtEntry> entries_;
};

struct ProbeRequest {
    TaskId task;
    WorkerSet pool;
};
struct ReplacementNeeded {
    TaskId task;
};
using ProbeSelection = std::variant<std::monostate, ProbeRequest, ReplacementNeeded>;

/// Picks a random entry; returns a k-subset of its never-probed workers, or
/// ReplacementNeeded when |C_P| <= k. Empty table yields monostate.
ProbeSelection select_probe(const CvtTable& table, int k, Rng& rng);

enum class DetectOutcome : int { NoCollusion = -1, Collusion = 1 };

/// Work done by one detect() call, for the constant-cost property.
struct DetectStats {
    std::uint64_t comparisons = 0;
    std::uint64_t lookups = 0;
};

/// Evaluates one probe vote. Collusion iff the value differs from a
/// non-NULL majority and another worker already returned the same value.
/// On NoCollusion the entry is updated (V set if NULL, vote recorded).
/// Collusion leaves the entry untouched; the caller wipes the table.
DetectOutcome detect(CvtEntry& entry, const Vote& vote, DetectStats* stats = nullptr);

/// What the detection knew when it fired; seeds the greedy grouping.
struct DetectionEvidence {
    TaskId task;
    std::optional<ResultValue> majority;
    WorkerSet minority;         // workers that returned the triggering value
    WorkerSet majority_voters;  // workers that returned V
    WorkerSet probed;           // every worker with a recorded result
};

DetectionEvidence collect_evidence(const CvtEntry& entry, const Vote& trigger);

}  // namespace serene
