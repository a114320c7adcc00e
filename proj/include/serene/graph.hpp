#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "serene/types.hpp"

namespace serene {

/// Symmetric n x n integer counts with a zero diagonal by convention.
class PairCounts {
public:
    explicit PairCounts(std::size_t n = 0) : n_(n), counts_(n * n, 0) {}

    std::size_t size() const { return n_; }
    int at(WorkerId a, WorkerId b) const { return counts_[a.index() * n_ + b.index()]; }
    void bump(WorkerId a, WorkerId b, int by = 1) {
        counts_[a.index() * n_ + b.index()] += by;
        counts_[b.index() * n_ + a.index()] += by;
    }
    /// Increments every unordered pair inside `pool`.
    void bump_pool(std::span<const WorkerId> pool);
    /// Minimum over pairs of `members` (all workers when empty).
    int min_pair(std::span<const WorkerId> members = {}) const;

    friend bool operator==(const PairCounts&, const PairCounts&) = default;

private:
    std::size_t n_;
    std::vector<int> counts_;
};

/// Post-detection vote log. Each task was sent to exactly one pool.
struct TrTask {
    TaskId task;
    std::vector<std::pair<WorkerId, ResultValue>> votes;
};

class TaskRepository {
public:
    explicit TaskRepository(std::size_t n_workers = 0) : pair_counts_(n_workers), n_(n_workers) {}

    /// Registers a pool at dispatch time (drives the coverage target).
    void note_pool(std::span<const WorkerId> pool) { pair_counts_.bump_pool(pool); }
    void add(TrTask task) { tasks_.push_back(std::move(task)); }

    const std::vector<TrTask>& tasks() const { return tasks_; }
    const PairCounts& pair_counts() const { return pair_counts_; }
    std::size_t n_workers() const { return n_; }
    bool empty() const { return tasks_.empty(); }
    void clear() {
        tasks_.clear();
        pair_counts_ = PairCounts(n_);
    }

private:
    std::vector<TrTask> tasks_;
    PairCounts pair_counts_;
    std::size_t n_;
};

/// Complete weighted graph over workers. weight(i, j) = agree / co-occur;
/// pairs that never shared a pool have no edge.
class SimilarityGraph {
public:
    explicit SimilarityGraph(std::size_t n = 0) : agree_(n), co_(n) {}

    std::size_t size() const { return co_.size(); }
    bool has_edge(WorkerId a, WorkerId b) const { return !(a == b) && co_.at(a, b) > 0; }
    /// Agreement ratio; 0 for no-edge pairs.
    double weight(WorkerId a, WorkerId b) const {
        const int c = co_.at(a, b);
        return c > 0 ? static_cast<double>(agree_.at(a, b)) / c : 0.0;
    }
    const PairCounts& agreements() const { return agree_; }
    const PairCounts& co_occurrences() const { return co_; }

    void observe(WorkerId a, WorkerId b, bool agreed) {
        co_.bump(a, b);
        if (agreed) agree_.bump(a, b);
    }

    /// Row-major dense weights restricted to `members` (in that order).
    std::vector<double> dense(std::span<const WorkerId> members) const;

    /// Edge list dump: one `i j agree co weight` line per edge.
    void write_edges(std::ostream& out) const;

    friend bool operator==(const SimilarityGraph&, const SimilarityGraph&) = default;

private:
    PairCounts agree_;
    PairCounts co_;
};

SimilarityGraph build_similarity_graph(const TaskRepository& tr);
SimilarityGraph build_similarity_graph(std::span<const TrTask> tasks, std::size_t n_workers);

}  // namespace serene
