#pragma once

#include <optional>
#include <span>
#include <vector>

#include "serene/clustering.hpp"
#include "serene/graph.hpp"
#include "serene/types.hpp"

namespace serene {

struct SneConfig {
    int obs_per_edge = 12;
    MclParams mcl;
};

struct SneVerdict {
    bool detected = false;
    WorkerSet honest;
    WorkerSet colluding;
    std::size_t clusters = 0;
};

/// One-step MCL over the whole graph. Two or more clusters count as a
/// detection; the largest cluster is named honest (ties go to the cluster
/// with the higher mean internal weight), everyone else colluding.
SneVerdict sne_classify(const SimilarityGraph& g, const MclParams& mcl_params = {});

/// Accumulates single-pool votes in windows. A window closes once every
/// pair co-appeared `obs_per_edge` times; the window's graph is then
/// classified and the next window starts empty.
class SneMonitor {
public:
    SneMonitor(std::size_t n_workers, SneConfig cfg);

    /// Adds one finished task. Returns the verdict when this closes a window.
    std::optional<SneVerdict> observe(const TrTask& task);

    std::size_t windows() const { return windows_; }
    const TaskRepository& window() const { return window_; }

private:
    SneConfig cfg_;
    TaskRepository window_;
    std::size_t windows_ = 0;
};

struct SneRun {
    bool detected = false;
    WorkerSet honest;
    WorkerSet colluding;
    std::size_t tasks_used = 0;
    std::size_t windows = 0;
};

/// Feeds a task stream through a monitor until the first detection.
SneRun sne_run(std::span<const TrTask> stream, std::size_t n_workers, const SneConfig& cfg);

}  // namespace serene
