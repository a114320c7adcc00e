#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "serene/config.hpp"
#include "serene/mitigation.hpp"
#include "serene/roster.hpp"
#include "serene/types.hpp"

namespace serene {

enum class Scheme { Serene, SerenePrt, SerenePrtG1, Sne8, Sne12 };

std::string_view to_string(Scheme s);
/// Accepts the canonical names plus the long variant aliases
/// (`partitioning-only`, `group-identification`). Throws ConfigError.
Scheme parse_scheme(std::string_view name);
bool is_sne(Scheme s);

struct DetectionRecord {
    double time = 0.0;
    TaskId task;
    WorkerSet triggering;
    /// Probe dispatches (SERENE) or closed windows (SnE) up to this event.
    std::uint64_t epochs = 0;
    bool before_activation = false;
};

struct DispatchLogEntry {
    double time = 0.0;
    TaskId task;
    WorkerSet pool;
};

struct RunStats {
    std::uint64_t events = 0;
    std::uint64_t genuine_generated = 0;
    std::uint64_t votes_dispatched = 0;
    std::uint64_t votes_delivered = 0;
    std::uint64_t redispatches = 0;
    std::uint64_t probes = 0;
    std::uint64_t replacements = 0;
    std::uint64_t collusions = 0;
    bool time_monotonic = true;
    double end_time = 0.0;
    double wall_seconds = 0.0;
};

struct RunTrace {
    ScenarioConfig config;
    Scheme scheme = Scheme::Serene;
    Roster roster;
    double activation_time = 0.0;
    std::vector<DetectionRecord> detections;
    std::optional<MitigationReport> mitigation;
    std::vector<DispatchLogEntry> dispatch_log;
    RunStats stats;
    /// FNV-1a over every processed event; equal digests mean equal traces.
    std::uint64_t digest = 0;

    bool has_collusion() const;
};

/// One seeded simulation. `config.rng_seed` selects every random stream.
RunTrace run(const ScenarioConfig& config, Scheme scheme);

struct BatchJob {
    ScenarioConfig config;
    Scheme scheme = Scheme::Serene;
    std::string cell;  // free-form label carried to the output
};

struct BatchResult {
    BatchJob job;
    RunTrace trace;
};

/// Runs every job on a pool of `threads` workers (0 = hardware
/// concurrency). Results keep the job order.
std::vector<BatchResult> run_batch(const std::vector<BatchJob>& jobs, unsigned threads = 0);

}  // namespace serene
