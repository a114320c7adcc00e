#pragma once

#include <vector>

#include "serene/config.hpp"
#include "serene/rng.hpp"
#include "serene/types.hpp"

namespace serene {

/// Ground-truth class per worker, indexed by WorkerId::index().
using Roster = std::vector<WorkerClass>;

struct ClassCounts {
    int honest = 0;
    int naive = 0;
    int colluding = 0;
};

/// Colluding count is round-half-up of N * colluding_fraction, naive count
/// likewise, honest is the remainder.
ClassCounts class_counts(const ScenarioConfig& cfg);

/// Seeded random assignment of classes to worker ids.
Roster build_roster(const ScenarioConfig& cfg, Rng& rng);

ClassCounts count_classes(const Roster& roster);

WorkerSet members_of(const Roster& roster, WorkerClass c);

}  // namespace serene
