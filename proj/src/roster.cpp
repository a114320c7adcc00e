#include "serene/roster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace serene {

std::string_view to_string(WorkerClass c) {
    switch (c) {
        case WorkerClass::Honest: return "honest";
        case WorkerClass::NaiveMalicious: return "naive";
        case WorkerClass::Colluding: return "colluding";
    }
    return "?";
}

std::string_view to_string(TaskOrigin o) {
    switch (o) {
        case TaskOrigin::Genuine: return "genuine";
        case TaskOrigin::CvtProbe: return "cvt_probe";
        case TaskOrigin::MitigationProbe: return "mitigation_probe";
    }
    return "?";
}

WorkerSet all_workers(std::size_t n) {
    WorkerSet out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(i);
    return out;
}

ClassCounts class_counts(const ScenarioConfig& cfg) {
    ClassCounts c;
    c.colluding = static_cast<int>(std::floor(cfg.n_workers * cfg.colluding_fraction + 0.5));
    c.naive = static_cast<int>(std::floor(cfg.n_workers * cfg.naive_fraction + 0.5));
    c.honest = cfg.n_workers - c.colluding - c.naive;
    if (c.honest < 0) throw ConfigError("class fractions exceed the worker count");
    return c;
}

Roster build_roster(const ScenarioConfig& cfg, Rng& rng) {
    cfg.validate();
    const ClassCounts counts = class_counts(cfg);
    Roster roster;
    roster.reserve(static_cast<std::size_t>(cfg.n_workers));
    roster.insert(roster.end(), static_cast<std::size_t>(counts.colluding), WorkerClass::Colluding);
    roster.insert(roster.end(), static_cast<std::size_t>(counts.naive), WorkerClass::NaiveMalicious);
    roster.insert(roster.end(), static_cast<std::size_t>(counts.honest), WorkerClass::Honest);
    // Explicit Fisher-Yates so the permutation does not depend on the
    // standard library's shuffle implementation.
    for (std::size_t i = roster.size(); i > 1; --i) {
        const auto j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
        std::swap(roster[i - 1], roster[j]);
    }
    return roster;
}

ClassCounts count_classes(const Roster& roster) {
    ClassCounts c;
    for (auto w : roster) {
        switch (w) {
            case WorkerClass::Honest: ++c.honest; break;
            case WorkerClass::NaiveMalicious: ++c.naive; break;
            case WorkerClass::Colluding: ++c.colluding; break;
        }
    }
    return c;
}

WorkerSet members_of(const Roster& roster, WorkerClass c) {
    WorkerSet out;
    for (std::size_t i = 0; i < roster.size(); ++i)
        if (roster[i] == c) out.emplace_back(i);
    return out;
}

}  // namespace serene
