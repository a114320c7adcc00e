#include "serene/trace_io.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"

namespace serene {

namespace {

using nlohmann::json;

json ids(const WorkerSet& s) {
    json a = json::array();
    for (auto w : s) a.push_back(w.value);
    return a;
}

}  // namespace

void write_trace_jsonl(std::ostream& out, const RunTrace& trace, bool include_graph) {
    out << json{{"schema", "serene-trace"}, {"version", kTraceSchemaVersion}}.dump() << '\n';

    json roster = json::array();
    for (auto c : trace.roster) roster.push_back(std::string(to_string(c)));
    json config = json::object();
    for (const auto& [k, v] : trace.config.to_map()) config[k] = v;
    out << json{{"type", "run"},
                {"scheme", std::string(to_string(trace.scheme))},
                {"seed", trace.config.rng_seed},
                {"activation_time", trace.activation_time},
                {"roster", roster},
                {"config", config}}
               .dump()
        << '\n';

    for (const auto& d : trace.detections)
        out << json{{"type", "detection"},
                    {"sim_time", d.time},
                    {"task", d.task.seq},
                    {"triggering_workers", ids(d.triggering)},
                    {"epoch_count", d.epochs},
                    {"before_activation", d.before_activation}}
                   .dump()
            << '\n';

    if (trace.mitigation) {
        const auto& m = *trace.mitigation;
        for (const auto& p : m.phases)
            out << json{{"type", "phase"},   {"phase", p.phase}, {"sim_time", p.time}, {"g1", ids(p.g1)},
                        {"g2", ids(p.g2)},   {"m", ids(p.malicious)}, {"count", p.count}}
                       .dump()
                << '\n';
        json rec{{"type", "mitigation"},
                 {"honest", ids(m.honest)},
                 {"colluding", ids(m.colluding)},
                 {"malicious", ids(m.malicious)},
                 {"start_time", m.start_time},
                 {"end_time", m.end_time},
                 {"complete", m.complete},
                 {"inconclusive", m.inconclusive},
                 {"reduced_confidence", m.reduced_confidence},
                 {"method", std::string(to_string(m.method))},
                 {"observation_pools", m.observation_pools},
                 {"trusted_tasks", m.trusted_tasks}};
        if (m.verification) rec["case"] = *m.verification == VerificationCase::I ? "I" : "II";
        if (include_graph) rec["graph_edges"] = m.graph_edges;
        out << rec.dump() << '\n';
    }

    for (const auto& d : trace.dispatch_log)
        out << json{{"type", "dispatch"},
                    {"sim_time", d.time},
                    {"task", d.task.seq},
                    {"origin", std::string(to_string(d.task.origin))},
                    {"pool", ids(d.pool)}}
                   .dump()
            << '\n';

    const auto& s = trace.stats;
    out << json{{"type", "stats"},
                {"events", s.events},
                {"genuine_generated", s.genuine_generated},
                {"votes_dispatched", s.votes_dispatched},
                {"votes_delivered", s.votes_delivered},
                {"redispatches", s.redispatches},
                {"probes", s.probes},
                {"replacements", s.replacements},
                {"collusions", s.collusions},
                {"end_time", s.end_time},
                {"wall_seconds", s.wall_seconds},
                {"digest", trace.digest}}
               .dump()
        << '\n';
}

}  // namespace serene
