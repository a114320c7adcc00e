#include "serene/mitigation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "serene/replication.hpp"

namespace serene {

namespace {

bool contains(std::span<const WorkerId> set, WorkerId w) { return std::find(set.begin(), set.end(), w) != set.end(); }

WorkerSet sorted(WorkerSet s) {
    std::sort(s.begin(), s.end());
    return s;
}

WorkerSet minus(std::span<const WorkerId> a, std::span<const WorkerId> b) {
    WorkerSet out;
    for (auto w : a)
        if (!contains(b, w)) out.push_back(w);
    return out;
}

}  // namespace

// ------------------------------------------------------------ observations

WorkerSet next_coverage_pool(const PairCounts& counts, std::span<const WorkerId> members, int k, int target,
                             Rng& rng) {
    const auto size = static_cast<std::size_t>(k);
    if (members.size() < size) throw InsufficientWorkers("coverage pool needs k members");

    // Seed with a random least-covered pair.
    int low = std::numeric_limits<int>::max();
    std::vector<std::pair<WorkerId, WorkerId>> seeds;
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            const int c = counts.at(members[i], members[j]);
            if (c < low) {
                low = c;
                seeds.clear();
            }
            if (c == low) seeds.emplace_back(members[i], members[j]);
        }
    const auto& seed = seeds[std::uniform_int_distribution<std::size_t>(0, seeds.size() - 1)(rng)];
    WorkerSet pool{seed.first, seed.second};

    while (pool.size() < size) {
        int best = -1;
        WorkerSet ties;
        for (auto c : members) {
            if (contains(pool, c)) continue;
            int gain = 0;
            for (auto p : pool) gain += std::max(0, target - counts.at(p, c));
            if (gain > best) {
                best = gain;
                ties.clear();
            }
            if (gain == best) ties.push_back(c);
        }
        pool.push_back(ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)]);
    }
    return pool;
}

CollectResult collect_observations(VoteChannel& channel, TaskRepository& tr, std::span<const WorkerId> members,
                                   int k, int target, Rng& rng) {
    CollectResult out;
    if (target <= 0 || members.size() < static_cast<std::size_t>(k)) return out;
    std::vector<TaskId> sent;
    try {
        while (tr.pair_counts().min_pair(members) < target) {
            const auto pool = next_coverage_pool(tr.pair_counts(), members, k, target, rng);
            sent.push_back(channel.dispatch_genuine(pool));
            tr.note_pool(pool);
        }
        out.pools = sent.size();
        auto votes = channel.await_genuine(sent);
        for (std::size_t i = 0; i < sent.size(); ++i) {
            TrTask t{sent[i], {}};
            for (const auto& v : votes[i]) t.votes.emplace_back(v.worker, v.value);
            tr.add(std::move(t));
        }
    } catch (const SimulationExpired&) {
        out.complete = false;
        out.pools = sent.size();
    }
    return out;
}

// ------------------------------------------------------------ partitioning

std::string_view to_string(PartitionMethod m) {
    switch (m) {
        case PartitionMethod::None: return "none";
        case PartitionMethod::Mcl: return "mcl";
        case PartitionMethod::Spectral: return "spectral";
        case PartitionMethod::Greedy: return "greedy";
    }
    return "?";
}

WorkerSet eigentrust_filter(const SimilarityGraph& g, const EigenTrustParams& params) {
    return eigentrust(g, params).flagged;
}

namespace {

/// Detection evidence is hard fact: the workers that matched on the
/// triggering value colluded together against the majority voters.
bool consistent_with(const Groups& groups, const DetectionEvidence* evidence) {
    if (evidence == nullptr) return true;
    auto side = [&](WorkerId w) -> int {
        if (contains(groups.g1, w)) return 1;
        if (contains(groups.g2, w)) return 2;
        return 0;
    };
    int minority_side = 0;
    for (auto w : evidence->minority) {
        const int s = side(w);
        if (s == 0) continue;
        if (minority_side != 0 && s != minority_side) return false;
        minority_side = s;
    }
    if (minority_side == 0) return true;
    bool has_majority = false;
    for (auto w : evidence->majority_voters) {
        const int s = side(w);
        if (s == 0) continue;
        has_majority = true;
        if (s != minority_side) return true;
    }
    return !has_majority;
}

Groups from_indices(std::span<const WorkerId> members, const std::vector<std::size_t>& a,
                    const std::vector<std::size_t>& b) {
    Groups g;
    for (auto i : a) g.g1.push_back(members[i]);
    for (auto i : b) g.g2.push_back(members[i]);
    return g;
}

}  // namespace

PartitionOutcome partition(const SimilarityGraph& g, std::span<const WorkerId> members,
                           const DetectionEvidence* evidence, const MclParams& mcl_params) {
    PartitionOutcome out;
    if (members.size() < 2) return out;
    const auto adj = adjacency_of(g, members);

    const auto clusters = mcl(adj, mcl_params);
    out.mcl_clusters = clusters.size();
    if (clusters.size() == 2) {
        auto groups = from_indices(members, clusters[0], clusters[1]);
        if (consistent_with(groups, evidence)) {
            out.groups = std::move(groups);
            out.method = PartitionMethod::Mcl;
            return out;
        }
    }

    if (const auto b = spectral_bisect(adj)) {
        auto groups = from_indices(members, b->positive, b->rest);
        if (consistent_with(groups, evidence)) {
            out.groups = std::move(groups);
            out.method = PartitionMethod::Spectral;
        }
    }
    return out;
}

Groups greedy_fallback(const DetectionEvidence& evidence, std::size_t n_workers, std::span<const WorkerId> malicious) {
    Groups g;
    for (auto w : evidence.minority)
        if (!contains(malicious, w)) g.g1.push_back(w);
    for (std::size_t i = 0; i < n_workers; ++i) {
        const WorkerId w(i);
        if (!contains(g.g1, w) && !contains(malicious, w)) g.g2.push_back(w);
    }
    g.g1 = sorted(std::move(g.g1));
    return g;
}

// ---------------------------------------------------------- trusted tasks

std::optional<std::size_t> TrustedTaskSet::first_unseen(std::span<const WorkerId> pool, bool skip_consumed) const {
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        if (skip_consumed && t.consumed) continue;
        bool fresh = true;
        for (auto w : pool)
            if (t.received[w.index()]) {
                fresh = false;
                break;
            }
        if (fresh) return i;
    }
    return std::nullopt;
}

void TrustedTaskSet::mark_sent(std::size_t index, std::span<const WorkerId> pool) {
    for (auto w : pool) tasks[index].received[w.index()] = true;
}

TrustedTaskSet build_trusted_tasks(const TaskRepository& tr, std::span<const WorkerId> g1,
                                   std::span<const WorkerId> g2) {
    TrustedTaskSet tt;
    const auto n = tr.n_workers();
    tt.used_by.assign(n, 0);
    for (const auto& t : tr.tasks()) {
        std::optional<ResultValue> agreed;
        for (const auto& [a, va] : t.votes) {
            if (!contains(g1, a)) continue;
            for (const auto& [b, vb] : t.votes)
                if (contains(g2, b) && va == vb) {
                    agreed = va;
                    break;
                }
            if (agreed) break;
        }
        if (!agreed) continue;
        TrustedTask task{t.task, *agreed, std::vector<bool>(n, false), false};
        for (const auto& [w, v] : t.votes) task.received[w.index()] = true;
        tt.tasks.push_back(std::move(task));
    }
    return tt;
}

// ------------------------------------------------------------- reputation

double ReputationScore::rs() const {
    if (scores.empty()) return 0.0;
    return static_cast<double>(std::accumulate(scores.begin(), scores.end(), 0)) / static_cast<double>(scores.size());
}

ScoreMap score_group(VoteChannel& channel, std::span<const WorkerId> group, std::span<const WorkerId> pad,
                     TrustedTaskSet& tt, int k, int e) {
    ScoreMap out;
    for (auto w : group) out[w];
    const auto size = static_cast<std::size_t>(k);
    if (group.empty() || e <= 0) return out;

    WorkerSet stuck;
    while (true) {
        // Least-verified first; ids break ties so rounds are deterministic.
        WorkerSet order(group.begin(), group.end());
        std::stable_sort(order.begin(), order.end(), [&](WorkerId a, WorkerId b) {
            return out[a].scores.size() < out[b].scores.size();
        });

        std::vector<Dispatch> round;
        std::vector<std::size_t> task_index;
        WorkerSet busy;
        for (auto anchor : order) {
            if (out[anchor].scores.size() >= static_cast<std::size_t>(e)) continue;
            if (contains(busy, anchor) || contains(stuck, anchor)) continue;

            // First trusted task the anchor has not seen that enough
            // partners have not seen either.
            std::optional<std::size_t> chosen;
            WorkerSet pool;
            for (std::size_t i = 0; i < tt.size() && !chosen; ++i) {
                const auto& t = tt.tasks[i];
                if (t.received[anchor.index()]) continue;
                pool = {anchor};
                auto take = [&](std::span<const WorkerId> from, bool allow_busy) {
                    for (auto c : from) {
                        if (pool.size() >= size) return;
                        if (contains(pool, c) || t.received[c.index()]) continue;
                        if (!allow_busy && contains(busy, c)) continue;
                        pool.push_back(c);
                    }
                };
                take(order, false);
                take(order, true);
                take(pad, true);
                if (pool.size() == size) chosen = i;
            }
            if (!chosen) {
                stuck.push_back(anchor);
                continue;
            }
            tt.mark_sent(*chosen, pool);
            for (auto w : pool) busy.push_back(w);
            round.push_back({tt.tasks[*chosen].task, pool});
            task_index.push_back(*chosen);
        }
        if (round.empty()) break;

        const auto votes = channel.run_round(round);
        for (std::size_t r = 0; r < round.size(); ++r) {
            const auto trusted = tt.tasks[task_index[r]].value;
            for (std::size_t j = 0; j < round[r].pool.size(); ++j) {
                const auto w = round[r].pool[j];
                auto it = out.find(w);
                if (it == out.end() || it->second.scores.size() >= static_cast<std::size_t>(e)) continue;
                it->second.scores.push_back(votes[r][j] == trusted ? 1 : -1);
                ++tt.used_by[w.index()];
            }
        }
    }
    return out;
}

ScoreSplit split_by_score(std::span<const WorkerId> g1, std::span<const WorkerId> g2, const ScoreMap& scores,
                          double honest_floor) {
    ScoreSplit out;
    out.g2.assign(g2.begin(), g2.end());

    // Workers that never got a trusted task carry no evidence; they stay in G1.
    WorkerSet scored, unscored;
    std::vector<double> rs;
    for (auto w : g1) {
        const auto it = scores.find(w);
        if (it == scores.end() || it->second.scores.empty()) {
            unscored.push_back(w);
        } else {
            scored.push_back(w);
            rs.push_back(it->second.rs());
        }
    }

    out.all_perfect = std::all_of(rs.begin(), rs.end(), [](double v) { return v == 1.0; });
    if (out.all_perfect) {
        out.which = VerificationCase::I;
        out.g1.assign(g1.begin(), g1.end());
        return out;
    }

    const auto km = kmeans_1d(rs);
    out.degenerate = km.degenerate;
    WorkerSet high, low;
    for (std::size_t i = 0; i < scored.size(); ++i) (km.label[i] == 1 ? high : low).push_back(scored[i]);

    double high_mean = 0.0;
    for (std::size_t i = 0; i < scored.size(); ++i)
        if (km.label[i] == 1) high_mean += rs[i];
    if (!high.empty()) high_mean /= static_cast<double>(high.size());

    if (!km.degenerate && high.size() >= low.size() && high_mean >= honest_floor) {
        out.which = VerificationCase::I;
        out.g1 = high;
        out.g1.insert(out.g1.end(), unscored.begin(), unscored.end());
        out.g2.insert(out.g2.end(), low.begin(), low.end());
    } else {
        out.which = VerificationCase::II;
        out.g1 = low;
        out.g1.insert(out.g1.end(), unscored.begin(), unscored.end());
        out.g2.insert(out.g2.end(), high.begin(), high.end());
    }
    out.g1 = sorted(std::move(out.g1));
    out.g2 = sorted(std::move(out.g2));
    return out;
}

Verdict verify_case1(VoteChannel& channel, std::span<const WorkerId> suspects, std::span<const WorkerId> honest,
                     TrustedTaskSet& tt, int k, int e, Rng& rng) {
    Verdict out;
    out.honest.assign(honest.begin(), honest.end());
    WorkerSet remaining(suspects.begin(), suspects.end());
    const auto size = static_cast<std::size_t>(k);
    const auto batch = static_cast<std::size_t>(std::max(1, e));

    if (remaining.size() < 2) {
        // A lone suspect cannot be outvoted by peers: compare it directly
        // against trusted values.
        for (auto w : remaining) {
            const WorkerSet pool{w};
            std::vector<Dispatch> round;
            std::vector<std::size_t> idx;
            while (round.size() < batch) {
                const auto i = tt.first_unseen(pool, true);
                if (!i) break;
                tt.mark_sent(*i, pool);
                tt.tasks[*i].consumed = true;
                round.push_back({tt.tasks[*i].task, pool});
                idx.push_back(*i);
            }
            bool mismatch = round.empty();
            if (!round.empty()) {
                const auto votes = channel.run_round(round);
                for (std::size_t r = 0; r < round.size(); ++r)
                    if (!(votes[r][0] == tt.tasks[idx[r]].value)) mismatch = true;
            }
            if (mismatch) {
                out.colluding.push_back(w);
            } else {
                out.honest.push_back(w);
            }
        }
        out.honest = sorted(std::move(out.honest));
        out.colluding = sorted(std::move(out.colluding));
        return out;
    }

    while (true) {
        WorkerSet order = remaining;
        std::shuffle(order.begin(), order.end(), rng);

        std::vector<WorkerSet> pools;
        for (std::size_t start = 0; start < order.size(); start += size) {
            WorkerSet pool(order.begin() + static_cast<std::ptrdiff_t>(start),
                           order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + size)));
            for (auto c : order) {
                if (pool.size() >= size) break;
                if (!contains(pool, c)) pool.push_back(c);
            }
            for (auto c : out.honest) {
                if (pool.size() >= size) break;
                if (!contains(pool, c)) pool.push_back(c);
            }
            if (pool.size() == size) pools.push_back(std::move(pool));
        }

        std::vector<Dispatch> round;
        std::vector<std::size_t> idx;
        for (const auto& pool : pools)
            for (std::size_t b = 0; b < batch; ++b) {
                const auto i = tt.first_unseen(pool, true);
                if (!i) break;
                tt.mark_sent(*i, pool);
                tt.tasks[*i].consumed = true;
                round.push_back({tt.tasks[*i].task, pool});
                idx.push_back(*i);
            }
        if (round.empty()) break;

        const auto votes = channel.run_round(round);
        WorkerSet cleared;
        for (std::size_t r = 0; r < round.size(); ++r) {
            const auto maj = majority(votes[r], k);
            if (!maj) continue;
            for (std::size_t j = 0; j < round[r].pool.size(); ++j) {
                const auto w = round[r].pool[j];
                if (!(votes[r][j] == *maj) && contains(remaining, w) && !contains(cleared, w)) cleared.push_back(w);
            }
        }
        for (auto w : cleared) out.honest.push_back(w);
        remaining = minus(remaining, cleared);
        if (remaining.size() < 2) break;
    }
    out.colluding = sorted(std::move(remaining));
    out.honest = sorted(std::move(out.honest));
    return out;
}

Verdict verify_case2(VoteChannel& channel, std::span<const WorkerId> suspects, std::span<const WorkerId> colluding,
                     TrustedTaskSet& tt, int k, int e, Rng& rng) {
    Verdict out;
    out.colluding.assign(colluding.begin(), colluding.end());
    const auto partners_needed = static_cast<std::size_t>(k - 1);

    struct Probe {
        WorkerId worker;
        int rounds = 0;
        bool resolved = false;
        bool cleared = false;
    };
    std::vector<Probe> probes;
    for (auto w : suspects) probes.push_back({w});

    for (int step = 0; step < e; ++step) {
        std::vector<Dispatch> round;
        std::vector<std::size_t> owner;
        for (std::size_t p = 0; p < probes.size(); ++p) {
            auto& probe = probes[p];
            if (probe.resolved) continue;
            const WorkerSet self{probe.worker};
            std::optional<std::size_t> chosen;
            WorkerSet pool;
            for (std::size_t i = 0; i < tt.size() && !chosen; ++i) {
                const auto& t = tt.tasks[i];
                if (t.received[probe.worker.index()]) continue;
                WorkerSet partners;
                for (auto c : colluding)
                    if (!t.received[c.index()]) partners.push_back(c);
                if (partners.size() < partners_needed) {
                    // Too few known colluders: top up with other suspects.
                    for (auto c : suspects)
                        if (!(c == probe.worker) && !t.received[c.index()] && !contains(partners, c))
                            partners.push_back(c);
                    if (partners.size() < partners_needed) continue;
                    pool = {probe.worker};
                    for (std::size_t j = 0; j < partners_needed; ++j) pool.push_back(partners[j]);
                } else {
                    pool = {probe.worker};
                    for (auto c : select_pool(partners, static_cast<int>(partners_needed), rng)) pool.push_back(c);
                }
                chosen = i;
            }
            if (!chosen) {
                probe.resolved = true;
                continue;
            }
            tt.mark_sent(*chosen, pool);
            round.push_back({tt.tasks[*chosen].task, pool});
            owner.push_back(p);
        }
        if (round.empty()) break;

        const auto votes = channel.run_round(round);
        for (std::size_t r = 0; r < round.size(); ++r) {
            auto& probe = probes[owner[r]];
            ++probe.rounds;
            const auto maj = majority(votes[r], k);
            if (maj && !(votes[r][0] == *maj)) {
                probe.resolved = true;
                probe.cleared = true;
            }
        }
    }

    for (const auto& probe : probes) {
        if (probe.cleared) {
            out.honest.push_back(probe.worker);
        } else if (probe.rounds == 0) {
            out.honest.push_back(probe.worker);
            out.reduced_confidence = true;
        } else {
            if (probe.rounds < e) out.reduced_confidence = true;
            out.colluding.push_back(probe.worker);
        }
    }
    out.honest = sorted(std::move(out.honest));
    out.colluding = sorted(std::move(out.colluding));
    return out;
}

// --------------------------------------------------------------- pipeline

MitigationReport finalize(const PartitionState& state, WorkerSet honest, WorkerSet colluding, double end_time) {
    MitigationReport r;
    r.malicious = sorted(state.malicious);
    r.honest = sorted(std::move(honest));
    r.colluding = sorted(std::move(colluding));
    r.end_time = end_time;
    r.complete = true;
    return r;
}

namespace {

void note(MitigationReport& report, const VoteChannel& channel, std::string phase, const PartitionState& s,
          std::size_t count) {
    report.phases.push_back({std::move(phase), channel.now(), sorted(s.g1), sorted(s.g2), sorted(s.malicious), count});
}

void carry(MitigationReport& into, MitigationReport&& from) {
    from.start_time = into.start_time;
    from.method = into.method;
    from.verification = into.verification;
    from.observation_pools = into.observation_pools;
    from.trusted_tasks = into.trusted_tasks;
    from.phases = std::move(into.phases);
    from.graph_edges = std::move(into.graph_edges);
    from.reduced_confidence = from.reduced_confidence || into.reduced_confidence;
    from.inconclusive = into.inconclusive;
    into = std::move(from);
}

}  // namespace

MitigationReport run_mitigation(VoteChannel& channel, const DetectionEvidence& evidence, std::size_t n_workers,
                                const MitigationParams& params, Rng& rng) {
    MitigationReport report;
    report.start_time = channel.now();
    PartitionState state;
    const auto everyone = all_workers(n_workers);

    TaskRepository tr(n_workers);
    const auto collected = collect_observations(channel, tr, everyone, params.pool_size, params.pair_target, rng);
    report.observation_pools = collected.pools;
    if (!collected.complete) {
        report.end_time = channel.now();
        return report;
    }
    note(report, channel, "observations", state, tr.tasks().size());

    const auto graph = build_similarity_graph(tr);
    {
        std::ostringstream edges;
        graph.write_edges(edges);
        report.graph_edges = edges.str();
    }

    state.malicious = sorted(eigentrust_filter(graph, params.eigentrust));
    const auto members = minus(everyone, state.malicious);
    note(report, channel, "eigentrust", state, state.malicious.size());

    auto part = partition(graph, members, &evidence, params.mcl);
    Groups groups;
    if (part.groups) {
        groups = std::move(*part.groups);
        report.method = part.method;
    } else {
        groups = greedy_fallback(evidence, n_workers, state.malicious);
        report.method = PartitionMethod::Greedy;
    }
    if (groups.g1.size() < groups.g2.size()) std::swap(groups.g1, groups.g2);
    state.g1 = sorted(std::move(groups.g1));
    state.g2 = sorted(std::move(groups.g2));
    note(report, channel, "partition", state, part.mcl_clusters);

    if (params.stop_after == MitigationStage::Partition) {
        carry(report, finalize(state, state.g1, state.g2, channel.now()));
        return report;
    }

    try {
        state.tt = build_trusted_tasks(tr, state.g1, state.g2);
        if (state.tt.empty()) {
            const auto more =
                collect_observations(channel, tr, everyone, params.pool_size, 2 * params.pair_target, rng);
            report.observation_pools += more.pools;
            if (!more.complete) throw SimulationExpired();
            state.tt = build_trusted_tasks(tr, state.g1, state.g2);
        }
        report.trusted_tasks = state.tt.size();
        note(report, channel, "trusted-tasks", state, state.tt.size());
        if (state.tt.empty() || state.g2.empty()) {
            report.inconclusive = true;
            carry(report, finalize(state, state.g1, state.g2, channel.now()));
            return report;
        }

        state.rs = score_group(channel, state.g1, state.g2, state.tt, params.pool_size, params.e);
        const auto split = split_by_score(state.g1, state.g2, state.rs, params.honest_floor);
        state.g1 = split.g1;
        state.g2 = split.g2;
        report.verification = split.which;
        note(report, channel, split.which == VerificationCase::I ? "named-honest" : "named-colluding", state,
             state.rs.size());

        if (params.stop_after == MitigationStage::GroupIdentification) {
            if (split.which == VerificationCase::I) {
                carry(report, finalize(state, state.g1, state.g2, channel.now()));
            } else {
                carry(report, finalize(state, state.g2, state.g1, channel.now()));
            }
            return report;
        }

        Verdict verdict;
        if (split.which == VerificationCase::I) {
            verdict = verify_case1(channel, state.g2, state.g1, state.tt, params.pool_size, params.e, rng);
        } else {
            verdict = verify_case2(channel, state.g2, state.g1, state.tt, params.pool_size, params.e, rng);
        }
        state.g1 = verdict.honest;
        state.g2 = verdict.colluding;
        note(report, channel, "verified", state, state.tt.size());
        auto final_report = finalize(state, verdict.honest, verdict.colluding, channel.now());
        final_report.reduced_confidence = verdict.reduced_confidence;
        carry(report, std::move(final_report));
    } catch (const SimulationExpired&) {
        report.complete = false;
        report.end_time = channel.now();
    }
    return report;
}

}  // namespace serene
