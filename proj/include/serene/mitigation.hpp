#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "serene/clustering.hpp"
#include "serene/detection.hpp"
#include "serene/graph.hpp"
#include "serene/rng.hpp"
#include "serene/types.hpp"

namespace serene {

/// Raised by a VoteChannel when simulated time runs out mid-mitigation.
class SimulationExpired : public std::runtime_error {
public:
    SimulationExpired() : std::runtime_error("simulation ended during mitigation") {}
};

/// An existing task re-sent to a pool during group identification.
struct Dispatch {
    TaskId task;
    WorkerSet pool;
};

/// How the mitigation pipeline talks to the workers. The simulator backs
/// this with its event loop; tests back it with a direct WorkerModel.
class VoteChannel {
public:
    virtual ~VoteChannel() = default;

    virtual double now() const = 0;
    /// Assigns the next genuine task to `pool`; returns once it is sent.
    virtual TaskId dispatch_genuine(std::span<const WorkerId> pool) = 0;
    /// Blocks until every vote of the given genuine tasks has arrived.
    /// Result is aligned with `tasks`.
    virtual std::vector<std::vector<Vote>> await_genuine(std::span<const TaskId> tasks) = 0;
    /// Sends all dispatches concurrently and waits for every vote. Result is
    /// aligned with `round`, inner vectors with each pool.
    virtual std::vector<std::vector<ResultValue>> run_round(std::span<const Dispatch> round) = 0;
};

// ------------------------------------------------------------ observations

/// Pool that most raises the minimum pair count among `members`.
WorkerSet next_coverage_pool(const PairCounts& counts, std::span<const WorkerId> members, int k, int target,
                             Rng& rng);

struct CollectResult {
    bool complete = true;
    std::size_t pools = 0;
};

/// Routes genuine tasks to greedily chosen pools until every pair of
/// `members` co-appeared in at least `target` pools, then waits for the votes.
CollectResult collect_observations(VoteChannel& channel, TaskRepository& tr, std::span<const WorkerId> members,
                                   int k, int target, Rng& rng);

// ------------------------------------------------------------ partitioning

enum class PartitionMethod { None, Mcl, Spectral, Greedy };
std::string_view to_string(PartitionMethod m);

struct Groups {
    WorkerSet g1;
    WorkerSet g2;
};

struct PartitionOutcome {
    std::optional<Groups> groups;
    PartitionMethod method = PartitionMethod::None;
    std::size_t mcl_clusters = 0;
};

/// Naive-malicious filter: the workers EigenTrust flags.
WorkerSet eigentrust_filter(const SimilarityGraph& g, const EigenTrustParams& params = {});

/// Splits `members` into two groups with the first algorithm of [MCL,
/// spectral bisection] that yields exactly two clusters. When `evidence` is
/// given, a split is accepted only if it keeps the workers that triggered
/// detection together and apart from at least one majority voter.
PartitionOutcome partition(const SimilarityGraph& g, std::span<const WorkerId> members,
                           const DetectionEvidence* evidence = nullptr, const MclParams& mcl_params = {});

/// Grouping from the detection probe alone: G1 = workers that returned the
/// triggering value, G2 = every other worker; M is removed from both.
Groups greedy_fallback(const DetectionEvidence& evidence, std::size_t n_workers, std::span<const WorkerId> malicious);

// ---------------------------------------------------------- trusted tasks

struct TrustedTask {
    TaskId task;
    ResultValue value;
    std::vector<bool> received;  // per worker: voted in TR or was sent it since
    bool consumed = false;       // spent by Case I verification
};

struct TrustedTaskSet {
    std::vector<TrustedTask> tasks;
    std::vector<int> used_by;  // per worker: trusted-task verifications so far

    bool empty() const { return tasks.empty(); }
    std::size_t size() const { return tasks.size(); }
    /// Index of the first task none of `pool` has received.
    std::optional<std::size_t> first_unseen(std::span<const WorkerId> pool, bool skip_consumed = false) const;
    void mark_sent(std::size_t index, std::span<const WorkerId> pool);
};

/// Tasks on which some member of g1 and some member of g2 voted the same
/// value; that value is trusted.
TrustedTaskSet build_trusted_tasks(const TaskRepository& tr, std::span<const WorkerId> g1,
                                   std::span<const WorkerId> g2);

// ------------------------------------------------------------- reputation

struct ReputationScore {
    std::vector<int> scores;  // +1 / -1 per trusted-task verification
    double rs() const;
};

using ScoreMap = std::map<WorkerId, ReputationScore>;

/// Verifies the members of `group` in pools of its k least-verified members
/// against trusted tasks until everyone has e scores or TT runs dry.
/// `pad` supplies extra pool members (unscored) when the group has fewer
/// than k workers.
ScoreMap score_group(VoteChannel& channel, std::span<const WorkerId> group, std::span<const WorkerId> pad,
                     TrustedTaskSet& tt, int k, int e);

enum class VerificationCase { I, II };

struct ScoreSplit {
    VerificationCase which = VerificationCase::I;
    WorkerSet g1;  // named group: honest in Case I, colluding in Case II
    WorkerSet g2;  // unverified group
    bool all_perfect = false;
    bool degenerate = false;
};

/// Names G1 from its reputation scores with a K = 2 k-means split. The
/// higher cluster is taken as honest (Case I) only when it is at least as
/// large as the lower cluster and its mean score reaches `honest_floor`.
ScoreSplit split_by_score(std::span<const WorkerId> g1, std::span<const WorkerId> g2, const ScoreMap& scores,
                          double honest_floor = 0.95);

struct Verdict {
    WorkerSet honest;
    WorkerSet colluding;
    bool reduced_confidence = false;
};

/// Case I: the unverified group is mostly colluding. Pools drawn from it
/// are run against trusted tasks until TT is exhausted; anyone outvoted is
/// honest. `batch` tasks are sent to each pool per round.
Verdict verify_case1(VoteChannel& channel, std::span<const WorkerId> suspects, std::span<const WorkerId> honest,
                     TrustedTaskSet& tt, int k, int e, Rng& rng);

/// Case II: the unverified group is mostly honest. Each suspect is pooled
/// with k-1 known colluders for up to e trusted tasks; a single
/// disagreement with the pool majority clears it, e unanimous rounds
/// convict it.
Verdict verify_case2(VoteChannel& channel, std::span<const WorkerId> suspects, std::span<const WorkerId> colluding,
                     TrustedTaskSet& tt, int k, int e, Rng& rng);

// --------------------------------------------------------------- pipeline

enum class MitigationStage { Partition, GroupIdentification, Full };

struct MitigationParams {
    int pool_size = 3;
    int pair_target = 8;
    int e = 12;
    double honest_floor = 0.95;
    EigenTrustParams eigentrust;
    MclParams mcl;
    MitigationStage stop_after = MitigationStage::Full;
};

struct PartitionState {
    WorkerSet malicious;
    WorkerSet g1;
    WorkerSet g2;
    TrustedTaskSet tt;
    ScoreMap rs;
};

struct PhaseRecord {
    std::string phase;
    double time = 0.0;
    WorkerSet g1;
    WorkerSet g2;
    WorkerSet malicious;
    std::size_t count = 0;
};

struct MitigationReport {
    WorkerSet honest;
    WorkerSet colluding;
    WorkerSet malicious;
    double start_time = 0.0;
    double end_time = 0.0;
    bool complete = false;
    bool inconclusive = false;
    bool reduced_confidence = false;
    PartitionMethod method = PartitionMethod::None;
    std::optional<VerificationCase> verification;
    std::size_t observation_pools = 0;
    std::size_t trusted_tasks = 0;
    std::vector<PhaseRecord> phases;
    std::string graph_edges;  // edge-list dump of the similarity graph
};

/// Classification report from a fully named state (sets sorted).
MitigationReport finalize(const PartitionState& state, WorkerSet honest, WorkerSet colluding, double end_time);

/// Runs detection-triggered mitigation end to end. Returns an incomplete
/// report if the channel expires.
MitigationReport run_mitigation(VoteChannel& channel, const DetectionEvidence& evidence, std::size_t n_workers,
                                const MitigationParams& params, Rng& rng);

}  // namespace serene
