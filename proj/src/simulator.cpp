#include "serene/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <queue>
#include <thread>
#include <unordered_map>

#include "serene/behaviors.hpp"
#include "serene/detection.hpp"
#include "serene/replication.hpp"
#include "serene/sne.hpp"

namespace serene {

std::string_view to_string(Scheme s) {
    switch (s) {
        case Scheme::Serene: return "serene";
        case Scheme::SerenePrt: return "serene-prt";
        case Scheme::SerenePrtG1: return "serene-prt-g1";
        case Scheme::Sne8: return "sne8";
        case Scheme::Sne12: return "sne12";
    }
    return "?";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "serene" || name == "full") return Scheme::Serene;
    if (name == "serene-prt" || name == "partitioning-only") return Scheme::SerenePrt;
    if (name == "serene-prt-g1" || name == "group-identification") return Scheme::SerenePrtG1;
    if (name == "sne8") return Scheme::Sne8;
    if (name == "sne12") return Scheme::Sne12;
    throw ConfigError("unknown scheme: " + std::string(name));
}

bool is_sne(Scheme s) { return s == Scheme::Sne8 || s == Scheme::Sne12; }

bool RunTrace::has_collusion() const {
    return std::any_of(roster.begin(), roster.end(), [](WorkerClass c) { return c == WorkerClass::Colluding; });
}

namespace {

enum class EventKind : std::uint8_t { GenerateTask, DeliverVote, DetectTick, CollusionActivate, SimEnd };

struct Event {
    double time;
    std::uint64_t seq;
    EventKind kind;
    std::uint64_t dispatch = 0;
    std::uint32_t slot = 0;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

enum class Purpose : std::uint8_t { Genuine, Redispatch, CvtProbe, Mitigation };

struct DispatchRecord {
    TaskId task;
    Purpose purpose;
    WorkerSet pool;
    std::vector<ResultValue> values;
    std::vector<double> arrivals;
    std::uint32_t pending = 0;
};

struct Verified {
    TaskId task;
    ResultValue majority;
    std::vector<Vote> votes;
};

class Fnv {
public:
    void add(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= (v >> (8 * i)) & 0xffU;
            h_ *= 0x100000001b3ULL;
        }
    }
    void add(double d) { add(std::bit_cast<std::uint64_t>(d)); }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

class Simulation final : public VoteChannel {
public:
    Simulation(const ScenarioConfig& cfg, Scheme scheme)
        : cfg_(cfg),
          scheme_(scheme),
          n_(static_cast<std::size_t>(cfg.n_workers)),
          k_(cfg.pool_size),
          network_(make_stream(cfg.rng_seed, Stream::Network)),
          verifier_(make_stream(cfg.rng_seed, Stream::Verifier)),
          detection_rng_(make_stream(cfg.rng_seed, Stream::Detection)),
          mitigation_rng_(make_stream(cfg.rng_seed, Stream::Mitigation)),
          cvt_(static_cast<std::size_t>(cfg.effective_cvt_len()), n_),
          everyone_(all_workers(n_)) {
        cfg_.validate();
        trace_.config = cfg;
        trace_.scheme = scheme;

        auto roster_rng = make_stream(cfg.rng_seed, Stream::Roster);
        trace_.roster = build_roster(cfg, roster_rng);

        auto activation_rng = make_stream(cfg.rng_seed, Stream::Activation);
        trace_.activation_time = uniform(activation_rng, cfg.collusion_start_min, cfg.collusion_start_max);
        ColluderState ring(trace_.roster, trace_.activation_time, activation_rng());
        ring.joint_draw = cfg.joint_collusion_draw;
        ring.shared_memory = cfg.ring_shared_memory;
        workers_.emplace(trace_.roster, std::move(ring), cfg.epsilon, cfg.p_collude,
                         make_stream(cfg.rng_seed, Stream::Workers));

        if (is_sne(scheme)) {
            SneConfig sc;
            sc.obs_per_edge = scheme == Scheme::Sne8 ? 8 : 12;
            sne_.emplace(n_, sc);
        }
        genuine_total_ = static_cast<std::uint64_t>(std::floor(cfg.task_rate * cfg.sim_end + 1e-9));
    }

    RunTrace execute() {
        const auto wall_start = std::chrono::steady_clock::now();
        schedule(0.0, EventKind::GenerateTask);
        if (!is_sne(scheme_)) schedule(cfg_.detect_period, EventKind::DetectTick);
        schedule(trace_.activation_time, EventKind::CollusionActivate);
        schedule(cfg_.sim_end, EventKind::SimEnd);

        while (!queue_.empty()) step();

        trace_.stats.collusions = workers_->collusions();
        if (!stopped_) trace_.stats.end_time = now_;
        trace_.digest = digest_.value();
        trace_.stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        return std::move(trace_);
    }

    // VoteChannel ------------------------------------------------------

    double now() const override { return now_; }

    TaskId dispatch_genuine(std::span<const WorkerId> pool) override {
        claim_.assign(pool.begin(), pool.end());
        claimed_.reset();
        run_until([&] { return claimed_.has_value(); });
        return claimed_->first;
    }

    std::vector<std::vector<Vote>> await_genuine(std::span<const TaskId> tasks) override {
        std::vector<std::uint64_t> ids;
        ids.reserve(tasks.size());
        for (auto t : tasks) ids.push_back(held_genuine_.at(t.seq));
        run_until([&] {
            return std::all_of(ids.begin(), ids.end(), [&](std::uint64_t id) { return records_.at(id).pending == 0; });
        });
        std::vector<std::vector<Vote>> out;
        out.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto& r = records_.at(ids[i]);
            std::vector<Vote> votes;
            for (std::size_t j = 0; j < r.pool.size(); ++j) votes.push_back({r.task, r.pool[j], r.values[j], r.arrivals[j]});
            out.push_back(std::move(votes));
            held_genuine_.erase(tasks[i].seq);
            records_.erase(ids[i]);
        }
        return out;
    }

    std::vector<std::vector<ResultValue>> run_round(std::span<const Dispatch> round) override {
        if (stopped_) throw SimulationExpired();
        std::vector<std::uint64_t> ids;
        ids.reserve(round.size());
        for (const auto& d : round)
            ids.push_back(dispatch(TaskId{d.task.seq, TaskOrigin::MitigationProbe}, d.pool, Purpose::Mitigation));
        run_until([&] {
            return std::all_of(ids.begin(), ids.end(), [&](std::uint64_t id) { return records_.at(id).pending == 0; });
        });
        std::vector<std::vector<ResultValue>> out;
        out.reserve(ids.size());
        for (auto id : ids) {
            out.push_back(std::move(records_.at(id).values));
            records_.erase(id);
        }
        return out;
    }

private:
    void schedule(double time, EventKind kind, std::uint64_t dispatch = 0, std::uint32_t slot = 0) {
        queue_.push(Event{time, next_seq_++, kind, dispatch, slot});
    }

    template <typename Pred>
    void run_until(Pred done) {
        while (!done()) {
            if (stopped_ || queue_.empty()) throw SimulationExpired();
            step();
        }
    }

    void stop() {
        if (stopped_) return;
        stopped_ = true;
        trace_.stats.end_time = now_;
    }

    void step() {
        const Event ev = queue_.top();
        queue_.pop();
        if (ev.time < now_) trace_.stats.time_monotonic = false;
        now_ = ev.time;
        ++trace_.stats.events;
        digest_.add(ev.time);
        digest_.add(static_cast<std::uint64_t>(ev.kind));
        digest_.add(ev.dispatch);
        digest_.add(static_cast<std::uint64_t>(ev.slot));

        switch (ev.kind) {
            case EventKind::GenerateTask: on_generate(); break;
            case EventKind::DeliverVote: on_vote(ev.dispatch, ev.slot); break;
            case EventKind::DetectTick: on_tick(); break;
            case EventKind::CollusionActivate: break;
            case EventKind::SimEnd: stop(); break;
        }
    }

    std::uint64_t dispatch(TaskId task, std::span<const WorkerId> pool, Purpose purpose) {
        const auto id = next_dispatch_++;
        DispatchRecord r{task, purpose, WorkerSet(pool.begin(), pool.end()), {}, {}, 0};
        r.values = workers_->respond(task, pool, now_);
        r.arrivals.resize(pool.size());
        for (std::size_t j = 0; j < pool.size(); ++j) {
            const double rtt = uniform(network_, cfg_.rtt_min_ms, cfg_.rtt_max_ms) / 1000.0;
            r.arrivals[j] = now_ + rtt;
            schedule(r.arrivals[j], EventKind::DeliverVote, id, static_cast<std::uint32_t>(j));
        }
        r.pending = static_cast<std::uint32_t>(pool.size());
        trace_.stats.votes_dispatched += pool.size();
        if (cfg_.record_dispatch_log) trace_.dispatch_log.push_back({now_, task, r.pool});
        records_.emplace(id, std::move(r));
        return id;
    }

    void on_generate() {
        if (stopped_) return;
        const TaskId task{generated_++, TaskOrigin::Genuine};
        ++trace_.stats.genuine_generated;
        if (generated_ < genuine_total_) {
            const double next = static_cast<double>(generated_) / cfg_.task_rate;
            if (next < cfg_.sim_end) schedule(next, EventKind::GenerateTask);
        }

        if (!claim_.empty()) {
            const auto id = dispatch(task, claim_, Purpose::Genuine);
            held_genuine_[task.seq] = id;
            claimed_ = std::make_pair(task, id);
            claim_.clear();
            return;
        }
        dispatch(task, select_pool(everyone_, k_, verifier_), Purpose::Genuine);
    }

    void on_tick() {
        if (stopped_) return;
        const double next = now_ + cfg_.detect_period;
        if (next < cfg_.sim_end) schedule(next, EventKind::DetectTick);
        if (mitigating_) return;

        const auto sel = select_probe(cvt_, k_, detection_rng_);
        if (const auto* rep = std::get_if<ReplacementNeeded>(&sel)) {
            if (latest_ && cvt_.replace(rep->task, latest_->task, latest_->majority, latest_->votes))
                ++trace_.stats.replacements;
        } else if (const auto* probe = std::get_if<ProbeRequest>(&sel)) {
            cvt_.mark_sent(probe->task, probe->pool);
            ++trace_.stats.probes;
            dispatch(TaskId{probe->task.seq, TaskOrigin::CvtProbe}, probe->pool, Purpose::CvtProbe);
        }
    }

    void on_vote(std::uint64_t id, std::uint32_t slot) {
        auto it = records_.find(id);
        if (it == records_.end()) return;
        auto& r = it->second;
        --r.pending;
        ++trace_.stats.votes_delivered;
        const Vote vote{r.task, r.pool[slot], r.values[slot], now_};
        digest_.add(vote.value.bits);

        if (r.purpose == Purpose::CvtProbe) {
            const bool done = r.pending == 0;
            // Detection may start mitigation, which re-enters the event loop.
            if (done) records_.erase(it);
            on_probe_vote(vote);
            return;
        }
        if (r.pending > 0 || r.purpose == Purpose::Mitigation) return;
        if (held_genuine_.contains(r.task.seq) && held_genuine_.at(r.task.seq) == id) return;
        on_genuine_complete(it);
    }

    void on_genuine_complete(std::unordered_map<std::uint64_t, DispatchRecord>::iterator it) {
        DispatchRecord r = std::move(it->second);
        records_.erase(it);

        std::vector<Vote> votes;
        for (std::size_t j = 0; j < r.pool.size(); ++j) votes.push_back({r.task, r.pool[j], r.values[j], r.arrivals[j]});

        if (sne_ && !stopped_) {
            TrTask t{r.task, {}};
            for (const auto& v : votes) t.votes.emplace_back(v.worker, v.value);
            if (auto verdict = sne_->observe(t); verdict && verdict->detected) on_sne_detection(*verdict);
        }

        const auto maj = majority(std::span<const ResultValue>(r.values), k_);
        if (!maj) {
            if (r.purpose == Purpose::Genuine && !stopped_) {
                WorkerSet fresh;
                for (auto w : everyone_)
                    if (std::find(r.pool.begin(), r.pool.end(), w) == r.pool.end()) fresh.push_back(w);
                if (fresh.size() >= static_cast<std::size_t>(k_)) {
                    ++trace_.stats.redispatches;
                    dispatch(r.task, select_pool(fresh, k_, verifier_), Purpose::Redispatch);
                }
            }
            return;
        }
        if (sne_ || mitigating_) return;
        latest_ = Verified{r.task, *maj, votes};
        if (!cvt_.full()) cvt_.admit(r.task, *maj, votes);
    }

    void on_probe_vote(const Vote& vote) {
        if (stopped_ || mitigating_) return;
        CvtEntry* entry = cvt_.find(vote.task);
        if (entry == nullptr) return;
        if (detect(*entry, vote) != DetectOutcome::Collusion) return;

        const auto evidence = collect_evidence(*entry, vote);
        trace_.detections.push_back(
            {now_, vote.task, evidence.minority, trace_.stats.probes, now_ < trace_.activation_time});
        cvt_.wipe();
        latest_.reset();
        if (!trace_.mitigation) start_mitigation(evidence);
    }

    void start_mitigation(const DetectionEvidence& evidence) {
        MitigationParams p;
        p.pool_size = k_;
        p.pair_target = cfg_.pair_pool_target;
        p.e = cfg_.obs_per_edge;
        p.honest_floor = cfg_.honest_score_floor;
        p.eigentrust.tau = cfg_.eigentrust_tau;
        if (scheme_ == Scheme::SerenePrt) p.stop_after = MitigationStage::Partition;
        if (scheme_ == Scheme::SerenePrtG1) p.stop_after = MitigationStage::GroupIdentification;

        mitigating_ = true;
        claim_.clear();
        auto report = run_mitigation(*this, evidence, n_, p, mitigation_rng_);
        mitigating_ = false;
        claim_.clear();
        for (const auto& [seq, id] : held_genuine_) records_.erase(id);
        held_genuine_.clear();
        const bool complete = report.complete;
        trace_.mitigation = std::move(report);
        if (cfg_.halt_on_finalize || !complete) stop();
    }

    void on_sne_detection(const SneVerdict& verdict) {
        trace_.detections.push_back({now_, TaskId{}, verdict.colluding, sne_->windows(), now_ < trace_.activation_time});
        if (trace_.mitigation) return;
        MitigationReport r;
        r.honest = verdict.honest;
        r.colluding = verdict.colluding;
        r.start_time = now_;
        r.end_time = now_;
        r.complete = true;
        r.method = PartitionMethod::Mcl;
        trace_.mitigation = std::move(r);
        if (cfg_.halt_on_finalize) stop();
    }

    ScenarioConfig cfg_;
    Scheme scheme_;
    std::size_t n_;
    int k_;
    Rng network_;
    Rng verifier_;
    Rng detection_rng_;
    Rng mitigation_rng_;
    std::optional<WorkerModel> workers_;
    CvtTable cvt_;
    WorkerSet everyone_;
    std::optional<SneMonitor> sne_;
    RunTrace trace_;
    Fnv digest_;

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::unordered_map<std::uint64_t, DispatchRecord> records_;
    std::unordered_map<std::uint64_t, std::uint64_t> held_genuine_;  // task seq -> dispatch
    std::optional<Verified> latest_;
    WorkerSet claim_;
    std::optional<std::pair<TaskId, std::uint64_t>> claimed_;

    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_dispatch_ = 0;
    std::uint64_t generated_ = 0;
    std::uint64_t genuine_total_ = 0;
    bool stopped_ = false;
    bool mitigating_ = false;
};

}  // namespace

RunTrace run(const ScenarioConfig& config, Scheme scheme) { return Simulation(config, scheme).execute(); }

std::vector<BatchResult> run_batch(const std::vector<BatchJob>& jobs, unsigned threads) {
    std::vector<BatchResult> out(jobs.size());
    if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) out[i] = {jobs[i], run(jobs[i].config, jobs[i].scheme)};
    };
    if (threads <= 1) {
        worker();
        return out;
    }
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    pool.clear();
    return out;
}

}  // namespace serene
