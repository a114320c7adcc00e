#include "serene/sne.hpp"

#include <algorithm>

namespace serene {

namespace {

double mean_internal_weight(const SimilarityGraph& g, std::span<const std::size_t> cluster) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < cluster.size(); ++i)
        for (std::size_t j = i + 1; j < cluster.size(); ++j) {
            sum += g.weight(WorkerId(cluster[i]), WorkerId(cluster[j]));
            ++count;
        }
    return count > 0 ? sum / count : 0.0;
}

}  // namespace

SneVerdict sne_classify(const SimilarityGraph& g, const MclParams& mcl_params) {
    SneVerdict out;
    const auto everyone = all_workers(g.size());
    const auto clusters = mcl(adjacency_of(g, everyone), mcl_params);
    out.clusters = clusters.size();
    if (clusters.size() < 2) {
        out.honest = everyone;
        return out;
    }
    out.detected = true;

    std::size_t best = 0;
    for (std::size_t c = 1; c < clusters.size(); ++c) {
        const auto size = clusters[c].size(), top = clusters[best].size();
        if (size > top || (size == top && mean_internal_weight(g, clusters[c]) > mean_internal_weight(g, clusters[best])))
            best = c;
    }
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (auto i : clusters[c]) (c == best ? out.honest : out.colluding).emplace_back(i);
    std::sort(out.honest.begin(), out.honest.end());
    std::sort(out.colluding.begin(), out.colluding.end());
    return out;
}

SneMonitor::SneMonitor(std::size_t n_workers, SneConfig cfg) : cfg_(cfg), window_(n_workers) {}

std::optional<SneVerdict> SneMonitor::observe(const TrTask& task) {
    WorkerSet pool;
    for (const auto& [w, v] : task.votes) pool.push_back(w);
    window_.note_pool(pool);
    window_.add(task);
    if (window_.pair_counts().min_pair() < cfg_.obs_per_edge) return std::nullopt;

    ++windows_;
    auto verdict = sne_classify(build_similarity_graph(window_), cfg_.mcl);
    window_.clear();
    return verdict;
}

SneRun sne_run(std::span<const TrTask> stream, std::size_t n_workers, const SneConfig& cfg) {
    SneRun out;
    SneMonitor monitor(n_workers, cfg);
    for (const auto& t : stream) {
        ++out.tasks_used;
        if (auto v = monitor.observe(t); v && v->detected) {
            out.detected = true;
            out.honest = std::move(v->honest);
            out.colluding = std::move(v->colluding);
            break;
        }
    }
    out.windows = monitor.windows();
    return out;
}

}  // namespace serene
