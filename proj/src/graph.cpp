#include "serene/graph.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

namespace serene {

void PairCounts::bump_pool(std::span<const WorkerId> pool) {
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i + 1; j < pool.size(); ++j)
            if (!(pool[i] == pool[j])) bump(pool[i], pool[j]);
}

int PairCounts::min_pair(std::span<const WorkerId> members) const {
    WorkerSet all;
    if (members.empty()) {
        all = all_workers(n_);
        members = all;
    }
    if (members.size() < 2) return 0;
    int best = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j) best = std::min(best, at(members[i], members[j]));
    return best;
}

std::vector<double> SimilarityGraph::dense(std::span<const WorkerId> members) const {
    const auto m = members.size();
    std::vector<double> out(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j) out[i * m + j] = weight(members[i], members[j]);
    return out;
}

void SimilarityGraph::write_edges(std::ostream& out) const {
    const auto n = size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const WorkerId a(i), b(j);
            if (!has_edge(a, b)) continue;
            out << i << ' ' << j << ' ' << agree_.at(a, b) << ' ' << co_.at(a, b) << ' ' << weight(a, b) << '\n';
        }
}

SimilarityGraph build_similarity_graph(std::span<const TrTask> tasks, std::size_t n_workers) {
    SimilarityGraph g(n_workers);
    for (const auto& t : tasks) {
        const auto& v = t.votes;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j)
                if (!(v[i].first == v[j].first)) g.observe(v[i].first, v[j].first, v[i].second == v[j].second);
    }
    return g;
}

SimilarityGraph build_similarity_graph(const TaskRepository& tr) {
    return build_similarity_graph(tr.tasks(), tr.n_workers());
}

}  // namespace serene
