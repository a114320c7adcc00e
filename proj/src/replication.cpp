#include "serene/replication.hpp"

#include <string>

namespace serene {

WorkerSet select_pool(std::span<const WorkerId> candidates, int k, Rng& rng) {
    if (k < 0 || candidates.size() < static_cast<std::size_t>(k))
        throw InsufficientWorkers("need " + std::to_string(k) + " workers, have " + std::to_string(candidates.size()));
    WorkerSet scratch(candidates.begin(), candidates.end());
    const auto n = scratch.size();
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
        const auto j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
        std::swap(scratch[i], scratch[j]);
    }
    scratch.resize(static_cast<std::size_t>(k));
    return scratch;
}

std::optional<ResultValue> majority(std::span<const ResultValue> values, int k) {
    // Boyer-Moore candidate, then a confirming count.
    std::optional<ResultValue> candidate;
    int balance = 0;
    for (auto v : values) {
        if (balance == 0) {
            candidate = v;
            balance = 1;
        } else if (*candidate == v) {
            ++balance;
        } else {
            --balance;
        }
    }
    if (!candidate) return std::nullopt;
    int count = 0;
    for (auto v : values) count += (v == *candidate) ? 1 : 0;
    if (2 * count > k) return candidate;
    return std::nullopt;
}

std::optional<ResultValue> majority(std::span<const Vote> votes, int k) {
    std::vector<ResultValue> values;
    values.reserve(votes.size());
    for (const auto& v : votes) values.push_back(v.value);
    return majority(values, k);
}

}  // namespace serene
