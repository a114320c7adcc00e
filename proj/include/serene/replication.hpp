#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "serene/rng.hpp"
#include "serene/types.hpp"

namespace serene {

class InsufficientWorkers : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One task sent to one voting pool.
struct PoolDispatch {
    TaskId task;
    WorkerSet pool;
    double dispatch_time = 0.0;
    std::vector<Vote> votes;
};

/// Uniform random k-subset of `candidates`, in draw order.
WorkerSet select_pool(std::span<const WorkerId> candidates, int k, Rng& rng);

/// The value held by more than half of the `k` voters, if any.
std::optional<ResultValue> majority(std::span<const ResultValue> values, int k);
std::optional<ResultValue> majority(std::span<const Vote> votes, int k);

}  // namespace serene
