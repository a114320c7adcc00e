#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

namespace serene {

/// Index of a worker in [0, N). Stable for the whole run.
struct WorkerId {
    std::uint32_t value = 0;

    constexpr WorkerId() = default;
    constexpr explicit WorkerId(std::uint32_t v) : value(v) {}
    constexpr explicit WorkerId(int v) : value(static_cast<std::uint32_t>(v)) {}
    constexpr explicit WorkerId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}

    constexpr std::size_t index() const { return value; }
    friend constexpr auto operator<=>(WorkerId, WorkerId) = default;
};

enum class TaskOrigin : std::uint8_t { Genuine, CvtProbe, MitigationProbe };

/// A task identity. Equality is by sequence number only; the origin is
/// metadata fixed at creation.
struct TaskId {
    std::uint64_t seq = 0;
    TaskOrigin origin = TaskOrigin::Genuine;

    friend constexpr bool operator==(TaskId a, TaskId b) { return a.seq == b.seq; }
    friend constexpr auto operator<=>(TaskId a, TaskId b) { return a.seq <=> b.seq; }
};

/// Opaque result token. Verifier logic only ever compares for equality.
struct ResultValue {
    std::uint64_t bits = 0;
    friend constexpr auto operator<=>(ResultValue, ResultValue) = default;
};

struct Vote {
    TaskId task;
    WorkerId worker;
    ResultValue value;
    double arrival_time = 0.0;
};

enum class WorkerClass : std::uint8_t { Honest, NaiveMalicious, Colluding };

std::string_view to_string(WorkerClass c);
std::string_view to_string(TaskOrigin o);

using WorkerSet = std::vector<WorkerId>;

/// Builds {0, 1, ..., n-1}.
WorkerSet all_workers(std::size_t n);

}  // namespace serene

template <>
struct std::hash<serene::WorkerId> {
    std::size_t operator()(serene::WorkerId w) const noexcept { return std::hash<std::uint32_t>{}(w.value); }
};

template <>
struct std::hash<serene::TaskId> {
    std::size_t operator()(serene::TaskId t) const noexcept { return std::hash<std::uint64_t>{}(t.seq); }
};

template <>
struct std::hash<serene::ResultValue> {
    std::size_t operator()(serene::ResultValue v) const noexcept { return std::hash<std::uint64_t>{}(v.bits); }
};
