#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "serene/mitigation.hpp"
#include "serene/roster.hpp"
#include "serene/simulator.hpp"

namespace serene {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One simulated run, flattened for CSV and aggregation.
struct MetricRow {
    std::string scheme;
    std::string cell;
    double colluding_fraction = 0.0;
    double p_collude = 0.0;
    std::uint64_t seed = 0;
    int n_workers = 0;
    int cvt_len = 0;
    int obs_per_edge = 0;
    double activation_time = 0.0;
    bool ground_truth_collusion = false;
    bool detected = false;        // collusion declared at or after activation
    bool false_positive = false;  // declared with no active collusion
    std::optional<double> detection_delay;  // kInf when collusion went unflagged
    std::uint64_t detection_epochs = 0;
    bool mitigation_triggered = false;
    bool mitigation_complete = false;
    std::optional<double> mitigation_f1;
    std::optional<double> mitigation_latency;  // kInf when never finalized
    int predicted_honest = 0;
    int predicted_colluding = 0;
    int predicted_malicious = 0;
    std::string verification;  // "I", "II" or empty
    std::string method;
    double end_time = 0.0;
    double wall_seconds = 0.0;
};

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
};

/// 2TP / (2TP + FP + FN); absent when there is nothing to score.
std::optional<double> f1_score(const Confusion& c);

enum class DetectionOutcome { TruePositive, FalsePositive, FalseNegative, TrueNegative };

/// Per-run outcome of the first collusion declaration. A declaration
/// before activation, or in a run without colluders, is a false positive.
DetectionOutcome detection_outcome(const RunTrace& trace);

/// First detection time minus activation time. kInf when collusion existed
/// but was never flagged; absent for control runs and false positives.
std::optional<double> detection_delay(const RunTrace& trace);

Confusion detection_confusion(std::span<const MetricRow> rows);
std::optional<double> detection_f1(std::span<const MetricRow> rows);

/// Per-worker f1 with Colluding as the positive class. Workers the report
/// put in M and ground-truth naive workers are excluded from both sides.
double mitigation_f1(const MitigationReport& report, const Roster& truth);

/// Finalize time minus activation time; kInf when mitigation never finished.
std::optional<double> mitigation_latency(const RunTrace& trace);

MetricRow make_row(const RunTrace& trace, std::string cell = {});

/// Linear-interpolated quantile over values that may contain kInf.
std::optional<double> quantile(std::vector<double> values, double q);
std::optional<double> median(std::vector<double> values);

}  // namespace serene
