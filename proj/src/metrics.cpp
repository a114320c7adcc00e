#include "serene/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace serene {

std::optional<double> f1_score(const Confusion& c) {
    const auto denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return std::nullopt;
    return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

DetectionOutcome detection_outcome(const RunTrace& trace) {
    const bool collusion = trace.has_collusion();
    if (trace.detections.empty()) return collusion ? DetectionOutcome::FalseNegative : DetectionOutcome::TrueNegative;
    const auto& first = trace.detections.front();
    if (!collusion || first.time < trace.activation_time) return DetectionOutcome::FalsePositive;
    return DetectionOutcome::TruePositive;
}

std::optional<double> detection_delay(const RunTrace& trace) {
    switch (detection_outcome(trace)) {
        case DetectionOutcome::TruePositive: return trace.detections.front().time - trace.activation_time;
        case DetectionOutcome::FalseNegative: return kInf;
        default: return std::nullopt;
    }
}

Confusion detection_confusion(std::span<const MetricRow> rows) {
    Confusion c;
    for (const auto& r : rows) {
        if (r.false_positive) {
            ++c.fp;
            // A premature declaration also means the real collusion was missed.
            if (r.ground_truth_collusion) ++c.fn;
        } else if (r.detected) {
            ++c.tp;
        } else if (r.ground_truth_collusion) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

std::optional<double> detection_f1(std::span<const MetricRow> rows) { return f1_score(detection_confusion(rows)); }

double mitigation_f1(const MitigationReport& report, const Roster& truth) {
    std::vector<int> predicted(truth.size(), 0);  // 0 unlabeled, 1 honest, 2 colluding, 3 excluded
    for (auto w : report.honest) predicted[w.index()] = 1;
    for (auto w : report.colluding) predicted[w.index()] = 2;
    for (auto w : report.malicious) predicted[w.index()] = 3;

    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] == 3 || truth[i] == WorkerClass::NaiveMalicious) continue;
        const bool actual = truth[i] == WorkerClass::Colluding;
        const bool flagged = predicted[i] == 2;
        if (actual && flagged) ++c.tp;
        if (!actual && flagged) ++c.fp;
        if (actual && !flagged) ++c.fn;
    }
    return f1_score(c).value_or(1.0);
}

std::optional<double> mitigation_latency(const RunTrace& trace) {
    if (!trace.has_collusion()) return std::nullopt;
    if (!trace.mitigation || !trace.mitigation->complete) return kInf;
    return trace.mitigation->end_time - trace.activation_time;
}

MetricRow make_row(const RunTrace& trace, std::string cell) {
    MetricRow r;
    r.scheme = std::string(to_string(trace.scheme));
    r.cell = std::move(cell);
    r.colluding_fraction = trace.config.colluding_fraction;
    r.p_collude = trace.config.p_collude;
    r.seed = trace.config.rng_seed;
    r.n_workers = trace.config.n_workers;
    r.cvt_len = trace.config.effective_cvt_len();
    r.obs_per_edge = trace.config.obs_per_edge;
    r.activation_time = trace.activation_time;
    r.ground_truth_collusion = trace.has_collusion();

    const auto outcome = detection_outcome(trace);
    r.detected = outcome == DetectionOutcome::TruePositive;
    r.false_positive = outcome == DetectionOutcome::FalsePositive;
    r.detection_delay = detection_delay(trace);
    if (!trace.detections.empty()) r.detection_epochs = trace.detections.front().epochs;

    if (trace.mitigation && r.ground_truth_collusion) {
        const auto& m = *trace.mitigation;
        r.mitigation_triggered = true;
        r.mitigation_complete = m.complete;
        r.mitigation_f1 = m.complete ? mitigation_f1(m, trace.roster) : 0.0;
        r.predicted_honest = static_cast<int>(m.honest.size());
        r.predicted_colluding = static_cast<int>(m.colluding.size());
        r.predicted_malicious = static_cast<int>(m.malicious.size());
        if (m.verification) r.verification = *m.verification == VerificationCase::I ? "I" : "II";
        r.method = std::string(to_string(m.method));
    }
    r.mitigation_latency = mitigation_latency(trace);
    r.end_time = trace.stats.end_time;
    r.wall_seconds = trace.stats.wall_seconds;
    return r;
}

std::optional<double> quantile(std::vector<double> values, double q) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo == hi || frac == 0.0) return values[lo];
    if (std::isinf(values[hi])) return values[hi];
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::optional<double> median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace serene
