#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "serene/config.hpp"
#include "serene/metrics.hpp"
#include "serene/simulator.hpp"

namespace serene {

inline constexpr int kRunsSchemaVersion = 1;
inline constexpr int kSummarySchemaVersion = 1;

/// Cartesian sweep: schemes x colluding fractions x P_c x L x e, each cell
/// repeated with seeds base_seed + rep.
struct SweepPlan {
    ScenarioConfig base;
    std::vector<Scheme> schemes{Scheme::Serene};
    std::vector<double> colluding{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> p_collude{0.1, 0.5, 0.9};
    /// CVT lengths as fractions of N; empty keeps base.cvt_len.
    std::vector<double> l_fractions;
    /// Scoring / Case II budgets; empty keeps base.obs_per_edge.
    std::vector<int> e_values;
    /// Adds one |C| = 0 cell per (scheme, P_c, L, e).
    bool control = true;
    int repetitions = 30;
    std::uint64_t base_seed = 1;
};

std::string cell_label(const ScenarioConfig& cfg);

std::vector<BatchJob> expand(const SweepPlan& plan);

std::vector<MetricRow> run_plan(const SweepPlan& plan, unsigned threads = 0);

void write_runs_csv(std::ostream& out, const std::vector<MetricRow>& rows);
/// Throws std::runtime_error on a malformed file or schema mismatch.
std::vector<MetricRow> read_runs_csv(std::istream& in);

struct CellSummary {
    std::string scheme;
    std::string cell;
    double colluding_fraction = 0.0;
    double p_collude = 0.0;
    int cvt_len = 0;
    int obs_per_edge = 0;
    std::size_t runs = 0;
    Confusion detection;           // this cell pooled with its control cell
    std::optional<double> detection_f1;
    double detection_success = 0.0;  // fraction of runs detected after activation
    std::optional<double> median_delay;
    std::map<std::string, std::optional<double>> delay_quantiles;
    std::size_t mitigation_runs = 0;
    std::optional<double> mitigation_f1;
    std::optional<double> median_mitigation_latency;
};

std::vector<CellSummary> summarize(const std::vector<MetricRow>& rows);

/// Writes summary.json (schema-versioned).
void write_summary_json(std::ostream& out, const std::vector<CellSummary>& cells, std::size_t total_runs);

}  // namespace serene
