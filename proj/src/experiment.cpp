#include "serene/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace serene {

std::string cell_label(const ScenarioConfig& cfg) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "c%.2f_pc%.2f_L%d_e%d", cfg.colluding_fraction, cfg.p_collude,
                  cfg.effective_cvt_len(), cfg.obs_per_edge);
    return buf;
}

std::vector<BatchJob> expand(const SweepPlan& plan) {
    std::vector<int> lens;
    for (double f : plan.l_fractions) lens.push_back(std::max(1, static_cast<int>(std::floor(f * plan.base.n_workers + 0.5))));
    if (lens.empty()) lens.push_back(plan.base.cvt_len);
    std::vector<int> es = plan.e_values;
    if (es.empty()) es.push_back(plan.base.obs_per_edge);

    std::vector<double> fractions;
    if (plan.control) fractions.push_back(0.0);
    for (double c : plan.colluding)
        if (c > 0.0) fractions.push_back(c);

    std::vector<BatchJob> jobs;
    for (auto scheme : plan.schemes)
        for (double c : fractions)
            for (double pc : plan.p_collude)
                for (int len : lens)
                    for (int e : es)
                        for (int rep = 0; rep < plan.repetitions; ++rep) {
                            ScenarioConfig cfg = plan.base;
                            cfg.colluding_fraction = c;
                            cfg.p_collude = pc;
                            cfg.cvt_len = len;
                            cfg.obs_per_edge = e;
                            cfg.rng_seed = plan.base_seed + static_cast<std::uint64_t>(rep);
                            cfg.validate();
                            jobs.push_back({cfg, scheme, cell_label(cfg)});
                        }
    return jobs;
}

std::vector<MetricRow> run_plan(const SweepPlan& plan, unsigned threads) {
    const auto results = run_batch(expand(plan), threads);
    std::vector<MetricRow> rows;
    rows.reserve(results.size());
    for (const auto& r : results) rows.push_back(make_row(r.trace, r.job.cell));
    return rows;
}

namespace {

const char* const kColumns[] = {"scheme",          "cell",           "colluding_fraction", "p_collude",
                                "seed",            "n_workers",      "cvt_len",            "obs_per_edge",
                                "activation_time", "ground_truth_collusion", "detected",   "false_positive",
                                "detection_delay_s", "detection_epochs", "mitigation_triggered", "mitigation_complete",
                                "mitigation_f1",   "mitigation_latency_s", "predicted_honest", "predicted_colluding",
                                "predicted_malicious", "verification", "method",           "end_time",
                                "wall_s"};
constexpr std::size_t kColumnCount = std::size(kColumns);

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// Infinity and absence both print as an empty cell; `detected` tells them apart.
std::string opt(const std::optional<double>& v) {
    if (!v || std::isinf(*v)) return {};
    return num(*v);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_runs_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    out << "# serene-runs schema " << kRunsSchemaVersion << '\n';
    for (std::size_t i = 0; i < kColumnCount; ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& r : rows) {
        // Delays are INF (empty) only for collusion runs that were missed.
        const std::string delay = r.detection_delay ? opt(r.detection_delay) : std::string{};
        out << r.scheme << ',' << r.cell << ',' << num(r.colluding_fraction) << ',' << num(r.p_collude) << ','
            << r.seed << ',' << r.n_workers << ',' << r.cvt_len << ',' << r.obs_per_edge << ','
            << num(r.activation_time) << ',' << int(r.ground_truth_collusion) << ',' << int(r.detected) << ','
            << int(r.false_positive) << ',' << delay << ',' << r.detection_epochs << ','
            << int(r.mitigation_triggered) << ',' << int(r.mitigation_complete) << ',' << opt(r.mitigation_f1) << ','
            << opt(r.mitigation_latency) << ',' << r.predicted_honest << ',' << r.predicted_colluding << ','
            << r.predicted_malicious << ',' << r.verification << ',' << r.method << ',' << num(r.end_time) << ','
            << num(r.wall_seconds) << '\n';
    }
}

std::vector<MetricRow> read_runs_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("runs.csv: empty file");
    const std::string tag = "# serene-runs schema ";
    if (line.rfind(tag, 0) != 0) throw std::runtime_error("runs.csv: missing schema header");
    if (std::stoi(line.substr(tag.size())) != kRunsSchemaVersion)
        throw std::runtime_error("runs.csv: unsupported schema version");
    if (!std::getline(in, line) || split(line).size() != kColumnCount)
        throw std::runtime_error("runs.csv: bad column header");

    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != kColumnCount) throw std::runtime_error("runs.csv: wrong field count at row " + std::to_string(rows.size() + 1));
        auto d = [](const std::string& s) { return std::stod(s); };
        auto od = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::stod(s);
        };
        MetricRow r;
        r.scheme = f[0];
        r.cell = f[1];
        r.colluding_fraction = d(f[2]);
        r.p_collude = d(f[3]);
        r.seed = std::stoull(f[4]);
        r.n_workers = std::stoi(f[5]);
        r.cvt_len = std::stoi(f[6]);
        r.obs_per_edge = std::stoi(f[7]);
        r.activation_time = d(f[8]);
        r.ground_truth_collusion = f[9] == "1";
        r.detected = f[10] == "1";
        r.false_positive = f[11] == "1";
        r.detection_delay = od(f[12]);
        if (!r.detection_delay && r.ground_truth_collusion && !r.detected && !r.false_positive) r.detection_delay = kInf;
        r.detection_epochs = std::stoull(f[13]);
        r.mitigation_triggered = f[14] == "1";
        r.mitigation_complete = f[15] == "1";
        r.mitigation_f1 = od(f[16]);
        r.mitigation_latency = od(f[17]);
        if (!r.mitigation_latency && r.ground_truth_collusion) r.mitigation_latency = kInf;
        r.predicted_honest = std::stoi(f[18]);
        r.predicted_colluding = std::stoi(f[19]);
        r.predicted_malicious = std::stoi(f[20]);
        r.verification = f[21];
        r.method = f[22];
        r.end_time = d(f[23]);
        r.wall_seconds = d(f[24]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<CellSummary> summarize(const std::vector<MetricRow>& rows) {
    using Key = std::tuple<std::string, std::string>;
    std::map<Key, std::vector<const MetricRow*>> cells;
    for (const auto& r : rows) cells[{r.scheme, r.cell}].push_back(&r);

    auto control_of = [&](const MetricRow& r) {
        std::vector<MetricRow> out;
        for (const auto& c : rows)
            if (c.scheme == r.scheme && !c.ground_truth_collusion && c.p_collude == r.p_collude &&
                c.cvt_len == r.cvt_len && c.obs_per_edge == r.obs_per_edge)
                out.push_back(c);
        return out;
    };

    std::vector<CellSummary> out;
    for (const auto& [key, members] : cells) {
        const auto& first = *members.front();
        CellSummary s;
        s.scheme = first.scheme;
        s.cell = first.cell;
        s.colluding_fraction = first.colluding_fraction;
        s.p_collude = first.p_collude;
        s.cvt_len = first.cvt_len;
        s.obs_per_edge = first.obs_per_edge;
        s.runs = members.size();

        std::vector<MetricRow> pooled;
        std::vector<double> delays, f1s, latencies;
        std::size_t detected = 0;
        for (const auto* r : members) {
            pooled.push_back(*r);
            if (r->detected) ++detected;
            if (r->detection_delay) delays.push_back(*r->detection_delay);
            if (r->mitigation_triggered) {
                f1s.push_back(r->mitigation_f1.value_or(0.0));
                if (r->mitigation_latency) latencies.push_back(*r->mitigation_latency);
            }
        }
        if (first.ground_truth_collusion) {
            const auto ctrl = control_of(first);
            pooled.insert(pooled.end(), ctrl.begin(), ctrl.end());
        }
        s.detection = detection_confusion(pooled);
        s.detection_f1 = f1_score(s.detection);
        s.detection_success = static_cast<double>(detected) / static_cast<double>(s.runs);
        s.median_delay = median(delays);
        for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
            char name[8];
            std::snprintf(name, sizeof name, "p%02d", static_cast<int>(q * 100 + 0.5));
            s.delay_quantiles[name] = quantile(delays, q);
        }
        s.mitigation_runs = f1s.size();
        if (!f1s.empty()) {
            double sum = 0.0;
            for (double v : f1s) sum += v;
            s.mitigation_f1 = sum / static_cast<double>(f1s.size());
        }
        s.median_mitigation_latency = median(latencies);
        out.push_back(std::move(s));
    }
    return out;
}

void write_summary_json(std::ostream& out, const std::vector<CellSummary>& cells, std::size_t total_runs) {
    using nlohmann::json;
    // INF and absent values serialize as null.
    auto j_opt = [](const std::optional<double>& v) -> json {
        if (!v || std::isinf(*v)) return nullptr;
        return *v;
    };
    json doc;
    doc["schema_version"] = kSummarySchemaVersion;
    doc["runs"] = total_runs;
    doc["cells"] = json::array();
    for (const auto& c : cells) {
        json jc;
        jc["scheme"] = c.scheme;
        jc["cell"] = c.cell;
        jc["colluding_fraction"] = c.colluding_fraction;
        jc["p_collude"] = c.p_collude;
        jc["cvt_len"] = c.cvt_len;
        jc["obs_per_edge"] = c.obs_per_edge;
        jc["runs"] = c.runs;
        jc["detection"] = {{"tp", c.detection.tp}, {"fp", c.detection.fp}, {"fn", c.detection.fn}, {"tn", c.detection.tn}};
        jc["detection_f1"] = j_opt(c.detection_f1);
        jc["detection_success"] = c.detection_success;
        jc["median_delay_s"] = j_opt(c.median_delay);
        jc["median_delay_inf"] = c.median_delay && std::isinf(*c.median_delay);
        json q;
        for (const auto& [name, v] : c.delay_quantiles) q[name] = j_opt(v);
        jc["delay_quantiles_s"] = q;
        jc["mitigation_runs"] = c.mitigation_runs;
        jc["mitigation_f1"] = j_opt(c.mitigation_f1);
        jc["median_mitigation_latency_s"] = j_opt(c.median_mitigation_latency);
        doc["cells"].push_back(std::move(jc));
    }
    out << doc.dump(2) << '\n';
}

}  // namespace serene
