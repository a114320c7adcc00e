#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "serene/config.hpp"
#include "serene/experiment.hpp"
#include "serene/metrics.hpp"
#include "serene/simulator.hpp"
#include "serene/trace_io.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flags shared by `simulate` and `sweep`; each maps onto a config key.
struct ScenarioFlags {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<int> n, k, cvt_len, e;
    std::optional<double> pc, colluding, naive, sim_end;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "key = value scenario file");
        app->add_option("--set", sets, "override any config key (key=value)");
        app->add_option("--n", n, "number of workers");
        app->add_option("--k", k, "pool size");
        app->add_option("--pc", pc, "collusion probability");
        app->add_option("--colluding", colluding, "colluding fraction");
        app->add_option("--naive", naive, "naive-malicious fraction");
        app->add_option("--L", cvt_len, "CVT length");
        app->add_option("--e", e, "verification budget / observations per edge");
        app->add_option("--sim-end", sim_end, "simulated seconds");
        app->add_option("--seed", seed, "RNG seed");
    }

    serene::ScenarioConfig build() const {
        serene::ScenarioConfig cfg;
        if (!config_path.empty()) {
            if (!std::filesystem::exists(config_path)) throw IoError("config file not found: " + config_path);
            cfg = serene::load_config(config_path);
        }
        if (n) cfg.n_workers = *n;
        if (k) cfg.pool_size = *k;
        if (pc) cfg.p_collude = *pc;
        if (colluding) cfg.colluding_fraction = *colluding;
        if (naive) cfg.naive_fraction = *naive;
        if (cvt_len) cfg.cvt_len = *cvt_len;
        if (e) cfg.obs_per_edge = *e;
        if (sim_end) cfg.sim_end = *sim_end;
        if (seed) cfg.rng_seed = *seed;
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw serene::ConfigError("--set expects key=value: " + kv);
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        cfg.validate();
        return cfg;
    }
};

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void print_run_summary(const serene::RunTrace& trace) {
    const auto row = serene::make_row(trace);
    std::cerr << "scheme=" << row.scheme << " seed=" << row.seed << " activation=" << row.activation_time
              << " detected=" << row.detected << " false_positive=" << row.false_positive;
    if (row.detection_delay) std::cerr << " delay=" << *row.detection_delay;
    if (row.mitigation_f1) std::cerr << " mitigation_f1=" << *row.mitigation_f1;
    if (row.mitigation_latency) std::cerr << " latency=" << *row.mitigation_latency;
    std::cerr << " wall=" << trace.stats.wall_seconds << "s\n";
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collusion detection and mitigation simulator"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one scenario and print its trace");
    ScenarioFlags sim_flags;
    sim_flags.attach(sim);
    std::string sim_scheme = "serene", sim_out;
    bool sim_graph = false, sim_log = false;
    sim->add_option("--scheme,--variant", sim_scheme, "serene | serene-prt | serene-prt-g1 | sne8 | sne12");
    sim->add_option("--out", sim_out, "trace file (default stdout)");
    sim->add_flag("--graph", sim_graph, "include the similarity-graph edge dump");
    sim->add_flag("--dispatch-log", sim_log, "record every dispatch in the trace");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a grid of scenarios");
    ScenarioFlags sweep_flags;
    sweep_flags.attach(sweep);
    std::string out_dir, colluding_grid, pc_grid, l_sweep, e_sweep;
    std::vector<std::string> schemes;
    int reps = 30;
    std::uint64_t base_seed = 1;
    unsigned threads = 0;
    bool no_control = false;
    sweep->add_option("--out-dir", out_dir, "output directory")->required();
    sweep->add_option("--scheme,--variant", schemes, "schemes to run (repeatable)");
    sweep->add_option("--colluding-grid", colluding_grid, "comma-separated colluding fractions");
    sweep->add_option("--pc-grid", pc_grid, "comma-separated P_c values");
    sweep->add_option("--l-sweep", l_sweep, "comma-separated CVT lengths as fractions of N");
    sweep->add_option("--e-sweep", e_sweep, "comma-separated verification budgets");
    sweep->add_option("--reps", reps, "repetitions per cell");
    sweep->add_option("--base-seed", base_seed, "seed of repetition 0");
    sweep->add_option("--threads", threads, "worker threads (0 = all cores)");
    sweep->add_flag("--no-control", no_control, "skip the |C| = 0 control cells");

    // report
    auto* report = app.add_subcommand("report", "aggregate existing runs.csv files");
    std::vector<std::string> report_in;
    std::string report_out;
    report->add_option("--in", report_in, "runs.csv files")->required();
    report->add_option("--out", report_out, "summary.json path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*sim) {
            auto cfg = sim_flags.build();
            cfg.record_dispatch_log = cfg.record_dispatch_log || sim_log;
            const auto trace = serene::run(cfg, serene::parse_scheme(sim_scheme));
            if (sim_out.empty()) {
                serene::write_trace_jsonl(std::cout, trace, sim_graph);
            } else {
                auto out = open_out(sim_out);
                serene::write_trace_jsonl(out, trace, sim_graph);
            }
            print_run_summary(trace);
            return 0;
        }

        if (*sweep) {
            serene::SweepPlan plan;
            plan.base = sweep_flags.build();
            if (!schemes.empty()) {
                plan.schemes.clear();
                for (const auto& s : schemes) plan.schemes.push_back(serene::parse_scheme(s));
            }
            if (!colluding_grid.empty()) plan.colluding = parse_list(colluding_grid);
            if (!pc_grid.empty()) plan.p_collude = parse_list(pc_grid);
            if (!l_sweep.empty()) plan.l_fractions = parse_list(l_sweep);
            if (!e_sweep.empty())
                for (double e : parse_list(e_sweep)) plan.e_values.push_back(static_cast<int>(e));
            plan.repetitions = reps;
            plan.base_seed = base_seed;
            plan.control = !no_control;

            std::error_code ec;
            std::filesystem::create_directories(out_dir, ec);
            if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
            auto runs_out = open_out(std::filesystem::path(out_dir) / "runs.csv");
            auto summary_out = open_out(std::filesystem::path(out_dir) / "summary.json");

            const auto rows = serene::run_plan(plan, threads);
            serene::write_runs_csv(runs_out, rows);
            serene::write_summary_json(summary_out, serene::summarize(rows), rows.size());
            if (!runs_out || !summary_out) throw IoError("write failed in " + out_dir);
            std::cerr << rows.size() << " runs written to " << out_dir << '\n';
            return 0;
        }

        if (*report) {
            std::vector<serene::MetricRow> rows;
            for (const auto& path : report_in) {
                std::ifstream in(path);
                if (!in) throw IoError("cannot read " + path);
                auto part = serene::read_runs_csv(in);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            const auto cells = serene::summarize(rows);
            if (report_out.empty()) {
                serene::write_summary_json(std::cout, cells, rows.size());
            } else {
                auto out = open_out(report_out);
                serene::write_summary_json(out, cells, rows.size());
            }
            return 0;
        }
    } catch (const serene::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: bad number: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
