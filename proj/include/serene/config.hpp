#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace serene {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every knob of a simulated scenario. Times are simulated seconds unless
/// the field name says otherwise.
struct ScenarioConfig {
    int n_workers = 20;
    int pool_size = 3;
    double colluding_fraction = 0.5;
    double naive_fraction = 0.0;
    double p_collude = 0.5;
    double epsilon = 0.003;
    /// CVT length L. 0 selects round(0.25 * n_workers).
    int cvt_len = 0;
    double detect_period = 0.1;
    /// e: reputation-scoring / Case II budget, and SnE observations per edge.
    int obs_per_edge = 12;
    int pair_pool_target = 8;
    double task_rate = 1000.0;
    double rtt_min_ms = 20.0;
    double rtt_max_ms = 25.0;
    double sim_end = 100.0;
    double collusion_start_min = 3.0;
    double collusion_start_max = 90.0;
    std::uint64_t rng_seed = 1;

    // Behavioural switches.
    bool joint_collusion_draw = true;
    bool ring_shared_memory = false;
    bool halt_on_finalize = true;
    bool record_dispatch_log = false;

    // Mitigation tunables.
    double eigentrust_tau = 0.1;
    double honest_score_floor = 0.95;

    int effective_cvt_len() const;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;

    /// Sets one field from its textual key/value. Throws ConfigError on an
    /// unknown key or unparsable value.
    void set(const std::string& key, const std::string& value);

    std::map<std::string, std::string> to_map() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses the flat `key = value` format. Blank lines and `#` comments are
/// ignored. Keys not mentioned keep their defaults.
ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);
void write_config(std::ostream& out, const ScenarioConfig& cfg);

}  // namespace serene
