#include "serene/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>
#include <vector>

namespace serene {

namespace {

using FieldRef = std::variant<int ScenarioConfig::*, double ScenarioConfig::*, std::uint64_t ScenarioConfig::*,
                              bool ScenarioConfig::*>;

const std::vector<std::pair<std::string, FieldRef>>& fields() {
    static const std::vector<std::pair<std::string, FieldRef>> table = {
        {"n_workers", &ScenarioConfig::n_workers},
        {"pool_size", &ScenarioConfig::pool_size},
        {"colluding_fraction", &ScenarioConfig::colluding_fraction},
        {"naive_fraction", &ScenarioConfig::naive_fraction},
        {"p_collude", &ScenarioConfig::p_collude},
        {"epsilon", &ScenarioConfig::epsilon},
        {"cvt_len", &ScenarioConfig::cvt_len},
        {"detect_period", &ScenarioConfig::detect_period},
        {"obs_per_edge", &ScenarioConfig::obs_per_edge},
        {"pair_pool_target", &ScenarioConfig::pair_pool_target},
        {"task_rate", &ScenarioConfig::task_rate},
        {"rtt_min_ms", &ScenarioConfig::rtt_min_ms},
        {"rtt_max_ms", &ScenarioConfig::rtt_max_ms},
        {"sim_end", &ScenarioConfig::sim_end},
        {"collusion_start_min", &ScenarioConfig::collusion_start_min},
        {"collusion_start_max", &ScenarioConfig::collusion_start_max},
        {"rng_seed", &ScenarioConfig::rng_seed},
        {"joint_collusion_draw", &ScenarioConfig::joint_collusion_draw},
        {"ring_shared_memory", &ScenarioConfig::ring_shared_memory},
        {"halt_on_finalize", &ScenarioConfig::halt_on_finalize},
        {"record_dispatch_log", &ScenarioConfig::record_dispatch_log},
        {"eigentrust_tau", &ScenarioConfig::eigentrust_tau},
        {"honest_score_floor", &ScenarioConfig::honest_score_floor},
    };
    return table;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T out{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) throw ConfigError("bad value for '" + key + "': '" + text + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("bad boolean for '" + key + "': '" + text + "'");
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

int ScenarioConfig::effective_cvt_len() const {
    if (cvt_len > 0) return cvt_len;
    return std::max(1, static_cast<int>(std::floor(0.25 * n_workers + 0.5)));
}

void ScenarioConfig::validate() const {
    if (pool_size < 3 || pool_size % 2 == 0) throw ConfigError("pool_size must be odd and >= 3");
    if (n_workers < pool_size) throw ConfigError("n_workers must be >= pool_size");
    if (colluding_fraction < 0.0 || naive_fraction < 0.0) throw ConfigError("class fractions must be non-negative");
    if (colluding_fraction + naive_fraction > 1.0 + 1e-12)
        throw ConfigError("colluding_fraction + naive_fraction must be <= 1");
    const int colluding = static_cast<int>(std::floor(n_workers * colluding_fraction + 0.5));
    const int naive = static_cast<int>(std::floor(n_workers * naive_fraction + 0.5));
    if (n_workers - colluding - naive < 2) throw ConfigError("scenario needs at least two honest workers");
    if (p_collude < 0.0 || p_collude > 1.0) throw ConfigError("p_collude must be a probability");
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must be a probability");
    if (cvt_len < 0) throw ConfigError("cvt_len must be >= 1 (or 0 for the default)");
    if (detect_period <= 0.0) throw ConfigError("detect_period must be positive");
    if (obs_per_edge < 1) throw ConfigError("obs_per_edge must be >= 1");
    if (pair_pool_target < 0) throw ConfigError("pair_pool_target must be >= 0");
    if (task_rate <= 0.0) throw ConfigError("task_rate must be positive");
    if (rtt_min_ms < 0.0 || rtt_min_ms > rtt_max_ms) throw ConfigError("need 0 <= rtt_min_ms <= rtt_max_ms");
    if (sim_end <= 0.0) throw ConfigError("sim_end must be positive");
    if (collusion_start_min > collusion_start_max) throw ConfigError("collusion start window is inverted");
    if (eigentrust_tau < 0.0) throw ConfigError("eigentrust_tau must be >= 0");
}

void ScenarioConfig::set(const std::string& key, const std::string& value) {
    for (const auto& [name, ref] : fields()) {
        if (name != key) continue;
        std::visit(
            [&](auto member) {
                using T = std::remove_reference_t<decltype(this->*member)>;
                if constexpr (std::is_same_v<T, bool>) {
                    this->*member = parse_bool(key, value);
                } else {
                    this->*member = parse_number<T>(key, value);
                }
            },
            ref);
        return;
    }
    throw ConfigError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> ScenarioConfig::to_map() const {
    std::map<std::string, std::string> out;
    for (const auto& [name, ref] : fields()) {
        std::visit(
            [&](auto member) {
                using T = std::remove_cvref_t<decltype(this->*member)>;
                if constexpr (std::is_same_v<T, bool>) {
                    out[name] = (this->*member) ? "true" : "false";
                } else if constexpr (std::is_same_v<T, double>) {
                    out[name] = format_double(this->*member);
                } else {
                    out[name] = std::to_string(this->*member);
                }
            },
            ref);
    }
    return out;
}

ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

void write_config(std::ostream& out, const ScenarioConfig& cfg) {
    const auto values = cfg.to_map();
    for (const auto& field : fields()) out << field.first << " = " << values.at(field.first) << '\n';
}

}  // namespace serene
