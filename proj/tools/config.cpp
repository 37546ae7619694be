#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace v2xsec::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownFields = {
    "name", "beta", "alpha", "alpha_over_beta", "N", "E", "E0", "E_prime", "n_inv", "Q",
    "t1_s", "t2_s", "T_s", "tx_step_s", "t_attack_s", "t_min_hold_s", "t_use_s",
    "gamma", "gamma_prime", "r1_m", "r2_m", "R_m", "c1", "c2", "d1", "d2", "p_x", "omega_x",
    "S_N_TH", "M_O_TH", "U_prime_N", "O_b", "seed", "event_cap", "count_reauth_passes",
    "shape", "alpha_prime", "U_k", "D", "factors",
};

const std::set<std::string> kIntegerFields = {"N", "E", "E0", "E_prime", "n_inv", "Q", "U_prime_N",
                                              "seed", "event_cap"};

[[noreturn]] void field_error(const std::string& field, const std::string& problem) {
    throw ConfigError("field '" + field + "': " + problem);
}

double number(const json& j, const std::string& field) {
    if (!j.contains(field)) {
        field_error(field, "missing");
    }
    const json& v = j.at(field);
    if (!v.is_number()) {
        field_error(field, "expected a number, got " + std::string(v.type_name()));
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        field_error(field, "must be finite");
    }
    return d;
}

std::optional<double> optional_number(const json& j, const std::string& field) {
    if (!j.contains(field) || j.at(field).is_null()) {
        return std::nullopt;
    }
    return number(j, field);
}

long long integer(const json& j, const std::string& field) {
    const double d = number(j, field);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) {
        field_error(field, "expected an integer");
    }
    return static_cast<long long>(d);
}

int small_integer(const json& j, const std::string& field) {
    const long long v = integer(j, field);
    if (v < 0 || v > 1'000'000'000) {
        field_error(field, "out of range");
    }
    return static_cast<int>(v);
}

std::vector<double> probabilities(const json& j, const std::string& field) {
    const json& v = j.at(field);
    if (!v.is_array() || v.empty()) {
        field_error(field, "expected a nonempty array of probabilities");
    }
    std::vector<double> out;
    for (const json& item : v) {
        if (!item.is_number()) {
            field_error(field, "array entries must be numbers");
        }
        const double p = item.get<double>();
        if (!(p > 0.0 && p < 1.0)) {
            field_error(field, "entries must lie strictly in (0, 1)");
        }
        out.push_back(p);
    }
    return out;
}

decision::FactorInputs factor_inputs(const json& j) {
    decision::FactorInputs f;
    f.speed = 13.9;
    f.location = 0.5;
    f.zone_traversals = 1.0;
    f.associativity = 0.5;
    if (!j.contains("factors")) {
        return f;
    }
    const json& obj = j.at("factors");
    if (!obj.is_object()) {
        field_error("factors", "expected an object");
    }
    auto read = [&](const char* key, double& target) {
        if (obj.contains(key)) {
            target = number(obj, key);
        }
    };
    read("speed", f.speed);
    read("location", f.location);
    read("last_update", f.last_update);
    read("shared_sessions", f.shared_sessions);
    read("refresh_rate", f.refresh_rate);
    read("total_keys", f.total_keys);
    read("zone_traversals", f.zone_traversals);
    read("associativity", f.associativity);
    auto triple = [&](const char* key, std::array<double, 3>& target) {
        if (!obj.contains(key)) {
            return;
        }
        const json& arr = obj.at(key);
        if (!arr.is_array() || arr.size() != 3) {
            field_error(std::string("factors.") + key, "expected an array of three numbers");
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (!arr[i].is_number()) {
                field_error(std::string("factors.") + key, "expected numbers");
            }
            target[i] = arr[i].get<double>();
        }
    };
    triple("deltas", f.deltas);
    triple("thetas", f.thetas);
    if (obj.contains("w")) {
        f.components = small_integer(obj, "w");
    }
    return f;
}

}  // namespace

double Config::fixed_update_rate() const {
    return alpha_prime.value_or(scenario.rates.key_update_rate / scenario.window.t2);
}

json default_config_json() {
    return json{
        {"name", "table2-A1"},
        {"beta", 2.0},
        {"alpha_over_beta", 0.5},
        {"N", 10},
        {"E", 10},
        {"n_inv", 5},
        {"Q", 1},
        {"t1_s", 5.0},
        {"t2_s", 105.0},
        {"T_s", 110.0},
        {"tx_step_s", 5.0},
        {"t_attack_s", 60.0},
        {"t_min_hold_s", 30.0},
        {"t_use_s", 20.0},
        {"gamma", 1.0},
        {"gamma_prime", 0.1},
        {"r1_m", 100.0},
        {"r2_m", 500.0},
        {"R_m", 1000.0},
        {"c1", 0.1},
        {"c2", 0.9},
        {"d1", 0.1},
        {"d2", 0.9},
        {"p_x", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}},
        {"omega_x", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}},
        {"S_N_TH", 1.0},
        {"M_O_TH", 1.0},
        {"U_prime_N", 1},
        {"O_b", 1.0},
        {"seed", 1},
        {"event_cap", 10'000'000},
        {"count_reauth_passes", true},
        {"shape", 1.0},
    };
}

Config resolve_config(const json& overrides) {
    if (!overrides.is_object()) {
        throw ConfigError("configuration must be a JSON object");
    }
    for (const auto& [key, value] : overrides.items()) {
        if (!kKnownFields.contains(key)) {
            field_error(key, "unknown field");
        }
    }
    json j = default_config_json();
    j.update(overrides);

    Config c;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) {
            field_error("name", "expected a string");
        }
        c.name = j.at("name").get<std::string>();
    }

    auto& s = c.scenario;
    auto& rates = s.rates;
    rates.arrival_rate = number(j, "beta");
    if (auto alpha = optional_number(j, "alpha")) {
        rates.key_update_rate = *alpha;
    } else {
        rates.key_update_rate = number(j, "alpha_over_beta") * rates.arrival_rate;
    }
    rates.incoming_rate = number(j, "gamma");
    rates.outgoing_rate = number(j, "gamma_prime");

    auto& net = s.net;
    net.vehicles = small_integer(j, "N");
    net.entities = small_integer(j, "E");
    net.initial_entities = j.contains("E0") ? small_integer(j, "E0") : net.entities;
    net.connected_entities = j.contains("E_prime") ? small_integer(j, "E_prime") : net.initial_entities;
    net.hop_inverse = small_integer(j, "n_inv");
    net.passes = small_integer(j, "Q");

    auto& w = s.window;
    w.t1 = number(j, "t1_s");
    w.t2 = number(j, "t2_s");
    w.horizon = number(j, "T_s");
    w.slot_step = number(j, "tx_step_s");
    w.attack_time = number(j, "t_attack_s");
    w.min_hold_time = number(j, "t_min_hold_s");
    w.key_use_time = number(j, "t_use_s");
    w.mandatory_updates = small_integer(j, "U_prime_N");

    s.range.r1 = number(j, "r1_m");
    s.range.r2 = number(j, "r2_m");
    s.range.update_distance = number(j, "R_m");

    s.thresholds.sustainability = number(j, "S_N_TH");
    s.thresholds.overhead = number(j, "M_O_TH");
    s.thresholds.mandatory_updates = w.mandatory_updates;
    s.thresholds.initial_overhead = number(j, "O_b");

    const long long seed = integer(j, "seed");
    if (seed < 0) {
        field_error("seed", "must be nonnegative");
    }
    s.seed = static_cast<std::uint64_t>(seed);
    const long long cap = integer(j, "event_cap");
    if (cap < 1) {
        field_error("event_cap", "must be positive");
    }
    s.event_cap = static_cast<std::size_t>(cap);
    if (!j.at("count_reauth_passes").is_boolean()) {
        field_error("count_reauth_passes", "expected true or false");
    }
    s.count_reauth_passes = j.at("count_reauth_passes").get<bool>();

    c.bounds.c1 = number(j, "c1");
    c.bounds.c2 = number(j, "c2");
    c.bounds.d1 = number(j, "d1");
    c.bounds.d2 = number(j, "d2");
    c.p_x = probabilities(j, "p_x");
    c.omega_x = probabilities(j, "omega_x");
    c.shape = number(j, "shape");
    c.alpha_prime = optional_number(j, "alpha_prime");
    c.key_updates = optional_number(j, "U_k").value_or(w.mandatory_updates);
    c.vehicles_in_range = optional_number(j, "D").value_or(net.vehicles);
    c.factors = factor_inputs(j);
    return c;
}

json parse_config_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Locate the failing byte as line:column.
        const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1;
        std::size_t column = 1;
        for (std::size_t i = 0; i < byte; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream msg;
        msg << origin << ":" << line << ":" << column << ": malformed JSON (" << e.what() << ")";
        throw ConfigError(msg.str());
    }
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return resolve_config(parse_config_text(buffer.str(), path.string()));
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        if (what.rfind(path.string(), 0) == 0) {
            throw;
        }
        throw ConfigError(path.string() + ": " + what);
    }
}

const std::vector<std::string>& sweepable_fields() {
    static const std::vector<std::string> fields = [] {
        std::vector<std::string> out;
        const json defaults = default_config_json();
        for (const auto& key : kKnownFields) {
            const bool scalar_default = defaults.contains(key) && defaults.at(key).is_number();
            const bool optional_scalar = key == "alpha" || key == "E0" || key == "E_prime" ||
                                         key == "alpha_prime" || key == "U_k" || key == "D";
            if (scalar_default || optional_scalar) {
                out.push_back(key);
            }
        }
        return out;
    }();
    return fields;
}

bool is_integer_field(const std::string& name) { return kIntegerFields.contains(name); }

}  // namespace v2xsec::cli
