#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "v2xsec/decision.hpp"
#include "v2xsec/predict.hpp"
#include "v2xsec/sim.hpp"

namespace v2xsec::cli {

/// Malformed configuration: bad JSON (with line and column) or a bad field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fully resolved scenario configuration.
struct Config {
    std::string name;
    sim::Scenario scenario;
    predict::LikelihoodBounds bounds;
    std::vector<double> p_x;      // credential unavailability, one per entity
    std::vector<double> omega_x;  // per-slot threshold-violation probability
    double shape = 1.0;
    std::optional<double> alpha_prime;
    double key_updates = 0.0;       // U_k checked by `validate`
    double vehicles_in_range = 0.0; // D checked by `validate`
    decision::FactorInputs factors;

    /// alpha' for the signalling term: configured value or alpha / t2.
    double fixed_update_rate() const;
};

/// Scenario defaults from the numerical case study (beta = 2, alpha = beta/2,
/// N = 10, E = 10, n^-1 = 5, Q = 1, t1 = 5 s, t2 = 105 s, T = 110 s, ...).
nlohmann::json default_config_json();

/// Overlays `overrides` on the defaults and resolves the result.
Config resolve_config(const nlohmann::json& overrides);

/// Reads a JSON file and resolves it. Throws ConfigError.
Config load_config(const std::filesystem::path& path);

/// Parses JSON text; `origin` names the source in error messages.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin);

/// Scalar numeric fields that `sweep --param` accepts.
const std::vector<std::string>& sweepable_fields();

/// True for fields that must hold integers.
bool is_integer_field(const std::string& name);

}  // namespace v2xsec::cli
