#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "v2xsec/sustain.hpp"

namespace v2xsec::decision {

/// Inclusive [lower, upper] used to min-max normalise one feature.
struct FeatureRange {
    double lower = 0.0;
    double upper = 1.0;
};

/// Normalisation ranges for the raw vehicle features.
struct FactorBounds {
    FeatureRange speed{0.0, 40.0};           // m/s
    FeatureRange location{0.0, 1.0};
    FeatureRange last_update{0.0, 110.0};    // s
    FeatureRange shared_sessions{0.0, 50.0};
    FeatureRange refresh_rate{0.0, 10.0};    // 1/s
    FeatureRange total_keys{0.0, 100.0};
    FeatureRange zone_traversals{0.0, 20.0};
    FeatureRange associativity{0.0, 1.0};
};

struct FactorInputs {
    double speed = 0.0;            // S
    double location = 0.0;         // L
    double last_update = 0.0;      // U_T, seconds ago
    double shared_sessions = 0.0;  // A_S
    double refresh_rate = 0.0;     // F_R
    double total_keys = 0.0;       // T_K
    double zone_traversals = 0.0;  // Z_T
    double associativity = 0.0;    // V_A
    std::array<double, 3> deltas{1.0 / 3, 1.0 / 3, 1.0 / 3};
    std::array<double, 3> thetas{1.0, 1.0, 1.0};
    int components = 3;            // w

    void validate() const;
};

/// g_1 = delta_1 f(S, L), g_2 = delta_2 f(U_T, A_S, F_R, T_K), g_3 = delta_3 f(Z_T, V_A),
/// each f being the mean of its min-max normalised arguments.
std::array<double, 3> factor_components(const FactorInputs& inputs, const FactorBounds& bounds = {});

/// Theta-weighted mean of the first `components.size()` entries, clamped to [0, 1].
double combine_components(std::span<const double> components, std::span<const double> thetas);

/// G_f for a vehicle.
double factor_score(const FactorInputs& inputs, const FactorBounds& bounds = {});

struct Thresholds {
    double sustainability = 1.0;  // S_N^TH
    double overhead = 1.0;        // M_O^TH
    int mandatory_updates = 1;    // U'_N
    double initial_overhead = 1.0; // O_b

    void validate() const;
};

enum class Constraint {
    min_key_updates,   // U_k >= U'_N
    vehicles_in_range, // 0 < D <= N
    hop_pairs,         // 0 < n^-1(n^-1 - 1)/2 <= E(E - 1)/2
    hop_not_entities,  // n^-1 != E
    key_use_time,      // t_u < t'
};

std::string_view to_string(Constraint c);

struct Violation {
    Constraint constraint;
    std::string detail;
};

struct ConstraintReport {
    std::vector<Violation> violations;
    double hold_slack = 0.0;  // t' - t_u, reported, not optimised

    bool ok() const { return violations.empty(); }
};

/// Evaluates each clause of the operating constraints. Never throws; every
/// failed clause appears once in the report.
ConstraintReport check_constraints(const sustain::NetworkParams& net, const sustain::TimeWindow& window,
                                   double key_updates, double vehicles_in_range,
                                   const Thresholds& thresholds);

enum class Decision { continue_operation, update_keys, reconfigure };

std::string_view to_string(Decision d);

struct FailSafeReport {
    std::optional<double> failsafe_time;  // F_S, seconds
    std::optional<double> tau;
    std::optional<double> mu;
    Decision decision = Decision::continue_operation;
    std::string rationale;
};

struct TraceSample {
    double t;
    double sustainability;  // S_N
    double overhead;        // M_O
};

/// End of the maximal prefix of samples that stay within threshold: S_N >= S_N^TH
/// when t1 is known, M_O <= M_O^TH otherwise. Equality counts as safe.
/// Throws DomainError when the trace is empty or not strictly increasing in t.
FailSafeReport failsafe_point(std::span<const TraceSample> trace, const Thresholds& thresholds,
                              bool t1_known);

struct DecisionInputs {
    double sustainability;  // S_N
    double overhead;        // M_O
    double mu;
    double factor_score;    // G_f
};

/// mu <= 2 forces reconfigure; otherwise any threshold breach asks for a key
/// update; otherwise continue. A NaN mu counts as non-operable.
FailSafeReport decide(const DecisionInputs& inputs, const Thresholds& thresholds);

struct LogEvent {
    double timestamp;
    double sustainability;
    double overhead;
    double mu;
    double factor_score;
    Decision decision;
};

/// Append-only, time-ordered log of decisions. One writer, many readers.
class UtilityLog {
public:
    /// Throws OrderingError when `event` is older than the last entry.
    void append(const LogEvent& event);

    /// Events with from <= timestamp <= to, optionally of one decision kind.
    std::vector<LogEvent> query(double from, double to,
                                std::optional<Decision> kind = std::nullopt) const;

    std::size_t size() const;

    /// Columns: timestamp_s,S_N,M_O,mu,G_f,decision
    void write_csv(std::ostream& out) const;

private:
    mutable std::shared_mutex mutex_;
    std::vector<LogEvent> events_;
};

}  // namespace v2xsec::decision
