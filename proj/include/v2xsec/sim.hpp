#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <string_view>
#include <vector>

#include "v2xsec/decision.hpp"
#include "v2xsec/error.hpp"
#include "v2xsec/sustain.hpp"

namespace v2xsec::sim {

using Engine = std::mt19937_64;

/// Draws a vehicle position in metres. The default is uniform over [r1, r2].
using PositionSampler = std::function<double(Engine&, const sustain::RangeParams&)>;

struct Scenario {
    sustain::NetworkParams net;
    sustain::RateParams rates;
    sustain::TimeWindow window;
    sustain::RangeParams range;
    decision::Thresholds thresholds;
    std::uint64_t seed = 1;
    std::size_t event_cap = 10'000'000;
    /// Count the Q passes of the re-authentication that follows each key update.
    bool count_reauth_passes = true;
    PositionSampler position_sampler;

    void validate() const;
};

enum class EventKind : std::uint8_t { arrival, departure, key_update, auth_pass };

std::string_view to_string(EventKind kind);

struct Event {
    double t;
    EventKind kind;
    std::uint64_t entity;

    bool operator==(const Event&) const = default;
};

/// Metrics over one slot (t - t_x, t].
struct SlotRecord {
    double t;
    int connected_entities;      // E': initial cohort still connected at t
    double loss_probability;     // 1 - E'/E
    int key_updates;             // U_k within the slot
    int vehicles_in_range;       // D at t
    int passes;                  // auth passes within the slot
    double sustainability;       // n U_k / (D P Q), NaN when undefined
    double message_overhead;     // passes (1 - P) / (E P), NaN when undefined

    bool operator==(const SlotRecord&) const = default;
};

struct SimTrace {
    std::vector<Event> events;
    std::vector<SlotRecord> slots;
    std::uint64_t seed = 0;
    int initial_active = 0;   // E0 entities connected at t = 0, ids [0, E0)
    int arrivals = 0;         // Poisson arrivals in [0, T]
    int departures = 0;
    int key_updates = 0;
    int reauthentications = 0;
    long long passes = 0;
};

/// Raised when a run exceeds `Scenario::event_cap`; carries the events generated so far.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, SimTrace partial)
        : Error(what), partial_(std::move(partial)) {}
    const SimTrace& partial() const noexcept { return partial_; }

private:
    SimTrace partial_;
};

/// Event-driven Monte Carlo run over [0, T].
///
/// Arrivals form a Poisson process of rate beta; every connected vehicle
/// (the E0 initial cohort and each arrival) leaves after an Exponential(gamma')
/// lifetime and refreshes its key pair at Poisson rate alpha while connected.
/// Each arrival authenticates with a Q-pass session. Arrivals, lifetimes,
/// updates and positions use separate seeded streams.
SimTrace run_simulation(const Scenario& scenario);

struct ComparisonRow {
    double t;
    double sustainability_empirical;
    double sustainability_model;        // closed form over the slot, NaN for the first slot
    double sustainability_deviation;
    double loss_empirical;              // 1 - E'/E
    double loss_model;                  // 1 - E0 e^{-gamma' t} / E
    double loss_deviation;
    double connected_fraction_empirical; // E'/E
    double connected_fraction_model;     // E0 e^{-gamma' t} / E
    double connected_fraction_deviation;
    double loss_probability_reference;   // (1 - n^-1/E)^N
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    long long passes = 0;
    long long expected_passes = 0;  // Q x (arrivals + counted re-authentications)
    double pass_deviation = 0.0;
};

/// Per-slot empirical-versus-model report. Throws DomainError when the trace
/// was not produced from `scenario`.
ComparisonReport compare_to_model(const SimTrace& trace, const Scenario& scenario);

void write_events_csv(const SimTrace& trace, std::ostream& out);
void write_metrics_csv(const SimTrace& trace, std::ostream& out);
void write_comparison_csv(const ComparisonReport& report, std::ostream& out);
/// One-row run summary: event totals and the pass-accounting check.
void write_summary_csv(const SimTrace& trace, const ComparisonReport& report, std::ostream& out);

/// Relative deviation |a - b| / |b|; NaN when either side is not finite or b == 0.
double relative_deviation(double empirical, double model);

}  // namespace v2xsec::sim
