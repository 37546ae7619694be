#include "v2xsec/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "v2xsec/csv.hpp"
#include "v2xsec/keychain.hpp"

namespace v2xsec::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNever = std::numeric_limits<double>::infinity();

enum Stream : std::uint32_t { arrivals_stream = 1, lifetime_stream, update_stream, position_stream, key_stream };

Engine make_engine(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Engine(seq);
}

double exponential(Engine& rng, double rate) {
    if (rate <= 0.0) {
        return kNever;
    }
    return std::exponential_distribution<double>(rate)(rng);
}

struct Vehicle {
    double start;
    double end;  // kNever when it outlives the horizon
    double position;
};

keychain::KeyHierarchy network_keys(std::uint64_t seed) {
    Engine rng = make_engine(seed, key_stream);
    keychain::KeyMaterial root{};
    do {
        for (auto& byte : root) {
            byte = static_cast<std::uint8_t>(rng() & 0xffu);
        }
    } while (std::all_of(root.begin(), root.end(), [](std::uint8_t b) { return b == 0; }));
    return keychain::build_hierarchy(root);
}

std::vector<double> slot_boundaries(const sustain::TimeWindow& window) {
    std::vector<double> out;
    const double horizon = window.horizon;
    for (int k = 1;; ++k) {
        const double b = k * window.slot_step;
        if (b > horizon * (1.0 + 1e-12)) {
            break;
        }
        out.push_back(std::min(b, horizon));
    }
    if (out.empty() || out.back() < horizon) {
        out.push_back(horizon);
    }
    return out;
}

void compute_slots(SimTrace& trace, const Scenario& scenario, const std::vector<Vehicle>& vehicles) {
    const auto& net = scenario.net;
    const auto& range = scenario.range;
    auto in_range = [&](std::uint64_t id) {
        const double x = vehicles[id].position;
        return x >= range.r1 && x <= range.r2;
    };

    int cohort = net.initial_entities;
    int in_band = 0;
    for (int i = 0; i < net.initial_entities; ++i) {
        in_band += in_range(static_cast<std::uint64_t>(i)) ? 1 : 0;
    }

    std::size_t next = 0;
    for (double boundary : slot_boundaries(scenario.window)) {
        int updates = 0;
        int passes = 0;
        for (; next < trace.events.size() && trace.events[next].t <= boundary; ++next) {
            const Event& e = trace.events[next];
            switch (e.kind) {
                case EventKind::arrival:
                    in_band += in_range(e.entity) ? 1 : 0;
                    break;
                case EventKind::departure:
                    in_band -= in_range(e.entity) ? 1 : 0;
                    if (e.entity < static_cast<std::uint64_t>(net.initial_entities)) {
                        --cohort;
                    }
                    break;
                case EventKind::key_update: ++updates; break;
                case EventKind::auth_pass: ++passes; break;
            }
        }
        const double loss = 1.0 - static_cast<double>(cohort) / net.entities;
        const double overhead =
            loss > 0.0 ? passes * (1.0 - loss) / (net.entities * loss) : kNaN;
        trace.slots.push_back({boundary, cohort, loss, updates, in_band, passes,
                               sustain::sustainability_ratio(updates, in_band, loss, net.hop_inverse,
                                                             net.passes),
                               overhead});
    }
}

}  // namespace

void Scenario::validate() const {
    net.validate();
    rates.validate();
    window.validate();
    range.validate();
    thresholds.validate();
    if (event_cap == 0) {
        throw DomainError("event_cap must be positive");
    }
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::arrival: return "arrival";
        case EventKind::departure: return "departure";
        case EventKind::key_update: return "key_update";
        case EventKind::auth_pass: return "auth_pass";
    }
    return "?";
}

SimTrace run_simulation(const Scenario& scenario) {
    scenario.validate();
    const auto& net = scenario.net;
    const auto& rates = scenario.rates;
    const double horizon = scenario.window.horizon;

    Engine arrival_rng = make_engine(scenario.seed, arrivals_stream);
    Engine lifetime_rng = make_engine(scenario.seed, lifetime_stream);
    Engine update_rng = make_engine(scenario.seed, update_stream);
    Engine position_rng = make_engine(scenario.seed, position_stream);

    auto sample_position = [&] {
        if (scenario.position_sampler) {
            return scenario.position_sampler(position_rng, scenario.range);
        }
        return std::uniform_real_distribution<double>(scenario.range.r1, scenario.range.r2)(position_rng);
    };

    SimTrace trace;
    trace.seed = scenario.seed;
    trace.initial_active = net.initial_entities;

    std::vector<Vehicle> vehicles;
    auto add_vehicle = [&](double start) {
        const double lifetime = exponential(lifetime_rng, rates.outgoing_rate);
        const double end = start + lifetime;
        vehicles.push_back({start, end <= horizon ? end : kNever, sample_position()});
    };
    for (int i = 0; i < net.initial_entities; ++i) {
        add_vehicle(0.0);
    }
    for (double t = exponential(arrival_rng, rates.arrival_rate); t <= horizon;
         t += exponential(arrival_rng, rates.arrival_rate)) {
        add_vehicle(t);
    }

    const auto keys = network_keys(scenario.seed);
    const auto mode = keychain::SessionMode::short_range;

    auto push = [&](Event e) {
        trace.events.push_back(e);
        if (trace.events.size() > scenario.event_cap) {
            trace.events.pop_back();
            std::stable_sort(trace.events.begin(), trace.events.end(),
                             [](const Event& a, const Event& b) { return a.t < b.t; });
            throw TruncationError("simulation exceeded event_cap = " + std::to_string(scenario.event_cap),
                                  std::move(trace));
        }
    };
    auto authenticate = [&](std::uint64_t id, double t) {
        const auto credential = keychain::issue_credential(keys, mode, "vehicle-" + std::to_string(id));
        const auto session = keychain::establish_session(keys, mode, credential, net.passes, t);
        for (int p = 0; p < session.passes_used; ++p) {
            push({t, EventKind::auth_pass, id});
        }
        trace.passes += session.passes_used;
    };

    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        const auto id = static_cast<std::uint64_t>(i);
        const Vehicle& v = vehicles[i];
        if (i >= static_cast<std::size_t>(net.initial_entities)) {
            push({v.start, EventKind::arrival, id});
            ++trace.arrivals;
            authenticate(id, v.start);
        }
        const double until = std::min(v.end, horizon);
        for (double u = v.start + exponential(update_rng, rates.key_update_rate); u <= until;
             u += exponential(update_rng, rates.key_update_rate)) {
            push({u, EventKind::key_update, id});
            ++trace.key_updates;
            if (scenario.count_reauth_passes) {
                authenticate(id, u);
                ++trace.reauthentications;
            }
        }
        if (v.end != kNever) {
            push({v.end, EventKind::departure, id});
            ++trace.departures;
        }
    }

    std::stable_sort(trace.events.begin(), trace.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    compute_slots(trace, scenario, vehicles);
    return trace;
}

double relative_deviation(double empirical, double model) {
    if (!std::isfinite(empirical) || !std::isfinite(model) || model == 0.0) {
        return kNaN;
    }
    return std::abs(empirical - model) / std::abs(model);
}

ComparisonReport compare_to_model(const SimTrace& trace, const Scenario& scenario) {
    scenario.validate();
    if (trace.seed != scenario.seed || trace.initial_active != scenario.net.initial_entities ||
        trace.slots.size() != slot_boundaries(scenario.window).size()) {
        throw DomainError("trace was not produced from this scenario");
    }
    const auto& net = scenario.net;
    const double reference = net.hop_inverse < net.entities
                                 ? sustain::loss_probability(net.hop_inverse, net.entities, net.vehicles)
                                 : kNaN;

    ComparisonReport report;
    double previous = 0.0;
    for (const SlotRecord& slot : trace.slots) {
        ComparisonRow row{};
        row.t = slot.t;
        row.sustainability_empirical = slot.sustainability;
        row.sustainability_model = kNaN;
        if (previous > 0.0) {
            try {
                row.sustainability_model = sustain::sustainability_window(scenario.rates, net, previous, slot.t);
            } catch (const DomainError&) {
                // Preconditions of the closed form (beta > alpha > 0, E > n^-1) fail.
            }
        }
        row.sustainability_deviation = relative_deviation(row.sustainability_empirical, row.sustainability_model);

        const double survivors = net.initial_entities * std::exp(-scenario.rates.outgoing_rate * slot.t);
        row.connected_fraction_empirical = static_cast<double>(slot.connected_entities) / net.entities;
        row.connected_fraction_model = survivors / net.entities;
        row.connected_fraction_deviation =
            relative_deviation(row.connected_fraction_empirical, row.connected_fraction_model);
        row.loss_empirical = slot.loss_probability;
        row.loss_model = 1.0 - row.connected_fraction_model;
        row.loss_deviation = relative_deviation(row.loss_empirical, row.loss_model);
        row.loss_probability_reference = reference;
        report.rows.push_back(row);
        previous = slot.t;
    }

    report.passes = trace.passes;
    const long long sessions =
        trace.arrivals + (scenario.count_reauth_passes ? trace.reauthentications : 0);
    report.expected_passes = static_cast<long long>(net.passes) * sessions;
    report.pass_deviation = report.expected_passes == 0
                                ? (report.passes == 0 ? 0.0 : kNaN)
                                : relative_deviation(static_cast<double>(report.passes),
                                                     static_cast<double>(report.expected_passes));
    return report;
}

void write_events_csv(const SimTrace& trace, std::ostream& out) {
    out << "t_s,kind,entity_id\n";
    for (const Event& e : trace.events) {
        out << csv::number(e.t) << ',' << to_string(e.kind) << ',' << e.entity << '\n';
    }
}

void write_metrics_csv(const SimTrace& trace, std::ostream& out) {
    out << "t_s,E_active,P_empirical,U_k,D,passes,S_N_emp,M_O_emp\n";
    for (const SlotRecord& s : trace.slots) {
        out << csv::number(s.t) << ',' << s.connected_entities << ',' << csv::number(s.loss_probability)
            << ',' << s.key_updates << ',' << s.vehicles_in_range << ',' << s.passes << ','
            << csv::number(s.sustainability) << ',' << csv::number(s.message_overhead) << '\n';
    }
}

void write_comparison_csv(const ComparisonReport& report, std::ostream& out) {
    out << "t_s,S_N_emp,S_N_model,S_N_rel_dev,P_emp,P_model,P_rel_dev,connected_emp,connected_model,"
           "connected_rel_dev,P_loss_reference\n";
    for (const auto& r : report.rows) {
        out << csv::number(r.t) << ',' << csv::number(r.sustainability_empirical) << ','
            << csv::number(r.sustainability_model) << ',' << csv::number(r.sustainability_deviation) << ','
            << csv::number(r.loss_empirical) << ',' << csv::number(r.loss_model) << ','
            << csv::number(r.loss_deviation) << ',' << csv::number(r.connected_fraction_empirical) << ','
            << csv::number(r.connected_fraction_model) << ',' << csv::number(r.connected_fraction_deviation)
            << ',' << csv::number(r.loss_probability_reference) << '\n';
    }
}

void write_summary_csv(const SimTrace& trace, const ComparisonReport& report, std::ostream& out) {
    out << "seed,arrivals,departures,key_updates,reauthentications,passes,expected_passes,pass_rel_dev\n";
    out << trace.seed << ',' << trace.arrivals << ',' << trace.departures << ',' << trace.key_updates << ','
        << trace.reauthentications << ',' << report.passes << ',' << report.expected_passes << ','
        << csv::number(report.pass_deviation) << '\n';
}

}  // namespace v2xsec::sim
