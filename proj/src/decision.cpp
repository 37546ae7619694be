#include "v2xsec/decision.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "v2xsec/csv.hpp"
#include "v2xsec/error.hpp"

namespace v2xsec::decision {

namespace {

void require(bool condition, const char* message) {
    if (!condition) {
        throw DomainError(message);
    }
}

double normalize(double value, const FeatureRange& range) {
    if (!(range.upper > range.lower)) {
        throw DomainError("feature range needs upper > lower");
    }
    return std::clamp((value - range.lower) / (range.upper - range.lower), 0.0, 1.0);
}

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void FactorInputs::validate() const {
    require(components >= 1 && components <= 3, "w must lie in [1, 3]");
    double delta_sum = 0.0;
    for (double d : deltas) {
        require(unit(d), "each delta must lie in [0, 1]");
        delta_sum += d;
    }
    require(delta_sum > 0.0 && delta_sum <= 1.0 + 1e-12, "delta sum must lie in (0, 1]");
    for (double t : thetas) {
        require(unit(t), "each theta must lie in [0, 1]");
    }
}

std::array<double, 3> factor_components(const FactorInputs& in, const FactorBounds& b) {
    in.validate();
    const double mobility = (normalize(in.speed, b.speed) + normalize(in.location, b.location)) / 2.0;
    const double key_state =
        (normalize(in.last_update, b.last_update) + normalize(in.shared_sessions, b.shared_sessions) +
         normalize(in.refresh_rate, b.refresh_rate) + normalize(in.total_keys, b.total_keys)) /
        4.0;
    const double zone =
        (normalize(in.zone_traversals, b.zone_traversals) + normalize(in.associativity, b.associativity)) /
        2.0;
    return {in.deltas[0] * mobility, in.deltas[1] * key_state, in.deltas[2] * zone};
}

double combine_components(std::span<const double> components, std::span<const double> thetas) {
    require(!components.empty() && components.size() <= 3, "w must lie in [1, 3]");
    require(thetas.size() >= components.size(), "one theta per component required");
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < components.size(); ++i) {
        weighted += components[i] * thetas[i];
        total += thetas[i];
    }
    require(total > 0.0, "sum of theta must be positive");
    return std::clamp(weighted / total, 0.0, 1.0);
}

double factor_score(const FactorInputs& inputs, const FactorBounds& bounds) {
    const auto g = factor_components(inputs, bounds);
    const auto w = static_cast<std::size_t>(inputs.components);
    return combine_components(std::span<const double>(g).first(w),
                              std::span<const double>(inputs.thetas).first(w));
}

void Thresholds::validate() const {
    require(sustainability > 0.0 && overhead > 0.0 && initial_overhead > 0.0,
            "thresholds must be positive");
    require(mandatory_updates > 0, "U'_N must be positive");
}

std::string_view to_string(Constraint c) {
    switch (c) {
        case Constraint::min_key_updates: return "U_k >= U'_N";
        case Constraint::vehicles_in_range: return "0 < D <= N";
        case Constraint::hop_pairs: return "0 < n^-1(n^-1-1)/2 <= E(E-1)/2";
        case Constraint::hop_not_entities: return "n^-1 != E";
        case Constraint::key_use_time: return "t_u < t'";
    }
    return "?";
}

ConstraintReport check_constraints(const sustain::NetworkParams& net, const sustain::TimeWindow& window,
                                   double key_updates, double vehicles_in_range,
                                   const Thresholds& thresholds) {
    ConstraintReport report;
    auto fail = [&](Constraint c, const std::string& detail) {
        report.violations.push_back({c, detail});
    };

    if (!(key_updates >= thresholds.mandatory_updates)) {
        fail(Constraint::min_key_updates, "U_k = " + csv::number(key_updates) +
                                              " < U'_N = " + std::to_string(thresholds.mandatory_updates));
    }
    if (!(vehicles_in_range > 0.0 && vehicles_in_range <= net.vehicles)) {
        fail(Constraint::vehicles_in_range,
             "D = " + csv::number(vehicles_in_range) + ", N = " + std::to_string(net.vehicles));
    }
    const double n = net.hop_inverse;
    const double e = net.entities;
    const double hop_pairs = n * (n - 1.0) / 2.0;
    const double entity_pairs = e * (e - 1.0) / 2.0;
    if (!(hop_pairs > 0.0 && hop_pairs <= entity_pairs)) {
        fail(Constraint::hop_pairs, "n^-1 pairs = " + csv::number(hop_pairs) +
                                        ", E pairs = " + csv::number(entity_pairs));
    }
    if (net.hop_inverse == net.entities) {
        fail(Constraint::hop_not_entities, "n^-1 = E = " + std::to_string(net.entities));
    }
    if (!(window.key_use_time < window.min_hold_time)) {
        fail(Constraint::key_use_time, "t_u = " + csv::number(window.key_use_time) +
                                           " >= t' = " + csv::number(window.min_hold_time));
    }
    report.hold_slack = window.min_hold_time - window.key_use_time;
    return report;
}

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::continue_operation: return "continue";
        case Decision::update_keys: return "update_keys";
        case Decision::reconfigure: return "reconfigure";
    }
    return "?";
}

FailSafeReport failsafe_point(std::span<const TraceSample> trace, const Thresholds& thresholds,
                              bool t1_known) {
    require(!trace.empty(), "fail-safe trace must not be empty");
    for (std::size_t i = 1; i < trace.size(); ++i) {
        require(trace[i].t > trace[i - 1].t, "fail-safe trace must be strictly increasing in t");
    }

    auto safe = [&](const TraceSample& s) {
        return t1_known ? s.sustainability >= thresholds.sustainability
                        : s.overhead <= thresholds.overhead;
    };

    FailSafeReport report;
    std::size_t prefix = 0;
    while (prefix < trace.size() && safe(trace[prefix])) {
        ++prefix;
    }
    const char* metric = t1_known ? "S_N >= S_N^TH" : "M_O <= M_O^TH";
    if (prefix == 0) {
        report.decision = Decision::update_keys;
        report.rationale = std::string("no sample satisfies ") + metric;
        return report;
    }
    report.failsafe_time = trace[prefix - 1].t;
    std::ostringstream why;
    if (prefix == trace.size()) {
        report.decision = Decision::continue_operation;
        why << metric << " holds over the whole trace";
    } else {
        report.decision = Decision::update_keys;
        why << metric << " holds until t = " << csv::number(trace[prefix - 1].t);
    }
    report.rationale = why.str();
    return report;
}

FailSafeReport decide(const DecisionInputs& in, const Thresholds& thresholds) {
    FailSafeReport report;
    report.mu = in.mu;
    std::ostringstream why;
    if (!(in.mu > 2.0)) {
        report.decision = Decision::reconfigure;
        why << "mu = " << csv::number(in.mu) << " <= 2: network not operable, reconfigure";
    } else if (!(in.sustainability >= thresholds.sustainability)) {
        report.decision = Decision::update_keys;
        why << "S_N = " << csv::number(in.sustainability) << " below threshold "
            << csv::number(thresholds.sustainability);
    } else if (!(in.overhead <= thresholds.overhead)) {
        report.decision = Decision::update_keys;
        why << "M_O = " << csv::number(in.overhead) << " above threshold "
            << csv::number(thresholds.overhead);
    } else {
        report.decision = Decision::continue_operation;
        why << "all thresholds hold";
    }
    why << "; G_f = " << csv::number(in.factor_score);
    report.rationale = why.str();
    return report;
}

void UtilityLog::append(const LogEvent& event) {
    std::unique_lock lock(mutex_);
    if (!events_.empty() && event.timestamp < events_.back().timestamp) {
        throw OrderingError("utility log append out of order: " + csv::number(event.timestamp) + " < " +
                            csv::number(events_.back().timestamp));
    }
    events_.push_back(event);
}

std::vector<LogEvent> UtilityLog::query(double from, double to, std::optional<Decision> kind) const {
    std::shared_lock lock(mutex_);
    std::vector<LogEvent> out;
    auto first = std::lower_bound(events_.begin(), events_.end(), from,
                                  [](const LogEvent& e, double t) { return e.timestamp < t; });
    for (auto it = first; it != events_.end() && it->timestamp <= to; ++it) {
        if (!kind || it->decision == *kind) {
            out.push_back(*it);
        }
    }
    return out;
}

std::size_t UtilityLog::size() const {
    std::shared_lock lock(mutex_);
    return events_.size();
}

void UtilityLog::write_csv(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    out << "timestamp_s,S_N,M_O,mu,G_f,decision\n";
    for (const auto& e : events_) {
        out << csv::number(e.timestamp) << ',' << csv::number(e.sustainability) << ','
            << csv::number(e.overhead) << ',' << csv::number(e.mu) << ',' << csv::number(e.factor_score)
            << ',' << to_string(e.decision) << '\n';
    }
}

}  // namespace v2xsec::decision
