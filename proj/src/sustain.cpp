#include "v2xsec/sustain.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "v2xsec/error.hpp"
#include "v2xsec/specfun.hpp"

namespace v2xsec::sustain {

namespace {

void require(bool condition, const char* message) {
    if (!condition) {
        throw DomainError(message);
    }
}

}  // namespace

void NetworkParams::validate() const {
    require(vehicles >= 1, "N (vehicles) must be positive");
    require(entities >= 1, "E (entities) must be positive");
    require(connected_entities >= 0 && connected_entities <= entities, "E' must lie in [0, E]");
    require(initial_entities >= 0 && initial_entities <= entities, "E0 must lie in [0, E]");
    require(hop_inverse >= 1, "n_inv must be a positive integer");
    require(passes >= 1, "Q (passes) must be positive");
}

void RateParams::validate() const {
    require(key_update_rate >= 0.0, "alpha must be nonnegative");
    require(arrival_rate > 0.0, "beta must be positive");
    require(incoming_rate >= 0.0, "gamma must be nonnegative");
    require(outgoing_rate >= 0.0, "gamma' must be nonnegative");
}

void TimeWindow::validate() const {
    require(t1 > 0.0, "t1 must be positive");
    require(t2 > t1, "t2 - t1 must be positive");
    require(horizon >= t2, "T must be at least t2");
    require(slot_step > 0.0, "t_x step must be positive");
    require(attack_time >= 0.0 && min_hold_time >= 0.0 && key_use_time >= 0.0,
            "t, t' and t_u must be nonnegative");
    require(mandatory_updates >= 0, "U'_N must be nonnegative");
}

void RangeParams::validate() const {
    require(r2 > 0.0, "r2 must be positive");
    require(r2 > r1, "r2 - r1 must be positive");
    require(update_distance > 0.0, "R must be positive");
}

double loss_probability(double hop_inverse, double entities, double vehicles) {
    require(entities > 0.0, "E must be positive");
    require(hop_inverse >= 0.0, "n_inv must be nonnegative");
    require(hop_inverse < entities, "loss probability requires n_inv < E");
    require(vehicles >= 0.0, "N must be nonnegative");
    return std::pow(1.0 - hop_inverse / entities, vehicles);
}

double loss_probability_model(const NetworkParams& net) {
    net.validate();
    return loss_probability(net.hop_inverse, net.entities, net.vehicles);
}

double empirical_loss_probability(const NetworkParams& net) {
    net.validate();
    return 1.0 - static_cast<double>(net.connected_entities) / net.entities;
}

double sustainability_ratio(double key_updates, double vehicles_in_range, double denominator_factor,
                            int hop_inverse, int passes) noexcept {
    const double denominator = vehicles_in_range * denominator_factor * passes;
    if (denominator == 0.0 || hop_inverse == 0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return (1.0 / hop_inverse) * key_updates / denominator;
}

double sustainability_point(double key_updates, double vehicles_in_range, double probability,
                            const NetworkParams& net, std::optional<double> update_distance) {
    net.validate();
    require(vehicles_in_range > 0.0, "D must be positive");
    require(vehicles_in_range <= net.vehicles, "D must not exceed N");
    double factor = probability;
    if (update_distance) {
        require(*update_distance > 0.0, "R must be positive");
        factor = *update_distance;
    } else {
        require(probability > 0.0 && probability <= 1.0, "P must lie in (0, 1]");
    }
    return sustainability_ratio(key_updates, vehicles_in_range, factor, net.hop_inverse, net.passes);
}

double sustainability_window(const RateParams& rates, const NetworkParams& net, double t1,
                             double t2) {
    rates.validate();
    net.validate();
    require(t1 > 0.0, "t1 must be positive");
    require(t2 > t1, "t2 - t1 must be positive");
    require(rates.key_update_rate > 0.0, "alpha must be positive");
    require(rates.arrival_rate > rates.key_update_rate, "window sustainability requires beta - alpha > 0");
    require(net.entities > net.hop_inverse, "window sustainability requires E - n_inv > 0");

    const double alpha = rates.key_update_rate;
    const double beta = rates.arrival_rate;
    const double probability = loss_probability_model(net);
    const double prefactor =
        alpha * alpha / (2.0 * beta * net.vehicles * probability * net.passes);
    const double gap = beta - alpha;
    return prefactor * (specfun::expint_ei(gap / t1) - specfun::expint_ei(gap / t2));
}

double sustainability_window(const RateParams& rates, const NetworkParams& net,
                             const TimeWindow& window) {
    window.validate();
    return sustainability_window(rates, net, window.t1, window.t2);
}

SustainabilityAsymptote sustainability_asymptote(const RateParams& rates) {
    require(rates.arrival_rate > 0.0, "beta must be positive");
    require(rates.key_update_rate >= 0.0, "alpha must be nonnegative");
    return {rates.key_update_rate / rates.arrival_rate,
            rates.arrival_rate - rates.key_update_rate > 0.0};
}

double raw_signaling_overhead(double initial_overhead, double fixed_update_rate, double t) {
    require(fixed_update_rate > 0.0 && fixed_update_rate < 1.0, "alpha' must lie in (0, 1)");
    return initial_overhead * std::pow(1.0 - fixed_update_rate, t);
}

SignalingOverhead signaling_overhead(double initial_overhead, double fixed_update_rate,
                                     const NetworkParams& net, const TimeWindow& window) {
    require(fixed_update_rate > 0.0 && fixed_update_rate < 1.0, "alpha' must lie in (0, 1)");
    require(initial_overhead >= 0.0, "O_b must be nonnegative");
    net.validate();
    window.validate();
    require(net.hop_inverse < net.entities, "signalling overhead requires n_inv < E");

    const double ratio = static_cast<double>(net.hop_inverse) / net.entities;
    const double prefactor = initial_overhead * std::pow(ratio, net.vehicles) /
                             (net.entities * std::pow(1.0 - ratio, net.vehicles));
    const double base = 1.0 - fixed_update_rate;
    const double time_factor =
        (std::pow(base, window.t2) - std::pow(base, window.t1)) / std::log(base);
    return {prefactor * time_factor, prefactor, time_factor};
}

double message_overhead(double signaling, double probability, double entities) {
    require(probability > 0.0 && probability <= 1.0, "message overhead requires 0 < P <= 1");
    require(entities > 0.0, "message overhead requires E > 0");
    return signaling * (1.0 - probability) / (entities * probability);
}

double vehicles_in_range(const std::function<double(double)>& density, const RangeParams& range) {
    range.validate();
    auto checked = [&](double x) {
        const double value = density(x);
        if (value < 0.0) {
            throw DomainError("density must be nonnegative, got " + std::to_string(value) +
                              " at x = " + std::to_string(x));
        }
        return value;
    };
    return specfun::integrate(checked, {range.r1, range.r2, 1e-10, 60}).value;
}

}  // namespace v2xsec::sustain
