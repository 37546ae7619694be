#pragma once

#include <functional>
#include <optional>

namespace v2xsec::sustain {

/// Entity counts and protocol shape of the network.
///
/// `hop_inverse` is the hop count n^-1; the sustainability balancing
/// constant is n = 1 / hop_inverse. The combinatorial clauses of the
/// optimisation constraints (hop_inverse != E and the pair-count bound)
/// are checked by `decision::check_constraints`, not here.
struct NetworkParams {
    int vehicles = 10;           // N
    int entities = 10;           // E
    int connected_entities = 10; // E'
    int initial_entities = 10;   // E0
    int hop_inverse = 5;         // n^-1
    int passes = 1;              // Q

    void validate() const;
};

/// Poisson rates, all per second.
struct RateParams {
    double key_update_rate = 1.0;  // alpha
    double arrival_rate = 2.0;     // beta
    double incoming_rate = 1.0;    // gamma
    double outgoing_rate = 0.1;    // gamma'

    void validate() const;
};

struct TimeWindow {
    double t1 = 5.0;
    double t2 = 105.0;
    double horizon = 110.0;   // T
    double slot_step = 5.0;   // t_x step
    double attack_time = 60.0;     // t
    double min_hold_time = 30.0;   // t'
    double key_use_time = 20.0;    // t_u
    int mandatory_updates = 1;     // U'_N

    void validate() const;
};

struct RangeParams {
    double r1 = 100.0;
    double r2 = 500.0;
    double update_distance = 1000.0;  // R

    void validate() const;
};

/// Loss-of-connectivity probability (1 - hop_inverse / entities)^vehicles.
///
/// Real-valued form; accepts 0 <= hop_inverse < entities so the
/// hop_inverse -> 0 limit can be evaluated.
double loss_probability(double hop_inverse, double entities, double vehicles);

/// Modelled loss probability P = (1 - n^-1 / E)^N. Requires n^-1 < E.
double loss_probability_model(const NetworkParams& net);

/// Empirical loss probability 1 - E' / E.
double empirical_loss_probability(const NetworkParams& net);

/// S_N = n U_k / (D P Q) with n = 1 / hop_inverse.
///
/// When `update_distance` is given it replaces P in the denominator
/// (range-aware variant). Zero denominators and D > N are domain errors.
double sustainability_point(double key_updates, double vehicles_in_range, double probability,
                            const NetworkParams& net,
                            std::optional<double> update_distance = std::nullopt);

/// The bare ratio behind `sustainability_point`, without the D <= N check.
/// Returns NaN when a denominator factor is zero.
double sustainability_ratio(double key_updates, double vehicles_in_range, double denominator_factor,
                            int hop_inverse, int passes) noexcept;

/// Closed-form window sustainability
///
///   S_N = alpha^2 / (2 beta N P Q) * (Ei((beta - alpha) / t1) - Ei((beta - alpha) / t2))
///
/// with P the modelled loss probability. Needs t2 > t1 > 0, beta > alpha > 0, E > n^-1.
double sustainability_window(const RateParams& rates, const NetworkParams& net,
                             const TimeWindow& window);

/// Same closed form over an explicit [t1, t2].
double sustainability_window(const RateParams& rates, const NetworkParams& net, double t1,
                             double t2);

struct SustainabilityAsymptote {
    double value;                // alpha / beta
    bool window_form_admissible; // beta - alpha > 0
};

/// Large-rate limit S_N -> alpha / beta.
SustainabilityAsymptote sustainability_asymptote(const RateParams& rates);

/// Instantaneous signalling overhead O_b (1 - alpha')^t.
double raw_signaling_overhead(double initial_overhead, double fixed_update_rate, double t);

struct SignalingOverhead {
    double value;        // prefactor * time_factor
    double prefactor;    // O_b (n^-1/E)^N / (E (1 - n^-1/E)^N)
    double time_factor;  // ((1-alpha')^t2 - (1-alpha')^t1) / ln(1-alpha')
};

/// Signalling overhead predicted over [t1, t2] at a fixed update rate alpha' in (0, 1).
SignalingOverhead signaling_overhead(double initial_overhead, double fixed_update_rate,
                                     const NetworkParams& net, const TimeWindow& window);

/// M_O = O_S (1 - P) / (E P).
double message_overhead(double signaling, double probability, double entities);

/// D = integral of `density` over [r1, r2]. A negative density sample is a domain error.
double vehicles_in_range(const std::function<double(double)>& density, const RangeParams& range);

}  // namespace v2xsec::sustain
