#pragma once

#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "v2xsec/sustain.hpp"

namespace v2xsec::predict {

/// Beta traffic model parameters.
///
/// `credential_availability` holds 1 - p_x per entity and `slot_compliance`
/// holds 1 - omega_x per observed slot.
struct BetaTraffic {
    double shape = 1.0;  // theta, >= 1
    double scale = 1.0;  // mu, > 0
    std::vector<double> credential_availability;
    std::vector<double> slot_compliance;
    double incoming_rate = 1.0;  // gamma
    double outgoing_rate = 0.1;  // gamma'

    void validate() const;
};

struct LikelihoodBounds {
    double d1 = 0.1;
    double d2 = 0.9;
    double c1 = 0.1;
    double c2 = 0.9;

    /// Conditions on (d1, d2) for the fail-safe likelihood.
    void validate_window() const;
};

/// Maps the distance band [r1, r2] onto the unit interval as r / R.
std::pair<double, double> normalized_range(const sustain::RangeParams& range);

/// Integral of the Beta(shape, scale) density over [lower, upper] within [0, 1].
double density_beta(const BetaTraffic& traffic, double lower, double upper);

/// Integral of the Beta density over the normalised distance band.
double density_beta(const BetaTraffic& traffic, const sustain::RangeParams& range);

// Inputs of the three scale-parameter estimators.
struct CredentialScale {
    std::vector<double> availability;  // 1 - p_x, one per entity
};
struct SustainabilityScale {
    std::vector<double> sustainability;  // S_N samples over the observed slots
    std::vector<double> compliance;      // 1 - omega_x, one per slot
};
struct OutgoingScale {
    double outgoing_rate;  // gamma'
};
using ScaleInputs = std::variant<CredentialScale, SustainabilityScale, OutgoingScale>;

/// Scale parameter mu. Natural log throughout:
///   credentials:    E / sum ln(1 / (1 - p_x))
///   sustainability: mean(S_N) / sum ln(1 / (1 - omega_x))
///   outgoing:       1 / ln(1 / (1 - gamma'))
double scale_param(const ScaleInputs& inputs);

/// P_c = (E - E0 e^{-gamma' t}) / E. The loss probability used for prediction is 1 - P_c.
double connectivity_prob(const sustain::NetworkParams& net, double outgoing_rate, double t);

/// Rates in the connectivity factor 1 - (E0 / (E a)) (e^{-b t1} - e^{-b t2}).
///   mixed:    a = gamma, b = gamma' (as printed in the expanded formula)
///   outgoing: a = b = gamma'
///   incoming: a = b = gamma
enum class ConnectivityRate { mixed, outgoing, incoming };

struct PredictionOptions {
    /// alpha' used for the signalling term; defaults to alpha / t2.
    std::optional<double> fixed_update_rate;
    double initial_overhead = 1.0;  // O_b
    ConnectivityRate connectivity_rate = ConnectivityRate::mixed;
};

struct PredictedOverhead {
    double composed = 0.0;
    /// The expanded closed form; empty when one of its logarithms is undefined
    /// (for example alpha / t1 >= 1).
    std::optional<double> printed;
    std::optional<double> relative_difference;

    double key_updates = 0.0;       // U_K predicted
    double sustainability = 0.0;    // S_N predicted, per pass
    double signaling = 0.0;         // O_S
    double vehicles = 0.0;          // D predicted at unit shape parameters
    double connectivity_factor = 0.0;  // 1 - P predicted
};

/// Predicted key updates: integral over [t1, t2] of e^{-alpha/t} (alpha/t)^2 / 2.
double predicted_key_updates(double key_update_rate, double t1, double t2);

/// Connectivity factor 1 - (E0 / (E prefactor_rate)) (e^{-decay_rate t1} - e^{-decay_rate t2}).
double connectivity_factor(const sustain::NetworkParams& net, double prefactor_rate, double decay_rate,
                           double t1, double t2);

/// Predicted message overhead
///
///   M_O = Q / U_K * (S_N * O_S * D * (1 - P))
///
/// composed from its parts, alongside the expanded closed form.
PredictedOverhead predicted_message_overhead(const sustain::RateParams& rates,
                                             const sustain::NetworkParams& net,
                                             const sustain::TimeWindow& window,
                                             const sustain::RangeParams& range,
                                             const PredictionOptions& options = {});

struct FailSafeLikelihood {
    /// tau: the likelihood integral when mu > 2, zero otherwise.
    double tau = 0.0;
    /// (1/T) * integral_{d1}^{d2} Gamma(1+mu)/Gamma(mu) (1 - phi)^{mu-1} dphi, any mu > 0.
    double integral = 0.0;
    bool operable = false;  // mu > 2
    /// Printed closed forms, evaluated only when mu > 2 and finite.
    std::optional<double> closed_form_full;
    std::optional<double> closed_form_reduced;
};

FailSafeLikelihood failsafe_likelihood(double mu, const LikelihoodBounds& bounds, double horizon);

/// Evaluates tau over candidate (d1, d2) windows and returns the maximiser.
/// Ties go to the earliest d1.
std::pair<double, double> most_likely_window(double mu, std::span<const std::pair<double, double>> windows,
                                             double horizon);

/// integral_{c1}^{c2} e^{-gamma'/T} / ln(1 / (1 - gamma')) dgamma'.
/// c1 = 0 is a DivergenceError.
double scale_asymptote(const LikelihoodBounds& bounds, double horizon);

/// Growth diagnostic T^{t_x} reported next to the asymptote.
double scale_growth_diagnostic(double horizon, double slot_step);

}  // namespace v2xsec::predict
