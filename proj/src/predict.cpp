#include "v2xsec/predict.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "v2xsec/error.hpp"
#include "v2xsec/specfun.hpp"

namespace v2xsec::predict {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) {
        throw DomainError(message);
    }
}

bool open_probability(double p) { return p > 0.0 && p < 1.0; }

// Sum of ln(1 / v) over probabilities v in (0, 1).
double log_reciprocal_sum(const std::vector<double>& values, const char* what) {
    require(!values.empty(), std::string(what) + " must not be empty");
    double sum = 0.0;
    for (double v : values) {
        require(open_probability(v), std::string(what) + " entries must lie strictly in (0, 1)");
        sum += -std::log(v);
    }
    return sum;
}

// Re-raises a component failure with the component named.
template <typename F>
auto component(const char* name, F&& f) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw DomainError(std::string("predicted overhead [") + name + "]: " + e.what());
    }
}

}  // namespace

void BetaTraffic::validate() const {
    require(shape >= 1.0, "Beta shape must be at least 1");
    require(scale > 0.0, "Beta scale must be positive");
    for (double p : credential_availability) {
        require(open_probability(p), "credential availability must lie in (0, 1)");
    }
    for (double p : slot_compliance) {
        require(open_probability(p), "slot compliance must lie in (0, 1)");
    }
    require(incoming_rate >= 0.0 && outgoing_rate >= 0.0, "rates must be nonnegative");
}

void LikelihoodBounds::validate_window() const {
    require(d1 >= 0.0, "d1 must be nonnegative");
    require(d2 - d1 > 0.0, "likelihood window requires d2 - d1 > 0");
    require(1.0 - d2 > 0.0 && 1.0 - d1 > 0.0, "likelihood window requires d1, d2 < 1");
}

std::pair<double, double> normalized_range(const sustain::RangeParams& range) {
    range.validate();
    const double lower = range.r1 / range.update_distance;
    const double upper = range.r2 / range.update_distance;
    require(lower >= 0.0 && upper <= 1.0, "distance band maps outside the unit interval (needs 0 <= r1, r2 <= R)");
    return {lower, upper};
}

double density_beta(const BetaTraffic& traffic, double lower, double upper) {
    traffic.validate();
    require(lower >= 0.0 && upper <= 1.0 && lower <= upper,
            "Beta density interval must lie within [0, 1]");
    auto pdf = [&](double x) { return specfun::beta_pdf(x, traffic.shape, traffic.scale); };
    return specfun::integrate(pdf, {lower, upper, 1e-11, 60}).value;
}

double density_beta(const BetaTraffic& traffic, const sustain::RangeParams& range) {
    const auto [lower, upper] = normalized_range(range);
    return density_beta(traffic, lower, upper);
}

double scale_param(const ScaleInputs& inputs) {
    struct Visitor {
        double operator()(const CredentialScale& in) const {
            const double sum = log_reciprocal_sum(in.availability, "credential availability");
            return static_cast<double>(in.availability.size()) / sum;
        }
        double operator()(const SustainabilityScale& in) const {
            require(!in.sustainability.empty(), "sustainability samples must not be empty");
            const double sum = log_reciprocal_sum(in.compliance, "slot compliance");
            const double mean =
                std::accumulate(in.sustainability.begin(), in.sustainability.end(), 0.0) /
                static_cast<double>(in.sustainability.size());
            return mean / sum;
        }
        double operator()(const OutgoingScale& in) const {
            if (in.outgoing_rate == 0.0) {
                throw DomainError("scale parameter is unbounded at gamma' = 0");
            }
            require(open_probability(in.outgoing_rate), "gamma' must lie in (0, 1)");
            return 1.0 / -std::log1p(-in.outgoing_rate);
        }
    };
    return std::visit(Visitor{}, inputs);
}

double connectivity_prob(const sustain::NetworkParams& net, double outgoing_rate, double t) {
    require(net.entities > 0, "connectivity probability requires E > 0");
    require(net.initial_entities >= 0 && net.initial_entities <= net.entities, "E0 must lie in [0, E]");
    require(outgoing_rate >= 0.0, "gamma' must be nonnegative");
    require(t >= 0.0, "t must be nonnegative");
    const double survivors = net.initial_entities * std::exp(-outgoing_rate * t);
    return (net.entities - survivors) / net.entities;
}

double predicted_key_updates(double key_update_rate, double t1, double t2) {
    require(key_update_rate > 0.0, "alpha must be positive");
    require(t1 > 0.0 && t2 > t1, "predicted key updates require t2 > t1 > 0");
    auto poisson = [&](double t) {
        const double rate = key_update_rate / t;
        return std::exp(-rate) * rate * rate / 2.0;
    };
    return specfun::integrate(poisson, {t1, t2, 1e-12, 60}).value;
}

double connectivity_factor(const sustain::NetworkParams& net, double prefactor_rate, double decay_rate,
                           double t1, double t2) {
    require(prefactor_rate > 0.0 && decay_rate >= 0.0, "connectivity factor requires positive rates");
    require(net.entities > 0, "connectivity factor requires E > 0");
    return 1.0 - static_cast<double>(net.initial_entities) / (net.entities * prefactor_rate) *
                     (std::exp(-decay_rate * t1) - std::exp(-decay_rate * t2));
}

PredictedOverhead predicted_message_overhead(const sustain::RateParams& rates,
                                             const sustain::NetworkParams& net,
                                             const sustain::TimeWindow& window,
                                             const sustain::RangeParams& range,
                                             const PredictionOptions& options) {
    rates.validate();
    net.validate();
    window.validate();
    range.validate();
    require(net.hop_inverse != net.entities, "predicted overhead requires n_inv != E");

    const double alpha = rates.key_update_rate;
    const double beta = rates.arrival_rate;
    const double t1 = window.t1;
    const double t2 = window.t2;
    const double prefactor_rate = options.connectivity_rate == ConnectivityRate::outgoing
                                      ? rates.outgoing_rate
                                      : rates.incoming_rate;
    const double decay_rate = options.connectivity_rate == ConnectivityRate::incoming ? rates.incoming_rate
                                                                                      : rates.outgoing_rate;

    PredictedOverhead out;
    out.key_updates = component("U_K", [&] { return predicted_key_updates(alpha, t1, t2); });
    out.sustainability = component("S_N", [&] {
        sustain::NetworkParams per_pass = net;
        per_pass.passes = 1;
        return sustain::sustainability_window(rates, per_pass, window);
    });
    const double fixed_rate = options.fixed_update_rate.value_or(alpha / t2);
    out.signaling = component("O_S", [&] {
        return sustain::signaling_overhead(options.initial_overhead, fixed_rate, net, window).value;
    });
    out.vehicles = component("D", [&] {
        BetaTraffic unit;
        return density_beta(unit, range);
    });
    out.connectivity_factor = component("P", [&] {
        return connectivity_factor(net, prefactor_rate, decay_rate, t1, t2);
    });

    out.composed = net.passes / out.key_updates *
                   (out.sustainability * out.signaling * out.vehicles * out.connectivity_factor);

    const double near = alpha / t1;
    const double far = alpha / t2;
    if (near < 1.0 && far < 1.0) {
        const double ratio = static_cast<double>(net.hop_inverse) / net.entities;
        const double log_far = std::log1p(-far);
        const double log_near = std::log1p(-near);
        const double signaling_part =
            options.initial_overhead * std::pow(ratio, net.vehicles) * (t2 * log_far - t1 * log_near) /
            (log_far * net.entities * (std::exp(-far) - std::exp(-near)));
        const double gap = beta - alpha;
        const double sustainability_part =
            alpha * (range.r2 - range.r1) /
            (beta * net.vehicles * std::pow(1.0 - ratio, 2 * net.vehicles)) *
            (specfun::expint_ei(gap / t1) - specfun::expint_ei(gap / t2));
        const double printed = signaling_part * sustainability_part * out.connectivity_factor;
        if (std::isfinite(printed)) {
            out.printed = printed;
            if (printed != 0.0) {
                out.relative_difference = std::abs(out.composed - printed) / std::abs(printed);
            }
        }
    }
    return out;
}

FailSafeLikelihood failsafe_likelihood(double mu, const LikelihoodBounds& bounds, double horizon) {
    require(mu > 0.0, "scale parameter must be positive");
    require(horizon > 0.0, "T must be positive");
    bounds.validate_window();

    const double log_ratio = specfun::ln_gamma(1.0 + mu) - specfun::ln_gamma(mu);
    auto density = [&](double phi) { return std::exp(log_ratio + (mu - 1.0) * std::log1p(-phi)); };

    FailSafeLikelihood out;
    out.integral = specfun::integrate(density, {bounds.d1, bounds.d2, 1e-13, 60}).value / horizon;
    out.operable = mu > 2.0;
    if (!out.operable) {
        return out;
    }
    out.tau = out.integral;

    const double log_far = std::log1p(-bounds.d2);
    const double log_near = std::log1p(-bounds.d1);
    const double log_full = log_ratio + 2.0 * log_far + 2.0 * log_near - mu * (log_far + log_near) -
                            std::log(mu - 2.0);
    const double full = std::exp(log_full);
    if (std::isfinite(full)) {
        out.closed_form_full = full;
    }
    const double reduced = std::exp(log_ratio + 2.0 * log_far + 2.0 * log_near - std::log(mu - 2.0));
    if (std::isfinite(reduced)) {
        out.closed_form_reduced = reduced;
    }
    return out;
}

std::pair<double, double> most_likely_window(double mu, std::span<const std::pair<double, double>> windows,
                                             double horizon) {
    require(!windows.empty(), "no candidate windows");
    std::pair<double, double> best = windows.front();
    double best_tau = -1.0;
    for (const auto& [d1, d2] : windows) {
        LikelihoodBounds bounds;
        bounds.d1 = d1;
        bounds.d2 = d2;
        const double tau = failsafe_likelihood(mu, bounds, horizon).tau;
        if (tau > best_tau || (tau == best_tau && d1 < best.first)) {
            best_tau = tau;
            best = {d1, d2};
        }
    }
    return best;
}

double scale_asymptote(const LikelihoodBounds& bounds, double horizon) {
    require(horizon > 0.0, "T must be positive");
    if (bounds.c1 == 0.0) {
        throw DivergenceError("scale asymptote integral diverges at c1 = 0 (integrand ~ 1/gamma')");
    }
    require(bounds.c1 > 0.0 && bounds.c1 < 1.0, "c1 must lie in (0, 1)");
    require(bounds.c2 < 1.0, "c2 must be below 1");
    require(bounds.c2 >= bounds.c1, "c2 - c1 must be nonnegative");
    auto integrand = [&](double g) { return std::exp(-g / horizon) / -std::log1p(-g); };
    return specfun::integrate(integrand, {bounds.c1, bounds.c2, 1e-12, 60}).value;
}

double scale_growth_diagnostic(double horizon, double slot_step) {
    require(horizon > 0.0, "T must be positive");
    return std::pow(horizon, slot_step);
}

}  // namespace v2xsec::predict
