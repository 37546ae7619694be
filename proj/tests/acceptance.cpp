// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "oracles.hpp"
#include "v2xsec/decision.hpp"
#include "v2xsec/error.hpp"
#include "v2xsec/keychain.hpp"
#include "v2xsec/predict.hpp"
#include "v2xsec/sim.hpp"
#include "v2xsec/specfun.hpp"
#include "v2xsec/sustain.hpp"

using namespace v2xsec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* format, double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, format, value);
    return buffer;
}

sustain::NetworkParams network(int N, int E, int hop_inverse, int Q) {
    sustain::NetworkParams net;
    net.vehicles = N;
    net.entities = E;
    net.connected_entities = E;
    net.initial_entities = E;
    net.hop_inverse = hop_inverse;
    net.passes = Q;
    return net;
}

sustain::RateParams rates(double alpha, double beta) {
    sustain::RateParams r;
    r.key_update_rate = alpha;
    r.arrival_rate = beta;
    return r;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome closed_form_agreement() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    int points = 0;
    for (int beta = 2; beta <= 10; beta += 2) {
        for (int Q = 1; Q <= 5; ++Q) {
            for (int E = 10; E <= 50; E += 10) {
                const double alpha = beta / 2.0;
                const double closed = sustain::sustainability_window(rates(alpha, beta), network(10, E, 5, Q), 5, 105);
                const double ref = static_cast<double>(oracle::window_sustainability(alpha, beta, 10, E, 5, Q, 5, 105));
                worst = std::max(worst, rel(closed, ref));
                ++points;
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {worst <= 1e-8 && elapsed < 5.0 && points == 125,
            std::to_string(points) + " grid points, max rel dev " + fmt("%.2e", worst) + ", " +
                fmt("%.3f", elapsed) + " s"};
}

Outcome special_functions() {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = 0.009 + (30.0 - 0.009) * i / 99.0;
        worst = std::max(worst, rel(specfun::expint_ei(x), static_cast<double>(oracle::ei(x))));
    }
    bool exact = true;
    for (int n = 1; n <= 15; ++n) {
        const auto f = oracle::factorial(n - 1);
        exact = exact && specfun::ln_gamma(n) == std::log(static_cast<double>(f)) &&
                static_cast<std::uint64_t>(std::llround(std::exp(specfun::ln_gamma(n)))) == f;
    }
    return {worst <= 1e-10 && exact, "Ei max rel dev " + fmt("%.2e", worst) + " over 100 points; ln_gamma factorials " +
                                         (exact ? "exact" : "inexact")};
}

Outcome tau_integral() {
    predict::LikelihoodBounds bounds;
    double worst = 0.0;
    for (int i = 0; i <= 198; ++i) {
        const double mu = 0.5 + 0.25 * i;
        const double exact = (std::pow(1 - bounds.d1, mu) - std::pow(1 - bounds.d2, mu)) / 110.0;
        worst = std::max(worst, rel(predict::failsafe_likelihood(mu, bounds, 110.0).integral, exact));
    }
    bool zero = true;
    for (double mu : {0.5, 1.0, 1.5, 1.999, 2.0}) {
        zero = zero && predict::failsafe_likelihood(mu, bounds, 110.0).tau == 0.0;
    }
    return {worst <= 1e-9 && zero,
            "max rel dev " + fmt("%.2e", worst) + " for mu in [0.5, 50]; tau = 0 at mu <= 2: " + (zero ? "yes" : "no")};
}

Outcome table3_structure() {
    const auto checks = cli::table3_checks();
    const auto failed = std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; });
    double worst = 0.0;
    for (const auto& c : checks) {
        if (std::isfinite(c.rel_dev)) {
            worst = std::max(worst, c.rel_dev);
        }
    }
    return {failed == 0 && !checks.empty(), std::to_string(checks.size() - static_cast<std::size_t>(failed)) + "/" +
                                                std::to_string(checks.size()) + " fixture checks, max mu*Q dev " +
                                                fmt("%.2e", worst)};
}

Outcome monte_carlo() {
    const auto start = std::chrono::steady_clock::now();
    const double mean = 220.0;
    const double sigma = std::sqrt(mean);
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        sim::Scenario s;
        s.seed = seed;
        const auto trace = sim::run_simulation(s);
        within += std::abs(trace.arrivals - mean) <= 4 * sigma ? 1 : 0;
    }
    sim::Scenario big;
    big.net = network(10, 100000, 5, 1);
    big.rates.key_update_rate = 0.0;
    big.seed = 2024;
    const auto trace = sim::run_simulation(big);
    const auto report = sim::compare_to_model(trace, big);
    double mad = 0.0;
    for (const auto& row : report.rows) {
        mad += std::abs(row.connected_fraction_empirical - row.connected_fraction_model);
    }
    mad /= static_cast<double>(report.rows.size());
    const double elapsed = seconds_since(start);
    return {within == 30 && mad <= 0.02 && elapsed < 30.0,
            std::to_string(within) + "/30 arrival counts within 4 sigma; survivor MAD " + fmt("%.2e", mad) + "; " +
                fmt("%.2f", elapsed) + " s"};
}

Outcome proportionality() {
    const auto r = rates(1, 2);
    const double base = sustain::sustainability_window(r, network(10, 10, 5, 1), 5, 105);
    double q_dev = 0.0;
    for (int q = 1; q <= 5; ++q) {
        q_dev = std::max(q_dev, rel(q * sustain::sustainability_window(r, network(10, 10, 5, q), 5, 105), base));
    }
    predict::PredictionOptions options;
    const sustain::TimeWindow w;
    const sustain::RangeParams range;
    const double m1 = predict::predicted_message_overhead(r, network(10, 10, 5, 1), w, range, options).composed;
    double ob_dev = 0.0;
    for (double ob : {0.5, 2.0, 10.0}) {
        options.initial_overhead = ob;
        ob_dev = std::max(ob_dev, rel(predict::predicted_message_overhead(r, network(10, 10, 5, 1), w, range, options).composed,
                                      ob * m1));
    }
    options.initial_overhead = 1.0;
    double mq_dev = 0.0;
    for (int q = 1; q <= 5; ++q) {
        mq_dev = std::max(mq_dev, rel(predict::predicted_message_overhead(r, network(10, 10, 5, q), w, range, options).composed,
                                      q * m1));
    }
    double os_dev = 0.0;
    for (double os : {0.5, 3.0, 40.0}) {
        os_dev = std::max(os_dev, rel(sustain::message_overhead(2 * os, 0.3, 10), 2 * sustain::message_overhead(os, 0.3, 10)));
    }
    const bool ok = q_dev <= 1e-12 && ob_dev <= 1e-12 && mq_dev <= 1e-12 && os_dev <= 1e-12;
    return {ok, "S_N*Q " + fmt("%.1e", q_dev) + ", M_O_pred vs O_b " + fmt("%.1e", ob_dev) + ", vs Q " +
                    fmt("%.1e", mq_dev) + ", M_O vs O_S " + fmt("%.1e", os_dev)};
}

Outcome monotonicity() {
    bool pc = true;
    auto net = network(10, 50, 5, 1);
    net.initial_entities = 40;
    for (double g : {0.01, 0.1, 0.5}) {
        double previous = predict::connectivity_prob(net, g, 0.0);
        pc = pc && previous >= 0.0 && previous < 1.0;
        for (double t = 0.5; t <= 110.0; t += 0.5) {
            const double p = predict::connectivity_prob(net, g, t);
            const bool representable = net.initial_entities * std::exp(-g * t) / net.entities > 1e-15;
            pc = pc && p >= previous && p >= 0.0 && p <= 1.0 && (!representable || p < 1.0);
            previous = p;
        }
    }
    bool loss = true;
    for (int N = 1; N <= 20; ++N) {
        for (int E = 6; E <= 60; ++E) {
            const double here = sustain::loss_probability_model(network(N, E, 5, 1));
            loss = loss && sustain::loss_probability_model(network(N, E + 1, 5, 1)) > here &&
                   sustain::loss_probability_model(network(N + 1, E, 5, 1)) < here;
        }
    }
    bool mu = true;
    double previous_mu = predict::scale_param(predict::OutgoingScale{0.001});
    for (double g = 0.002; g < 1.0; g += 0.001) {
        const double m = predict::scale_param(predict::OutgoingScale{g});
        mu = mu && m < previous_mu;
        previous_mu = m;
    }
    bool ei = true;
    double previous_ei = specfun::expint_ei(0.001);
    for (double x = 0.002; x <= 100.0; x *= 1.005) {
        const double v = specfun::expint_ei(x);
        ei = ei && v > previous_ei;
        previous_ei = v;
    }
    const auto flag = [](bool b) { return b ? "ok" : "VIOLATED"; };
    return {pc && loss && mu && ei, std::string("P_c ") + flag(pc) + ", P(E,N) " + flag(loss) + ", mu(gamma') " +
                                        flag(mu) + ", Ei " + flag(ei)};
}

Outcome key_hierarchy() {
    using namespace keychain;
    std::mt19937_64 rng(8);
    auto random_root = [&] {
        KeyMaterial root{};
        for (auto& b : root) {
            b = static_cast<std::uint8_t>(rng());
        }
        root[0] |= 1;
        return root;
    };
    const auto root = random_root();
    const bool deterministic = build_hierarchy(root) == build_hierarchy(root);

    std::set<KeyMaterial> seen;
    std::size_t total = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto h = build_hierarchy(random_root());
        for (KeyLabel l : kAllLabels) {
            seen.insert(h.node(l).material);
            ++total;
        }
    }
    const bool unique = seen.size() == total;

    bool invalidation = true;
    bool replay = true;
    for (KeyLabel target : kAllLabels) {
        const auto h = build_hierarchy(root);
        for (auto mode : {SessionMode::long_range, SessionMode::short_range}) {
            const auto cred = issue_credential(h, mode, "peer");
            const auto session = establish_session(h, mode, cred, 3, 1.0);
            const auto refreshed = refresh_subtree(h, target, 2.0);
            const bool affected = is_descendant(session.passkey_label, target);
            invalidation = invalidation && verify_session(refreshed, session) == !affected;
            if (affected) {
                auto replayed = session;
                replayed.established_at = 3.0;
                replayed.epoch = refreshed.node(session.passkey_label).epoch;
                bool rejected = !verify_session(refreshed, replayed);
                try {
                    establish_session(refreshed, mode, cred, 3, 3.0);
                    rejected = false;
                } catch (const AuthenticationError&) {
                }
                replay = replay && rejected;
            }
        }
    }
    return {deterministic && unique && invalidation && replay,
            std::string("deterministic ") + (deterministic ? "yes" : "no") + ", " + std::to_string(seen.size()) + "/" +
                std::to_string(total) + " distinct keys, invalidation " + (invalidation ? "ok" : "VIOLATED") +
                ", replay rejected " + (replay ? "yes" : "no")};
}

Outcome decision_engine() {
    using namespace decision;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> any(-1e6, 1e6);
    std::uniform_real_distribution<double> low(-10.0, 2.0);
    bool forced = decide({1e9, -1e9, 2.0, 1.0}, {}).decision == Decision::reconfigure;
    for (int i = 0; i < 10000; ++i) {
        forced = forced && decide({any(rng), any(rng), low(rng), any(rng)}, {}).decision == Decision::reconfigure;
    }

    Thresholds th;
    th.sustainability = 5.0;
    const std::vector<TraceSample> trace = {{1, 10, 0}, {2, 8, 0}, {3, 6, 0}, {4, 4, 0}};
    const auto fs = failsafe_point(trace, th, true);
    const bool third = fs.failsafe_time.has_value() && *fs.failsafe_time == 3.0;

    const sustain::NetworkParams net;
    const sustain::TimeWindow w;
    const Thresholds defaults;
    bool single = check_constraints(net, w, 1.0, 10.0, defaults).ok();
    auto one = [&](const ConstraintReport& r, Constraint c) {
        return r.violations.size() == 1 && r.violations[0].constraint == c && !r.violations[0].detail.empty();
    };
    single = single && one(check_constraints(net, w, 0.0, 10.0, defaults), Constraint::min_key_updates);
    single = single && one(check_constraints(net, w, 1.0, 11.0, defaults), Constraint::vehicles_in_range);
    auto wide = net;
    wide.hop_inverse = 12;
    single = single && one(check_constraints(wide, w, 1.0, 10.0, defaults), Constraint::hop_pairs);
    auto equal = net;
    equal.hop_inverse = 10;
    single = single && one(check_constraints(equal, w, 1.0, 10.0, defaults), Constraint::hop_not_entities);
    auto late = w;
    late.key_use_time = 35.0;
    single = single && one(check_constraints(net, late, 1.0, 10.0, defaults), Constraint::key_use_time);

    return {forced && third && single,
            std::string("mu <= 2 forces reconfigure: ") + (forced ? "yes" : "no") + "; F_S = " +
                (fs.failsafe_time ? fmt("%g", *fs.failsafe_time) : std::string("none")) +
                "; one violation per negated clause: " + (single ? "yes" : "no")};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome reproducibility() {
    const auto root = fs::temp_directory_path() / ("v2xsec_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    const auto a = root / "a";
    const auto b = root / "b";
    std::ostringstream sink;
    const int ca = cli::run_command({"simulate", "--seed", "314", "--runs", "2", "--out", a.string()}, sink, sink);
    const int cb = cli::run_command({"simulate", "--seed", "314", "--runs", "2", "--out", b.string()}, sink, sink);
    int files = 0;
    bool identical = ca == 0 && cb == 0;
    if (identical) {
        for (const auto& entry : fs::directory_iterator(a)) {
            ++files;
            const auto twin = b / entry.path().filename();
            identical = identical && fs::exists(twin) && slurp(entry.path()) == slurp(twin) &&
                        !slurp(entry.path()).empty();
        }
    }
    fs::remove_all(root);
    return {identical && files == 8, std::to_string(files) + " CSV files compared byte for byte: " +
                                         (identical ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"closed-form window sustainability vs quadrature", closed_form_agreement},
        {"special functions", special_functions},
        {"tau integral", tau_integral},
        {"fail-safe table structure", table3_structure},
        {"Monte Carlo convergence", monte_carlo},
        {"proportionality invariants", proportionality},
        {"monotonicity suite", monotonicity},
        {"key hierarchy", key_hierarchy},
        {"decision engine", decision_engine},
        {"simulate reproducibility", reproducibility},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, check] : criteria) {
        ++index;
        Outcome outcome{false, ""};
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        failures += outcome.pass ? 0 : 1;
        std::printf("criterion %d %s: %s (%s)\n", index, outcome.pass ? "PASS" : "FAIL", name, outcome.detail.c_str());
    }
    std::printf("%d/%zu criteria pass\n", index - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
