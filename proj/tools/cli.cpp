#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>

#include "v2xsec/csv.hpp"
#include "v2xsec/predict.hpp"
#include "v2xsec/sustain.hpp"

namespace v2xsec::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename F>
double guarded(F&& f) {
    try {
        return f();
    } catch (const Error&) {
        return kNaN;
    }
}

json read_overrides(const std::string& path) {
    std::string source = path;
    if (source.empty()) {
        if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') {
            source = env;
        }
    }
    if (source.empty()) {
        return json::object();
    }
    std::ifstream in(source);
    if (!in) {
        throw ConfigError("cannot open config '" + source + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    json overrides = parse_config_text(buffer.str(), source);
    try {
        resolve_config(overrides);
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return overrides;
}

/// Writes to `path`, or to `fallback` when the path is empty or "-".
template <typename Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& write) {
    if (path.empty() || path == "-") {
        write(fallback);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw Error("cannot write '" + path + "'");
    }
    write(file);
    if (!file) {
        throw Error("write failed for '" + path + "'");
    }
}

std::vector<double> range_values(const std::vector<double>& spec) {
    const double start = spec[0];
    const double stop = spec[1];
    const double step = spec[2];
    if (!(step > 0.0) || !(stop >= start)) {
        throw ConfigError("--range needs start <= stop and step > 0");
    }
    std::vector<double> out;
    const double slack = 1e-9 * step;
    for (long k = 0;; ++k) {
        const double v = start + static_cast<double>(k) * step;
        if (v > stop + slack) {
            break;
        }
        out.push_back(v);
    }
    return out;
}

predict::PredictionOptions prediction_options(const Config& c) {
    predict::PredictionOptions options;
    options.fixed_update_rate = c.alpha_prime;
    options.initial_overhead = c.scenario.thresholds.initial_overhead;
    return options;
}

std::vector<double> complements(const std::vector<double>& p) {
    std::vector<double> out;
    out.reserve(p.size());
    for (double v : p) {
        out.push_back(1.0 - v);
    }
    return out;
}

int severity(decision::Decision d) {
    switch (d) {
        case decision::Decision::continue_operation: return 0;
        case decision::Decision::update_keys: return 1;
        case decision::Decision::reconfigure: return 2;
    }
    return 0;
}

}  // namespace

std::vector<SweepRow> run_sweep(const json& base, const std::string& param, const std::vector<double>& values) {
    const auto& fields = sweepable_fields();
    if (std::find(fields.begin(), fields.end(), param) == fields.end()) {
        throw ConfigError("unknown sweep parameter '" + param + "'");
    }
    if (values.empty()) {
        throw ConfigError("sweep needs at least one value");
    }
    std::vector<Config> configs;
    for (double v : values) {
        if (is_integer_field(param) && v != std::floor(v)) {
            throw ConfigError("parameter '" + param + "' takes integers, got " + csv::number(v));
        }
        json overrides = base;
        if (is_integer_field(param)) {
            overrides[param] = static_cast<long long>(v);
        } else {
            overrides[param] = v;
        }
        configs.push_back(resolve_config(overrides));
    }

    auto evaluate = [&param](const Config& c, double value) {
        const auto& s = c.scenario;
        SweepRow row{param, value, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
        row.sustainability = guarded([&] { return sustain::sustainability_window(s.rates, s.net, s.window); });
        row.signaling = guarded([&] {
            return sustain::signaling_overhead(s.thresholds.initial_overhead, c.fixed_update_rate(), s.net,
                                               s.window)
                .value;
        });
        row.message_overhead = guarded([&] {
            return sustain::message_overhead(row.signaling, sustain::loss_probability_model(s.net),
                                             s.net.entities);
        });
        row.predicted_overhead = guarded([&] {
            return predict::predicted_message_overhead(s.rates, s.net, s.window, s.range, prediction_options(c))
                .composed;
        });
        row.connectivity =
            guarded([&] { return predict::connectivity_prob(s.net, s.rates.outgoing_rate, s.window.t2); });
        row.mu = guarded([&] { return predict::scale_param(predict::OutgoingScale{s.rates.outgoing_rate}); });
        row.tau = guarded([&] { return predict::failsafe_likelihood(row.mu, c.bounds, s.window.horizon).tau; });
        return row;
    };

    std::vector<std::future<SweepRow>> pending;
    pending.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        pending.push_back(std::async(std::launch::async, evaluate, std::cref(configs[i]), values[i]));
    }
    std::vector<SweepRow> rows;
    rows.reserve(pending.size());
    for (auto& f : pending) {
        rows.push_back(f.get());
    }
    return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "param,value,S_N,O_S,M_O,M_O_pred,P_c,mu,tau\n";
    for (const auto& r : rows) {
        out << csv::text(r.param) << ',' << csv::number(r.value) << ',' << csv::number(r.sustainability) << ','
            << csv::number(r.signaling) << ',' << csv::number(r.message_overhead) << ','
            << csv::number(r.predicted_overhead) << ',' << csv::number(r.connectivity) << ','
            << csv::number(r.mu) << ',' << csv::number(r.tau) << '\n';
    }
}

const std::vector<Table3Case>& table3_fixture() {
    static const std::vector<Table3Case> rows = {
        {"optimistic", {659.08, 329.54, 219.68, 164.76, 131.80}, {kNaN, kNaN, 4.39e215, 5.3e160, 5.9e127}},
        {"optimistic", {311.20, 155.60, 103.73, 77.79, 62.23}, {kNaN, 3.65e151, 4.92e99, 5.8e73, 1.61e58}},
        {"optimistic", {194.69, 97.35, 64.89, 48.67, 38.93}, {4.51e190, 2.056e93, 7.326e60, 4.43e44, 8.24e34}},
        {"optimistic", {135.94, 67.97, 45.31, 33.98, 27.19}, {8.03e131, 8.736e63, 1.943e41, 9.28e29, 1.5e23}},
        {"feasible", {100.18, 50.09, 33.39, 25.04, 20.03}, {1.41e96, 1.169e46, 2.385e29, 1.09e21, 1.09e16}},
        {"feasible", {75.79, 37.89, 25.26, 18.95, 15.16}, {5.70e71, 7.496e33, 1.797e21, 8.96e14, 1.5e11}},
        {"feasible", {57.68, 28.84, 19.22, 14.42, 11.53}, {4.47e53, 6.734e24, 1.701e15, 2.77e10, 37629917}},
        {"feasible", {43.15, 21.57, 14.38, 10.79, 8.63}, {1.34e39, 3.75e17, 2.54e10, 6816294, 50296.62}},
        {"feasible", {30.16, 15.08, 10.05, 7.54, 6.03}, {1.40e26, 1.257e11, 1279251.7, 4280.43, 146.0569}},
        {"feasible", {kNaN, kNaN, kNaN, kNaN, 2}, {kNaN, kNaN, kNaN, kNaN, 0}},
        {"feasible", {kNaN, kNaN, kNaN, kNaN, 1}, {kNaN, kNaN, kNaN, kNaN, 0}},
    };
    return rows;
}

std::vector<Table3Check> table3_checks() {
    std::vector<Table3Check> checks;
    const auto& rows = table3_fixture();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int row = static_cast<int>(i) + 1;
        const auto& mu = rows[i].mu;
        const auto& tau = rows[i].tau;
        if (std::isfinite(mu[0])) {
            for (std::size_t q = 1; q < mu.size(); ++q) {
                const double observed = mu[q] * static_cast<double>(q + 1);
                const double dev = sim::relative_deviation(observed, mu[0]);
                checks.push_back({row, "mu(Q=" + std::to_string(q + 1) + ")*" + std::to_string(q + 1) + " = mu(Q=1)",
                                  mu[0], observed, dev, dev <= 1e-3});
            }
        }
        std::vector<std::size_t> numeric;
        for (std::size_t q = 0; q < tau.size(); ++q) {
            if (std::isfinite(tau[q]) && std::isfinite(mu[q]) && mu[q] > 2.0) {
                numeric.push_back(q);
            }
        }
        for (std::size_t k = 1; k < numeric.size(); ++k) {
            const std::size_t a = numeric[k - 1];
            const std::size_t b = numeric[k];
            checks.push_back({row,
                              "tau(Q=" + std::to_string(b + 1) + ") < tau(Q=" + std::to_string(a + 1) + ")",
                              tau[a], tau[b], kNaN, tau[b] < tau[a]});
        }
        for (std::size_t q = 0; q < mu.size(); ++q) {
            if (std::isfinite(mu[q]) && mu[q] <= 2.0) {
                const double computed = predict::failsafe_likelihood(mu[q], {}, 110.0).tau;
                checks.push_back({row, "tau = 0 at mu = " + csv::number(mu[q]), tau[q], computed, kNaN,
                                  tau[q] == 0.0 && computed == 0.0});
            }
        }
    }
    return checks;
}

void write_table3_csv(const std::vector<Table3Check>& checks, std::ostream& out) {
    out << "row,check,expected,observed,rel_dev,status\n";
    for (const auto& c : checks) {
        out << c.row << ',' << csv::text(c.check) << ',' << csv::number(c.expected) << ','
            << csv::number(c.observed) << ',' << csv::number(c.rel_dev) << ',' << (c.pass ? "PASS" : "FAIL")
            << '\n';
    }
}

std::vector<FailSafeRow> run_failsafe(const Config& config, decision::UtilityLog& log) {
    const auto& scenario = config.scenario;
    const sim::SimTrace trace = sim::run_simulation(scenario);
    const double score = decision::factor_score(config.factors);
    const auto compliance = complements(config.omega_x);

    std::vector<decision::TraceSample> samples;
    std::vector<double> finite_sustainability;
    std::vector<FailSafeRow> rows;
    for (const auto& slot : trace.slots) {
        samples.push_back({slot.t, slot.sustainability, slot.message_overhead});
        if (std::isfinite(slot.sustainability)) {
            finite_sustainability.push_back(slot.sustainability);
        }
        const double mu = guarded([&] {
            if (finite_sustainability.empty()) {
                return predict::scale_param(predict::OutgoingScale{scenario.rates.outgoing_rate});
            }
            return predict::scale_param(predict::SustainabilityScale{finite_sustainability, compliance});
        });
        const double tau =
            guarded([&] { return predict::failsafe_likelihood(mu, config.bounds, scenario.window.horizon).tau; });

        const auto point = decision::failsafe_point(samples, scenario.thresholds, true);
        const auto verdict =
            decision::decide({slot.sustainability, slot.message_overhead, mu, score}, scenario.thresholds);
        const auto chosen = severity(point.decision) > severity(verdict.decision) ? point.decision
                                                                                   : verdict.decision;
        rows.push_back({slot.t, point.failsafe_time.value_or(kNaN), tau, mu, score, slot.sustainability,
                        slot.message_overhead, std::string(decision::to_string(chosen)),
                        verdict.rationale + "; " + point.rationale});
        log.append({slot.t, slot.sustainability, slot.message_overhead, mu, score, chosen});
    }
    return rows;
}

void write_failsafe_csv(const std::vector<FailSafeRow>& rows, std::ostream& out) {
    out << "timestamp_s,F_S_s,tau,mu,G_f,S_N,M_O,decision,rationale\n";
    for (const auto& r : rows) {
        out << csv::number(r.timestamp) << ',' << csv::number(r.failsafe_time) << ',' << csv::number(r.tau)
            << ',' << csv::number(r.mu) << ',' << csv::number(r.factor_score) << ','
            << csv::number(r.sustainability) << ',' << csv::number(r.overhead) << ',' << r.decision << ','
            << csv::text(r.rationale) << '\n';
    }
}

std::vector<std::filesystem::path> run_simulations(const Config& config, std::uint64_t seed, int runs,
                                                   const std::filesystem::path& dir) {
    if (runs < 1) {
        throw ConfigError("--runs must be at least 1");
    }
    struct Output {
        std::uint64_t seed;
        std::string events, metrics, comparison, summary;
    };
    auto one = [&config](std::uint64_t s) {
        sim::Scenario scenario = config.scenario;
        scenario.seed = s;
        const auto trace = sim::run_simulation(scenario);
        const auto report = sim::compare_to_model(trace, scenario);
        std::ostringstream events, metrics, comparison, summary;
        sim::write_events_csv(trace, events);
        sim::write_metrics_csv(trace, metrics);
        sim::write_comparison_csv(report, comparison);
        sim::write_summary_csv(trace, report, summary);
        return Output{s, events.str(), metrics.str(), comparison.str(), summary.str()};
    };

    std::vector<std::future<Output>> pending;
    for (int r = 0; r < runs; ++r) {
        pending.push_back(std::async(std::launch::async, one, seed + static_cast<std::uint64_t>(r)));
    }
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (auto& f : pending) {
        const Output o = f.get();
        const std::string stem = "seed_" + std::to_string(o.seed) + "_";
        const std::pair<const char*, const std::string*> files[] = {
            {"events.csv", &o.events},
            {"metrics.csv", &o.metrics},
            {"comparison.csv", &o.comparison},
            {"summary.csv", &o.summary},
        };
        for (const auto& [name, body] : files) {
            const auto path = dir / (stem + name);
            emit(path.string(), std::cout, [&](std::ostream& out) { out << *body; });
            written.push_back(path);
        }
    }
    return written;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sustainability, overhead and fail-safe analysis for V2X key management", "v2xsec"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;

    auto* validate = app.add_subcommand("validate", "Check the operating constraints of a scenario");
    validate->add_option("config", config_path, "Scenario JSON (default: $V2XSEC_CONFIG or built-in)");

    std::string param;
    std::vector<double> values;
    std::vector<double> range;
    auto* sweep = app.add_subcommand("sweep", "Evaluate the closed forms across one parameter");
    sweep->add_option("config", config_path, "Scenario JSON");
    sweep->add_option("--param", param, "Parameter to sweep")->required();
    auto* values_opt = sweep->add_option("--values", values, "Comma-separated values")->delimiter(',');
    auto* range_opt = sweep->add_option("--range", range, "start stop step")->expected(3);
    values_opt->excludes(range_opt);
    sweep->add_option("--out", out_path, "Output CSV (default: stdout)");

    std::uint64_t seed = 0;
    int runs = 1;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo runs with model comparison");
    simulate->add_option("config", config_path, "Scenario JSON");
    auto* seed_opt = simulate->add_option("--seed", seed, "First seed (default: config seed)");
    simulate->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
    simulate->add_option("--out", out_path, "Output directory")->required();

    auto* table3 = app.add_subcommand("table3", "Structural checks on the fail-safe duration fixtures");
    table3->add_option("--out", out_path, "Output CSV (default: stdout)");

    std::string log_path;
    auto* failsafe = app.add_subcommand("failsafe", "Simulate, score and decide at every slot");
    failsafe->add_option("config", config_path, "Scenario JSON");
    failsafe->add_option("--out", out_path, "Output CSV (default: stdout)");
    failsafe->add_option("--log", log_path, "Utility log CSV");

    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("v2xsec");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : storage) {
        argv.push_back(a.data());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return exit_usage;
    }

    try {
        if (*table3) {
            const auto checks = table3_checks();
            emit(out_path, out, [&](std::ostream& o) { write_table3_csv(checks, o); });
            const auto failed = std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; });
            err << "table3: " << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size()
                << " checks pass\n";
            return failed == 0 ? exit_ok : exit_check_failed;
        }

        const json overrides = read_overrides(config_path);
        const Config config = resolve_config(overrides);

        if (*validate) {
            const auto& s = config.scenario;
            try {
                s.validate();
            } catch (const Error& e) {
                err << "invalid scenario: " << e.what() << '\n';
                return exit_check_failed;
            }
            const auto report = decision::check_constraints(s.net, s.window, config.key_updates,
                                                            config.vehicles_in_range, s.thresholds);
            for (const auto& v : report.violations) {
                out << "violation: " << decision::to_string(v.constraint) << " (" << v.detail << ")\n";
            }
            out << "t' - t_u slack: " << csv::number(report.hold_slack) << " s\n";
            if (!report.ok()) {
                return exit_check_failed;
            }
            out << "ok: all constraints hold\n";
            return exit_ok;
        }

        if (*sweep) {
            std::vector<double> points = range.empty() ? values : range_values(range);
            if (points.empty()) {
                err << "sweep: give --values or --range\n";
                return exit_usage;
            }
            const auto rows = run_sweep(overrides, param, points);
            emit(out_path, out, [&](std::ostream& o) { write_sweep_csv(rows, o); });
            return exit_ok;
        }

        if (*simulate) {
            const std::uint64_t first = seed_opt->count() > 0 ? seed : config.scenario.seed;
            const auto files = run_simulations(config, first, runs, out_path);
            for (const auto& f : files) {
                out << f.string() << '\n';
            }
            return exit_ok;
        }

        if (*failsafe) {
            decision::UtilityLog log;
            const auto rows = run_failsafe(config, log);
            emit(out_path, out, [&](std::ostream& o) { write_failsafe_csv(rows, o); });
            if (!log_path.empty()) {
                emit(log_path, out, [&](std::ostream& o) { log.write_csv(o); });
            }
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_check_failed;
    }
    return exit_usage;
}

}  // namespace v2xsec::cli
