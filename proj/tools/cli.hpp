#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace v2xsec::cli {

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "V2XSEC_CONFIG";

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_usage = 2 };

/// Runs one command line (without the program name). Returns the exit status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// One evaluated sweep point. A quantity that cannot be evaluated is NaN.
struct SweepRow {
    std::string param;
    double value;
    double sustainability;      // S_N over [t1, t2]
    double signaling;           // O_S
    double message_overhead;    // M_O from O_S and the modelled P
    double predicted_overhead;  // composed M_O prediction
    double connectivity;        // P_c at t2
    double mu;                  // outgoing-rate scale parameter
    double tau;
};

/// Evaluates the closed forms with `param` set to each value over `base`.
/// Throws ConfigError for an unknown parameter or an invalid value.
std::vector<SweepRow> run_sweep(const nlohmann::json& base, const std::string& param,
                                const std::vector<double>& values);

/// Columns: param,value,S_N,O_S,M_O,M_O_pred,P_c,mu,tau
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

struct Table3Case {
    std::string scenario;
    std::vector<double> mu;   // Q = 1..5, NaN where the table has no entry
    std::vector<double> tau;  // Q = 1..5, NaN where the table has no entry
};

/// Fail-safe duration fixtures, verbatim.
const std::vector<Table3Case>& table3_fixture();

struct Table3Check {
    int row;
    std::string check;
    double expected;
    double observed;
    double rel_dev;
    bool pass;
};

std::vector<Table3Check> table3_checks();

/// Columns: row,check,expected,observed,rel_dev,status
void write_table3_csv(const std::vector<Table3Check>& checks, std::ostream& out);

struct FailSafeRow {
    double timestamp;
    double failsafe_time;  // NaN when no prefix is safe
    double tau;
    double mu;
    double factor_score;
    double sustainability;
    double overhead;
    std::string decision;
    std::string rationale;
};

/// Simulates the scenario, scores every slot and runs the decision engine.
/// Every decision is appended to `log`.
std::vector<FailSafeRow> run_failsafe(const Config& config, decision::UtilityLog& log);

/// Columns: timestamp_s,F_S_s,tau,mu,G_f,S_N,M_O,decision,rationale
void write_failsafe_csv(const std::vector<FailSafeRow>& rows, std::ostream& out);

/// Runs `runs` seeds starting at `seed` and writes seed_<s>_{events,metrics,comparison,summary}.csv
/// into `dir`. Returns the files written, in seed order.
std::vector<std::filesystem::path> run_simulations(const Config& config, std::uint64_t seed, int runs,
                                                   const std::filesystem::path& dir);

}  // namespace v2xsec::cli
