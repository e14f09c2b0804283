#pragma once

#include "pdmdirac/analytic.hpp"
#include "pdmdirac/eigensolver.hpp"
#include "pdmdirac/errors.hpp"
#include "pdmdirac/profiles.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pdmdirac {

/// Exit statuses of the runner.
enum ExitStatus : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitComparison = 4 };

struct RunConfig {
    BuiltinModel model = BuiltinModel::CoshSquare;
    ParamMap params;
    std::string mode = "auto";  // auto | exact | approximate | constant-u
    std::size_t grid_n = 2000;  // intervals across the q-box
    TruncationPolicy truncation;
    int states = 5;
    double quad_tol = 1e-12;
    double eig_tol = 1e-8;
    double sc_tol = 1e-10;
    int max_iter = 100;
    double compare_tol = 1e-6;
    SVariant s_variant = SVariant::Verified;
    std::vector<std::string> outputs{"spectrum"};
    std::vector<double> bic_energies;
    std::string scan_param;
    double scan_min = 0.0;
    double scan_max = 0.0;
    int scan_steps = 0;
    std::string output_dir = "out";
    bool json = false;

    /// Effective key/value pairs after overrides, used for hashing.
    std::map<std::string, std::string> entries;

    bool wants(std::string_view artifact) const;
};

/// Documentation of every accepted key, one per line.
std::string config_keys_help();

/// Parses the flat `key = value` format (# starts a comment). Throws Error
/// with ErrorCode::Config for unknown keys or malformed values, and
/// InvalidParameter for values outside their range.
RunConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});

/// FNV-1a hash of the effective entries (output.dir excluded), as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Mode that `auto` resolves to for this configuration.
PotentialMode resolve_mode(const RunConfig& config, const ModelSpec& model);

struct RunRequest {
    std::string command;  // solve | scan | bic | report
    std::string config_path;
    std::optional<std::string> out_dir;
    bool strict = false;
    std::optional<std::string> mode;
    std::optional<int> states;
};

/// Executes one runner command, writing artifacts under the output directory
/// and human-readable text to `out` / diagnostics to `err`. Returns an
/// ExitStatus value.
int run_command(const RunRequest& request, std::ostream& out, std::ostream& err);

/// Maps an error code to the runner's exit status.
int exit_status_for(ErrorCode code);

}  // namespace pdmdirac
