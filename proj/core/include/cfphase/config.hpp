#pragma once

// Flat `key = value` run configuration. Lines starting with '#' (after
// optional whitespace) and trailing "# ..." comments are ignored. Lists are
// comma separated. Every problem in a document is reported, not just the
// first one.

#include "cfphase/solver.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cfphase {

struct BodyForceSpec {
    std::string kind = "zero"; ///< zero | constant | sine
    Vec3 vector = Vec3::Zero();
    double wavenumber = 1.0;

    BodyForce build(double a, double d) const;
};

struct RunConfig {
    ModelParams params;
    int cells = 200;
    SolverConfig solver;
    ProfileKind profile = ProfileKind::SmoothedStep;
    double amplitude = 1.0;
    double width = 0.25;
    BodyForceSpec body_force;
    std::string output_dir = "out";
    int emit_stride = 1;
    std::vector<double> kappas = {0.2, 0.1, 0.05, 0.025};
    std::vector<int> mms_levels = {100, 200, 400};
    double mms_amplitude = 1.0;
    /// Every recognised key with its effective value, in schema order.
    std::vector<std::pair<std::string, std::string>> echo;

    Grid grid() const { return Grid(params.a, params.d, cells); }
    ScalarField initial_data() const;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> messages);
    const std::vector<std::string>& messages() const { return messages_; }

private:
    std::vector<std::string> messages_;
};

/// Throws ConfigError listing every problem found.
RunConfig parse_config(std::string_view text);

/// Reads and parses a file. Throws std::ios_base::failure if unreadable.
RunConfig load_config(const std::filesystem::path& path);

/// Shortest text that reads back to the same double.
std::string format_number(double v);

/// Schema keys in documentation order.
const std::vector<std::string>& config_keys();

} // namespace cfphase
