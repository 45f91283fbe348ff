#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snwave/config.hpp"
#include "snwave/types.hpp"

namespace snwave::io {

/// Malformed configuration input; the message carries the offending line.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full run configuration: flat key = value lines with dotted keys.
struct RunConfig {
    ProblemConfig problem;
    int ny = 32;
    int nt = 0;  ///< 0 resolves to the smallest CFL-stable step count
    double cfl = 0.5;
    double solver_tol = 1e-10;
    int solver_max_iter = 500;
    double picard_omega = 1.0;
    double leader_tol = 1e-6;
    int leader_max_iter = 200;
    int prox_max_iter = 5000;
    std::string astar_method = "picard";  ///< "picard" or "cg"
    std::string v2_spec = "zero";
    std::string v0_spec = "zero";  ///< leader target, or "from_forward_run"
    std::string v1_spec = "zero";
    std::string init_v0 = "zero";  ///< simulate initial data
    std::string init_v1 = "zero";
    std::string w1_spec = "zero";  ///< follower subcommand leader control
    std::uint64_t seed = 1;

    Grid grid() const;
    void set(const std::string& key, const std::string& value);
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Applies one "key=value" override string.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// The canonical echo: every key with its resolved value, one per line.
std::string serialize_config(const RunConfig& cfg);

/// Grid-function presets: "zero", "sine(m)", "bump(c,w)".
std::vector<double> make_grid_function(const std::string& spec, int ny);

/// Space-time presets: "zero", "constant(c)", "sine(m)",
/// "separable(m,omega)" = sin(m pi y) cos(omega t), "bump(c,w)", or
/// "file(path)" reading a t,y,value CSV.
SpaceTimeField make_field(const std::string& spec, const ProblemConfig& cfg, const Grid& grid);

/// Time-signal presets for controls: "zero", "sine(m)" = sin(m pi t / T),
/// "mix" = sin(pi t/T) + 0.5 sin(3 pi t/T).
TimeSignal make_signal(const std::string& spec, const ProblemConfig& cfg, const Grid& grid,
                       SigmaSupport support);

/// CSV writers; numbers carry 17 significant digits for lossless round trip.
void write_signal_csv(const std::string& path, const ProblemConfig& cfg, const Grid& grid,
                      const TimeSignal& s);
void write_field_csv(const std::string& path, const ProblemConfig& cfg, const Grid& grid,
                     const SpaceTimeField& f);
void write_grid_function_csv(const std::string& path, const Grid& grid,
                             const std::vector<double>& f);

SpaceTimeField read_field_csv(const std::string& path, const Grid& grid);

std::string format_double(double v);

}  // namespace snwave::io
