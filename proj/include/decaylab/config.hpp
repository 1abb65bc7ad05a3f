#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decaylab/damping.hpp"
#include "decaylab/wave_sim.hpp"

namespace decaylab {

// Config files use a small TOML subset: [section] headers, `key = value`
// lines, numbers, booleans, "quoted strings" and # comments. Everything is
// flattened to dotted keys ("mesh.n") before typed conversion.

struct ConfigValue {
    std::string text;
    bool quoted = false;
    std::string origin;  // file:line or env var name, for error messages
};

using FlatConfig = std::map<std::string, ConfigValue>;

FlatConfig parse_config_text(std::string_view text, std::string_view origin = "<string>");
FlatConfig load_config_file(const std::filesystem::path& path);

/// DECAYLAB_ + key upper-cased with dots replaced by underscores.
std::string env_var_name(std::string_view key);

using EnvLookup = std::function<const char*(const char*)>;

/// Every known key may be overridden from the environment.
void apply_env_overrides(FlatConfig& cfg, const EnvLookup& lookup);

/// `key=value` with the value typed as in a config file (bare words are strings).
void apply_override(FlatConfig& cfg, std::string_view key, std::string_view value,
                    std::string_view origin);

const std::vector<std::string>& known_config_keys();

struct ProfileConfig {
    double x_lo = 0.0;
    double x_hi = 0.0;
    double amplitude = 0.0;
    /// b only: amplitude as a fraction of (1 - delta) / lambda^2.
    std::optional<double> amplitude_fraction;
    double smoothing = 0.0;
};

struct LawConfig {
    LawKind kind = LawKind::linear;
    std::optional<double> p;
    std::optional<double> gamma;
    std::optional<double> c;
};

DampingLaw make_law(const LawConfig& cfg);

struct OdeConfig {
    std::optional<double> eps0;  // defaults to the law's certified value
    double C1 = 1.0;
    double beta = 2.0;
    std::optional<double> phi0;  // defaults to the smallest admissible value times a margin
    double phi0_safety = 0.5;
    double r0 = 1.0;
    double C_T = 1.0;
    double delta = 0.5;
    double substep_fraction = 0.01;
};

struct VerifyConfig {
    std::optional<double> t_cal;
    double t_cal_fraction = 0.25;
    double margin = 0.1;
    std::optional<double> fit_t_a;
    std::optional<double> fit_t_b;
    std::optional<double> max_exponent;
    bool lower_bound = false;
    double T0_fraction = 0.25;
    bool x_diag = false;
    double k = 1.0;
    double k1 = 1.0;
};

struct RunConfig {
    double L = 1.0;
    std::size_t n = 200;
    ProfileConfig a{0.1, 0.4, 1.0, std::nullopt, 0.0};
    ProfileConfig b{0.5, 0.9, 0.0, std::nullopt, 0.0};
    LawConfig law;
    std::string init_u0 = "mode 1 1.0";
    std::string init_v0 = "mode 2 1.0";
    std::string init_u1;
    std::string init_v1;
    std::optional<double> dt;  // defaults to the mesh width
    double t_end = 100.0;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    int record_every = 10;
    OdeConfig ode;
    VerifyConfig verify;
    std::string output_dir = "out";

    double step() const;
    double calibration_time() const;
    SimConfig sim_config() const;
    InitialData initial_data() const;
};

/// Typed conversion plus cross-field validation. Throws ConfigError.
RunConfig build_run_config(const FlatConfig& flat);

/// "mode k amp; gauss center width amp; ..." (empty means zero).
FieldSpec parse_field_spec(std::string_view text);

/// Stable dotted-key dump of the resolved configuration.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg);

}  // namespace decaylab
