#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decaylab/config.hpp"
#include "decaylab/decay_ode.hpp"
#include "decaylab/mesh_field.hpp"
#include "decaylab/wave_sim.hpp"

namespace decaylab {

enum class Verdict { pass, fail, warning, not_applicable };

std::string_view to_string(Verdict v);

/// max over t <= t_cal of E(t) phi(t). Throws ConfigError on empty or
/// mismatched series, or when no sample lies at or before t_cal.
double calibrate_envelope(std::span<const double> t, std::span<const double> E,
                          std::span<const double> phi, double t_cal);

struct UpperCheck {
    bool pass = true;
    double max_violation = 0.0;  // max over t > t_cal of max(E phi / C_cal - 1, 0)
    double worst_t = 0.0;  // where E phi / C_cal is largest
    std::size_t samples = 0;
};

/// E(t) <= (1 + margin) C_cal / phi(t) for every t > t_cal.
UpperCheck check_upper_envelope(std::span<const double> t, std::span<const double> E,
                                std::span<const double> phi, double C_cal, double t_cal,
                                double margin);

/// Least-squares slope of log E against log(1 + t) over samples in [t_a, t_b].
/// Throws SolverError for nonpositive energies in the window or fewer than two samples.
double fit_exponent(std::span<const double> t, std::span<const double> E, double t_a, double t_b);

struct LowerCheck {
    bool pass = true;
    std::size_t violations = 0;
    double worst_ratio = 0.0;  // max over t >= T0 of bound / E
    double psi0 = 0.0;
};

/// E(t) >= (psi(t) / (4 sqrt(E_high0)))^2 for every t >= T0. `psi` is sampled
/// on the same times as E; entries before T0 are ignored.
LowerCheck check_lower_envelope(std::span<const double> t, std::span<const double> E,
                                std::span<const double> psi, double E_high0, double T0);

struct CriterionResult {
    std::string name;
    Verdict verdict = Verdict::not_applicable;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ExperimentReport {
    RunConfig config;
    DampingLaw law;
    Mesh1D mesh;
    double dt = 0.0;
    double m_a = 0.0;
    double a_inf = 0.0;
    AdmissibilityReport admissibility;
    PhiParams phi_params;
    std::optional<Phi0Admissibility> phi0_check;
    bool decay_applicable = false;

    std::vector<EnergyRecord> records;
    std::vector<double> phi;       // at record times, empty when not applicable
    std::vector<double> envelope;  // C_cal / phi
    std::vector<double> psi;       // at record times from T0 on, empty otherwise

    double t_cal = 0.0;
    double C_cal = 0.0;
    UpperCheck upper;
    std::optional<double> fitted_exponent;
    std::optional<LowerCheck> lower;
    double E0 = 0.0;
    double E_high0 = 0.0;
    double identity_residual_max = 0.0;  // max_n |E(t_n) - E(0) + diss_cum(t_n)|
    double step_residual_max = 0.0;
    double conservation_max = 0.0;       // max_n |E(t_n) - E(0)| / E(0)
    std::size_t coercivity_violations = 0;
    int newton_retries = 0;

    std::vector<CriterionResult> verdicts;

    /// 0 if every verdict is pass / warning / not applicable, 1 otherwise.
    int exit_code() const;
};

/// Mesh, profiles and law of a run. b.amplitude_fraction is resolved against
/// the discrete Poincare constant.
struct BuiltSystem {
    WaveSystem system;
    AdmissibilityReport admissibility;
};

BuiltSystem build_wave_system(const RunConfig& cfg);

/// Tolerance on the accumulated dissipation identity, relative to E(0).
inline constexpr double kIdentityTolerance = 1e-8;

/// Simulate, solve the decay ODEs and evaluate every check. Deterministic.
ExperimentReport run_experiment(const RunConfig& cfg);

}  // namespace decaylab
