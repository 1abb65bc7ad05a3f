#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "decaylab/decay_ode.hpp"
#include "decaylab/verify.hpp"
#include "decaylab/wave_sim.hpp"

namespace decaylab {

inline constexpr const char* kEnergyHeader = "t,E_uv,E_high,diss_cum,phi,envelope,X_diag";
inline constexpr const char* kDecayHeader = "t,phi,theta,theta_bound,psi";

/// %.17g, or an empty field for NaN.
std::string csv_number(double x);

/// `phi` and `envelope` may be empty (columns left blank).
void write_energy_csv(std::ostream& os, const std::vector<EnergyRecord>& records,
                      std::span<const double> phi, std::span<const double> envelope);

/// Columns other than t may be empty spans; NaN entries are written as blanks.
void write_decay_csv(std::ostream& os, std::span<const double> t, std::span<const double> phi,
                     std::span<const double> theta, std::span<const double> theta_bound,
                     std::span<const double> psi);

void write_verdicts_csv(std::ostream& os, const ExperimentReport& rep);
void write_summary(std::ostream& os, const ExperimentReport& rep);
void write_audit(std::ostream& os, const PhiAudit& audit);
void write_a2_report(std::ostream& os, const A2Report& rep, double beta, double r0);

/// gnuplot script plotting E_uv against the envelope on log-log axes.
void write_plot_script(std::ostream& os, const std::string& csv_name, bool with_envelope);

/// Writes energy.csv, decay.csv, verdicts.csv, summary.txt and plot.gp into `dir`.
void write_experiment(const std::filesystem::path& dir, const ExperimentReport& rep);

/// Opens `path` for writing, creating parent directories. Throws ConfigError.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace decaylab
