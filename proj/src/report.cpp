#include "decaylab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "decaylab/errors.hpp"

namespace decaylab {

namespace {

std::string at(std::span<const double> v, std::size_t i) {
    return i < v.size() ? csv_number(v[i]) : std::string();
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

std::string csv_number(double x) {
    if (std::isnan(x)) return {};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + path.string());
    return os;
}

void write_energy_csv(std::ostream& os, const std::vector<EnergyRecord>& records,
                      std::span<const double> phi, std::span<const double> envelope) {
    os << kEnergyHeader << '\n';
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        os << csv_number(r.t) << ',' << csv_number(r.E_uv) << ',' << csv_number(r.E_high) << ','
           << csv_number(r.diss_cum) << ',' << at(phi, i) << ',' << at(envelope, i) << ','
           << (r.X_diag ? csv_number(*r.X_diag) : std::string()) << '\n';
    }
}

void write_decay_csv(std::ostream& os, std::span<const double> t, std::span<const double> phi,
                     std::span<const double> theta, std::span<const double> theta_bound,
                     std::span<const double> psi) {
    os << kDecayHeader << '\n';
    for (std::size_t i = 0; i < t.size(); ++i) {
        os << csv_number(t[i]) << ',' << at(phi, i) << ',' << at(theta, i) << ','
           << at(theta_bound, i) << ',' << at(psi, i) << '\n';
    }
}

void write_verdicts_csv(std::ostream& os, const ExperimentReport& rep) {
    os << "criterion,verdict,value,threshold,detail\n";
    for (const auto& v : rep.verdicts) {
        os << v.name << ',' << to_string(v.verdict) << ',' << csv_number(v.value) << ','
           << csv_number(v.threshold) << ',' << v.detail << '\n';
    }
}

void write_summary(std::ostream& os, const ExperimentReport& rep) {
    os << "# configuration\n";
    for (const auto& [k, v] : describe(rep.config)) os << k << " = " << v << '\n';
    os << "\n# derived\n";
    os << "mesh.h = " << csv_number(rep.mesh.h) << '\n';
    os << "dt = " << csv_number(rep.dt) << '\n';
    os << "lambda = " << csv_number(rep.admissibility.lambda) << '\n';
    os << "b_max = " << csv_number(rep.admissibility.b_max) << '\n';
    os << "b_threshold = " << csv_number(rep.admissibility.threshold) << '\n';
    os << "b_strict_admissible = " << yes_no(rep.admissibility.strict_admissible) << '\n';
    os << "m_a = " << csv_number(rep.m_a) << '\n';
    os << "a_inf = " << csv_number(rep.a_inf) << '\n';
    os << "law.m = " << csv_number(rep.law.m) << '\n';
    os << "law.M = " << csv_number(rep.law.M) << '\n';
    os << "law.eps0_certified = " << csv_number(rep.law.eps0) << '\n';
    os << "phi.eps0 = " << csv_number(rep.phi_params.eps0) << '\n';
    os << "phi.C1 = " << csv_number(rep.phi_params.C1) << '\n';
    os << "phi.C_T = " << csv_number(rep.config.ode.C_T) << '\n';
    os << "phi.beta = " << csv_number(rep.phi_params.beta) << '\n';
    os << "phi.phi0 = " << csv_number(rep.phi_params.phi0) << '\n';
    if (rep.phi0_check) {
        os << "phi0.lhs = " << csv_number(rep.phi0_check->lhs) << '\n';
        os << "phi0.rhs = " << csv_number(rep.phi0_check->rhs) << '\n';
    }
    os << "E0 = " << csv_number(rep.E0) << '\n';
    os << "E_high0 = " << csv_number(rep.E_high0) << '\n';
    os << "E_final = " << csv_number(rep.records.back().E_uv) << '\n';
    os << "identity_residual_max = " << csv_number(rep.identity_residual_max) << '\n';
    os << "step_residual_max = " << csv_number(rep.step_residual_max) << '\n';
    os << "newton_retries = " << rep.newton_retries << '\n';
    os << "t_cal = " << csv_number(rep.t_cal) << '\n';
    os << "C_cal = " << csv_number(rep.C_cal) << '\n';
    os << "max_violation_upper = " << csv_number(rep.upper.max_violation) << '\n';
    os << "fitted_exponent = " << (rep.fitted_exponent ? csv_number(*rep.fitted_exponent) : "") << '\n';
    if (rep.lower) {
        os << "lower.psi0 = " << csv_number(rep.lower->psi0) << '\n';
        os << "lower.worst_ratio = " << csv_number(rep.lower->worst_ratio) << '\n';
        os << "lower.violations = " << rep.lower->violations << '\n';
    }
    os << "\n# verdicts\n";
    for (const auto& v : rep.verdicts) {
        os << v.name << ": " << to_string(v.verdict);
        if (!v.detail.empty()) os << " (" << v.detail << ")";
        os << '\n';
    }
    os << "overall: " << (rep.exit_code() == 0 ? "PASS" : "FAIL") << '\n';
}

void write_audit(std::ostream& os, const PhiAudit& a) {
    os << "increasing = " << yes_no(a.increasing) << '\n';
    os << "concave = " << yes_no(a.concave) << '\n';
    os << "ratio_decreasing = " << yes_no(a.ratio_decreasing) << '\n';
    os << "alpha0 = " << csv_number(a.alpha0) << '\n';
    os << "phi_prime_start = " << csv_number(a.phi_prime_start) << '\n';
    os << "phi_prime_end = " << csv_number(a.phi_prime_end) << '\n';
    os << "phi_prime_limit = " << csv_number(a.phi_prime_limit) << '\n';
    os << "curvature_integral = " << csv_number(a.curvature_integral) << '\n';
    os << "curvature_target = " << csv_number(a.curvature_target) << '\n';
    os << "conjugate_budget = " << csv_number(a.conjugate_budget) << '\n';
    os << "budget_bound = " << csv_number(a.budget_bound) << '\n';
    os << "budget_ok = " << yes_no(a.budget_ok) << '\n';
    os << "audit = " << (a.ok ? "PASS" : "FAIL") << '\n';
}

void write_a2_report(std::ostream& os, const A2Report& r, double beta, double r0) {
    const char* status = r.alpha0.status == Alpha0Status::positive ? "positive"
                         : r.alpha0.status == Alpha0Status::zero   ? "zero (flagged)"
                                                                   : "divergent";
    os << "beta = " << csv_number(beta) << '\n';
    os << "r0 = " << csv_number(r0) << '\n';
    os << "alpha0 = " << csv_number(r.alpha0.value) << " [" << status
       << (r.alpha0.converged ? ", converged" : ", not converged") << "]\n";
    os << "limits_ok = " << yes_no(r.limits_ok) << " (worst " << csv_number(r.limits_worst) << ")\n";
    os << "convex_ok = " << yes_no(r.convex_ok) << '\n';
    os << "ineq2_ok = " << yes_no(r.ineq2_ok) << " (worst slack " << csv_number(r.ineq2_worst)
       << " at s=" << csv_number(r.ineq2_worst_at) << ")\n";
    os << "ineq3_ok = " << yes_no(r.ineq3_ok) << " (worst slack " << csv_number(r.ineq3_worst)
       << " at s=" << csv_number(r.ineq3_worst_at) << ")\n";
    os << "ratio_bounded = " << yes_no(r.ratio_bounded)
       << (r.ratio_applies ? "" : " (vacuous)") << " (max " << csv_number(r.ratio_max) << ")\n";
    os << "underflow_samples = " << r.underflow_samples << '\n';
    os << "verdict = " << (r.verdict ? "PASS" : "FAIL") << '\n';
}

void write_plot_script(std::ostream& os, const std::string& csv_name, bool with_envelope) {
    os << "set datafile separator ','\n"
          "set key autotitle columnhead\n"
          "set logscale xy\n"
          "set xlabel '1 + t'\n"
          "set ylabel 'energy'\n"
          "set terminal pngcairo size 900,600\n"
          "set output 'energy.png'\n";
    os << "plot '" << csv_name << "' using (1+$1):2 with lines title 'E_uv'";
    if (with_envelope) os << ", \\\n     '' using (1+$1):6 with lines dashtype 2 title 'C_cal / phi'";
    os << '\n';
}

void write_experiment(const std::filesystem::path& dir, const ExperimentReport& rep) {
    {
        auto os = open_output(dir / "energy.csv");
        write_energy_csv(os, rep.records, rep.phi, rep.envelope);
    }
    {
        std::vector<double> t(rep.records.size()), theta;
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = rep.records[i].t;
        for (double f : rep.phi) theta.push_back(1.0 / f);
        auto os = open_output(dir / "decay.csv");
        write_decay_csv(os, t, rep.phi, theta, {}, rep.psi);
    }
    {
        auto os = open_output(dir / "verdicts.csv");
        write_verdicts_csv(os, rep);
    }
    {
        auto os = open_output(dir / "summary.txt");
        write_summary(os, rep);
    }
    {
        auto os = open_output(dir / "plot.gp");
        write_plot_script(os, "energy.csv", !rep.envelope.empty());
    }
}

}  // namespace decaylab
