#include "decaylab/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "decaylab/config.hpp"
#include "decaylab/decay_ode.hpp"
#include "decaylab/errors.hpp"
#include "decaylab/report.hpp"
#include "decaylab/verify.hpp"

namespace decaylab {

namespace {

namespace fs = std::filesystem;

struct LawFlags {
    std::string kind = "quadratic_test";
    std::optional<double> p, gamma, c;

    void attach(CLI::App* app) {
        app->add_option("--law", kind, "damping law")->capture_default_str();
        app->add_option("--p", p, "law exponent p");
        app->add_option("--gamma", gamma, "power majorant exponent");
        app->add_option("--c", c, "majorant scale");
    }

    DampingLaw build() const {
        const auto k = parse_law_kind(kind);
        if (!k) throw ConfigError("unknown law '" + kind + "'");
        return make_law(LawConfig{*k, p, gamma, c});
    }
};

RunConfig load_run_config(const std::string& path, const std::optional<std::string>& out_dir) {
    FlatConfig flat = load_config_file(path);
    apply_env_overrides(flat, [](const char* name) { return std::getenv(name); });
    if (out_dir) apply_override(flat, "output.dir", "\"" + *out_dir + "\"", "--out");
    return build_run_config(flat);
}

void print_verdicts(std::ostream& out, const ExperimentReport& rep) {
    for (const auto& v : rep.verdicts) {
        out << v.name << ": " << to_string(v.verdict) << " value=" << csv_number(v.value)
            << " threshold=" << csv_number(v.threshold);
        if (!v.detail.empty()) out << " (" << v.detail << ")";
        out << '\n';
    }
}

int cmd_simulate(const std::string& config, const std::optional<std::string>& out_dir, std::ostream& out) {
    const RunConfig cfg = load_run_config(config, out_dir);
    const BuiltSystem built = build_wave_system(cfg);
    const WaveState init = make_initial_state(built.system.mesh, cfg.initial_data());
    const SimResult sr = simulate(built.system, init, cfg.sim_config());
    const fs::path dir(cfg.output_dir);
    {
        auto os = open_output(dir / "energy.csv");
        write_energy_csv(os, sr.records, {}, {});
    }
    {
        auto os = open_output(dir / "plot.gp");
        write_plot_script(os, "energy.csv", false);
    }
    double residual = 0.0;
    const double e0 = sr.records.front().E_uv;
    for (const auto& r : sr.records) residual = std::max(residual, std::abs(r.E_uv - e0 + r.diss_cum));
    out << "steps = " << sr.steps << '\n'
        << "E0 = " << csv_number(e0) << '\n'
        << "E_final = " << csv_number(sr.records.back().E_uv) << '\n'
        << "identity_residual_max = " << csv_number(residual) << '\n'
        << "b_admissible = " << (built.admissibility.admissible ? "yes" : "no") << '\n'
        << "wrote " << (dir / "energy.csv").string() << '\n';
    return kExitOk;
}

int cmd_verify(const std::string& config, const std::optional<std::string>& out_dir, std::ostream& out) {
    const RunConfig cfg = load_run_config(config, out_dir);
    const ExperimentReport rep = run_experiment(cfg);
    write_experiment(cfg.output_dir, rep);
    print_verdicts(out, rep);
    out << "overall: " << (rep.exit_code() == 0 ? "PASS" : "FAIL") << '\n';
    return rep.exit_code();
}

struct DecayFlags {
    LawFlags law;
    double beta = 2.0;
    double phi0 = 1.0;
    double eps0 = 1.0;
    double C1 = 1.0;
    double r0 = 1.0;
    double m_a = 1.0;
    double t_end = 10.0;
    std::size_t intervals = 400;
    std::optional<double> alpha, k0;
    double psi0 = 1.0;
    double a_inf = 1.0;
    int audit_intervals = 20000;
    std::string out = "out";
};

int cmd_decay(const DecayFlags& f, std::ostream& out) {
    const DampingLaw law = f.law.build();
    if (!(f.t_end > 0.0)) throw ConfigError("--t-end must be positive");
    if (!(f.m_a > 0.0)) throw ConfigError("--m-a must be positive");
    PhiParams pp{f.eps0, f.C1, f.beta, f.phi0, f.r0};
    if (std::pow(f.phi0, -f.beta) > f.r0) throw ConfigError("phi0^(-beta) exceeds r0");
    const std::vector<double> grid = uniform_grid(f.t_end, f.intervals);
    const Trajectory phi = solve_phi(pp, law, f.m_a, grid);
    const double theta0 = 1.0 / f.phi0;
    const Trajectory theta = solve_theta(pp, law, f.m_a, theta0, grid);
    const Trajectory psi = solve_psi(f.a_inf, law, f.psi0, grid);

    BoundParams bp;
    bp.alpha = f.alpha.value_or(lemma_alpha(law));
    bp.beta = f.beta;
    bp.C = pp.rate();
    const auto window = k0_window(bp, law, f.m_a, f.r0, theta0);
    bp.k0 = f.k0.value_or(window.second);
    if (bp.k0 < window.first * (1.0 - 1e-12) || bp.k0 > window.second * (1.0 + 1e-12))
        throw ConfigError("--k0 outside the admissible window [" + csv_number(window.first) + ", "
                          + csv_number(window.second) + "]");
    std::vector<double> bound(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) bound[i] = theta_bound(grid[i], bp, law, f.m_a, f.r0);

    const fs::path dir(f.out);
    {
        auto os = open_output(dir / "decay.csv");
        write_decay_csv(os, grid, phi.values, theta.values, bound, psi.values);
    }
    bool ok = phi.shape_ok && theta.shape_ok && psi.shape_ok;
    out << "phi(t_end) = " << csv_number(phi.values.back()) << '\n'
        << "theta(t_end) = " << csv_number(theta.values.back()) << '\n'
        << "psi(t_end) = " << csv_number(psi.values.back()) << '\n'
        << "k0 = " << csv_number(bp.k0) << " window [" << csv_number(window.first) << ", "
        << csv_number(window.second) << "]\n";
    if (f.beta > 1.0) {
        const PhiAudit audit = phi_property_audit(pp, law, f.m_a, f.t_end, f.audit_intervals);
        auto os = open_output(dir / "audit.txt");
        write_audit(os, audit);
        write_audit(out, audit);
        ok = ok && audit.ok;
    } else {
        out << "audit = NOT-APPLICABLE (beta <= 1)\n";
    }
    out << "wrote " << (dir / "decay.csv").string() << '\n';
    return ok ? kExitOk : kExitVerdictFailed;
}

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

SweepAxis parse_axis(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=v1,v2,...");
    SweepAxis ax{spec.substr(0, eq), {}};
    std::size_t pos = eq + 1;
    while (pos <= spec.size()) {
        const auto comma = spec.find(',', pos);
        const std::string v = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (v.empty()) throw ConfigError("empty value in --param " + ax.key);
        ax.values.push_back(v);
        pos = comma == std::string::npos ? spec.size() + 1 : comma + 1;
    }
    return ax;
}

struct SweepPoint {
    std::vector<std::string> values;
    std::string status;
    int exit_code = 0;
    std::optional<ExperimentReport> report;
};

int cmd_sweep(const std::string& config, const std::vector<std::string>& params, unsigned workers,
              const std::optional<std::string>& out_dir, std::ostream& out, std::ostream& err) {
    FlatConfig base = load_config_file(config);
    apply_env_overrides(base, [](const char* name) { return std::getenv(name); });
    const fs::path root = out_dir ? fs::path(*out_dir) : fs::path(build_run_config(base).output_dir);

    std::vector<SweepAxis> axes;
    for (const auto& p : params) axes.push_back(parse_axis(p));
    std::vector<SweepPoint> points(1);
    for (const auto& ax : axes) {
        std::vector<SweepPoint> next;
        for (const auto& pt : points)
            for (const auto& v : ax.values) {
                SweepPoint q = pt;
                q.values.push_back(v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }

    auto dir_name = [](std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "point_%04zu", i);
        return std::string(buf);
    };

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    auto worker = [&]() {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            SweepPoint& pt = points[i];
            try {
                FlatConfig flat = base;
                for (std::size_t k = 0; k < axes.size(); ++k) apply_override(flat, axes[k].key, pt.values[k], "--param");
                apply_override(flat, "output.dir", "\"" + (root / dir_name(i)).string() + "\"", "sweep");
                const RunConfig cfg = build_run_config(flat);
                ExperimentReport rep = run_experiment(cfg);
                write_experiment(cfg.output_dir, rep);
                pt.exit_code = rep.exit_code();
                pt.status = pt.exit_code == 0 ? "pass" : "fail";
                pt.report = std::move(rep);
            } catch (const std::exception& e) {
                const bool config_error = dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e);
                pt.exit_code = config_error ? kExitConfigError : kExitVerdictFailed;
                pt.status = config_error ? "config_error" : "error";
                std::lock_guard lock(err_mutex);
                err << dir_name(i) << ": " << e.what() << '\n';
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(points.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    int code = kExitOk;
    auto os = open_output(root / "manifest.csv");
    os << "index,dir";
    for (const auto& ax : axes) os << ',' << ax.key;
    os << ",status,exit_code,C_cal,max_violation_upper,fitted_exponent\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        os << i << ',' << dir_name(i);
        for (const auto& v : pt.values) os << ',' << v;
        os << ',' << pt.status << ',' << pt.exit_code << ',';
        if (pt.report) {
            os << csv_number(pt.report->C_cal) << ',' << csv_number(pt.report->upper.max_violation) << ','
               << (pt.report->fitted_exponent ? csv_number(*pt.report->fitted_exponent) : "");
        } else {
            os << ",,";
        }
        os << '\n';
        code = std::max(code, pt.exit_code);
    }
    out << "points = " << points.size() << '\n' << "wrote " << (root / "manifest.csv").string() << '\n';
    return code;
}

int cmd_check_a2(const LawFlags& lf, double beta, double r0, double m_a, int samples, std::ostream& out) {
    const DampingLaw law = lf.build();
    const A2Report rep = check_A2(law, m_a, beta, r0, samples);
    write_a2_report(out, rep, beta, r0);
    return rep.verdict ? kExitOk : kExitVerdictFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"decaylab: coupled damped wave simulation and decay envelope checks"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::string config;
    std::optional<std::string> out_dir;

    auto* sim = app.add_subcommand("simulate", "run the wave solver and write energy.csv");
    sim->add_option("--config", config, "config file")->required();
    sim->add_option("--out", out_dir, "output directory (overrides output.dir)");

    auto* ver = app.add_subcommand("verify", "simulate, solve the decay ODE and check the envelopes");
    ver->add_option("--config", config, "config file")->required();
    ver->add_option("--out", out_dir, "output directory (overrides output.dir)");

    DecayFlags df;
    auto* dec = app.add_subcommand("decay-ode", "solve the phi, theta and psi ODEs and audit phi");
    df.law.attach(dec);
    dec->add_option("--beta", df.beta)->capture_default_str();
    dec->add_option("--phi0", df.phi0)->capture_default_str();
    dec->add_option("--eps0", df.eps0)->capture_default_str();
    dec->add_option("--C1", df.C1)->capture_default_str();
    dec->add_option("--r0", df.r0)->capture_default_str();
    dec->add_option("--m-a", df.m_a, "integral of the damping coefficient")->capture_default_str();
    dec->add_option("--t-end", df.t_end)->capture_default_str();
    dec->add_option("--intervals", df.intervals, "output grid intervals")->capture_default_str();
    dec->add_option("--alpha", df.alpha, "bound constant alpha (default: law value)");
    dec->add_option("--k0", df.k0, "bound shift (default: upper end of the window)");
    dec->add_option("--psi0", df.psi0)->capture_default_str();
    dec->add_option("--a-inf", df.a_inf, "sup of the damping coefficient")->capture_default_str();
    dec->add_option("--audit-intervals", df.audit_intervals)->capture_default_str();
    dec->add_option("--out", df.out, "output directory")->capture_default_str();

    LawFlags a2law;
    double a2_beta = 2.0, a2_r0 = 1.0, a2_m_a = 1.0;
    int a2_samples = 1000;
    auto* a2 = app.add_subcommand("check-a2", "check the convexity and limit conditions on h^{-1}");
    a2law.attach(a2);
    a2->add_option("--beta", a2_beta)->capture_default_str();
    a2->add_option("--r0", a2_r0)->capture_default_str();
    a2->add_option("--m-a", a2_m_a)->capture_default_str();
    a2->add_option("--samples", a2_samples)->capture_default_str();

    std::vector<std::string> sweep_params;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    auto* sw = app.add_subcommand("sweep", "run verify over a grid of config overrides");
    sw->add_option("--config", config, "base config file")->required();
    sw->add_option("--param", sweep_params, "key=v1,v2,... (repeatable)");
    sw->add_option("--workers", workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sw->add_option("--out", out_dir, "output root (overrides output.dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (*sim) return cmd_simulate(config, out_dir, out);
        if (*ver) return cmd_verify(config, out_dir, out);
        if (*dec) return cmd_decay(df, out);
        if (*a2) return cmd_check_a2(a2law, a2_beta, a2_r0, a2_m_a, a2_samples, out);
        if (*sw) return cmd_sweep(config, sweep_params, workers, out_dir, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitVerdictFailed;
    }
    return kExitConfigError;
}

}  // namespace decaylab
