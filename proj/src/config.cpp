#include "decaylab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "decaylab/errors.hpp"
#include "decaylab/mesh_field.hpp"

namespace decaylab {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string where(std::string_view origin, std::size_t line) {
    std::ostringstream os;
    os << origin << ":" << line;
    return os.str();
}

bool valid_key(std::string_view k) {
    if (k.empty()) return false;
    return std::all_of(k.begin(), k.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    });
}

// Strips a trailing comment that is not inside quotes.
std::string_view strip_comment(std::string_view line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

ConfigValue parse_value(std::string_view raw, const std::string& origin) {
    raw = trim(raw);
    if (raw.empty()) throw ConfigError(origin + ": missing value");
    ConfigValue v;
    v.origin = origin;
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"') throw ConfigError(origin + ": unterminated string");
        v.text = std::string(raw.substr(1, raw.size() - 2));
        if (v.text.find('"') != std::string::npos) throw ConfigError(origin + ": embedded quote in string");
        v.quoted = true;
    } else {
        v.text = std::string(raw);
    }
    return v;
}

const std::set<std::string> kStringKeys = {"law.kind", "init.u0", "init.v0", "init.u1", "init.v1",
                                           "output.dir"};

class Reader {
public:
    explicit Reader(const FlatConfig& flat) : flat_(flat) {}

    std::optional<double> number(const std::string& key) {
        const ConfigValue* v = find(key);
        if (!v) return std::nullopt;
        if (v->quoted) throw ConfigError(v->origin + ": " + key + " expects a number");
        const char* begin = v->text.c_str();
        char* end = nullptr;
        errno = 0;
        const double x = std::strtod(begin, &end);
        if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(x))
            throw ConfigError(v->origin + ": " + key + " = '" + v->text + "' is not a finite number");
        return x;
    }

    double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

    std::optional<long long> integer(const std::string& key) {
        const auto x = number(key);
        if (!x) return std::nullopt;
        if (std::floor(*x) != *x || std::abs(*x) > 1e15)
            throw ConfigError(find(key)->origin + ": " + key + " expects an integer");
        return static_cast<long long>(*x);
    }

    std::optional<bool> boolean(const std::string& key) {
        const ConfigValue* v = find(key);
        if (!v) return std::nullopt;
        if (!v->quoted && v->text == "true") return true;
        if (!v->quoted && v->text == "false") return false;
        throw ConfigError(v->origin + ": " + key + " expects true or false");
    }

    std::optional<std::string> string(const std::string& key) {
        const ConfigValue* v = find(key);
        if (!v) return std::nullopt;
        return v->text;
    }

private:
    const ConfigValue* find(const std::string& key) {
        const auto it = flat_.find(key);
        return it == flat_.end() ? nullptr : &it->second;
    }

    const FlatConfig& flat_;
};

void read_profile(Reader& r, const std::string& name, ProfileConfig& p) {
    p.x_lo = r.number(name + ".x_lo", p.x_lo);
    p.x_hi = r.number(name + ".x_hi", p.x_hi);
    p.amplitude = r.number(name + ".amplitude", p.amplitude);
    p.smoothing = r.number(name + ".smoothing", p.smoothing);
}

void check_profile(const ProfileConfig& p, const std::string& name, double L) {
    if (!(p.x_lo >= 0.0 && p.x_lo < p.x_hi && p.x_hi <= L))
        throw ConfigError(name + ": need 0 <= x_lo < x_hi <= mesh.L");
    if (!(p.amplitude >= 0.0)) throw ConfigError(name + ".amplitude must be >= 0");
    if (!(p.smoothing >= 0.0) || 2.0 * p.smoothing > p.x_hi - p.x_lo)
        throw ConfigError(name + ".smoothing must lie in [0, (x_hi - x_lo) / 2]");
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

FlatConfig parse_config_text(std::string_view text, std::string_view origin) {
    FlatConfig out;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string here = where(origin, line_no);
        const std::string_view line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(here + ": malformed section header");
            const std::string_view name = trim(line.substr(1, line.size() - 2));
            if (!valid_key(name)) throw ConfigError(here + ": bad section name");
            section = std::string(name);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(here + ": expected key = value");
        const std::string_view key = trim(line.substr(0, eq));
        if (!valid_key(key)) throw ConfigError(here + ": bad key '" + std::string(key) + "'");
        const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (out.count(full)) throw ConfigError(here + ": duplicate key " + full);
        out[full] = parse_value(line.substr(eq + 1), here);
    }
    return out;
}

FlatConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

std::string env_var_name(std::string_view key) {
    std::string out = "DECAYLAB_";
    for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void apply_env_overrides(FlatConfig& cfg, const EnvLookup& lookup) {
    for (const auto& key : known_config_keys()) {
        const std::string name = env_var_name(key);
        if (const char* v = lookup(name.c_str())) apply_override(cfg, key, v, name);
    }
}

void apply_override(FlatConfig& cfg, std::string_view key, std::string_view value,
                    std::string_view origin) {
    const std::string k(trim(key));
    if (!valid_key(k)) throw ConfigError(std::string(origin) + ": bad key '" + k + "'");
    cfg[k] = parse_value(value, std::string(origin));
}

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "mesh.L", "mesh.n",
        "a.x_lo", "a.x_hi", "a.amplitude", "a.smoothing",
        "b.x_lo", "b.x_hi", "b.amplitude", "b.amplitude_fraction", "b.smoothing",
        "law.kind", "law.p", "law.gamma", "law.c",
        "init.u0", "init.v0", "init.u1", "init.v1",
        "sim.dt", "sim.t_end", "sim.newton_tol", "sim.newton_max_iter", "sim.record_every",
        "ode.eps0", "ode.C1", "ode.beta", "ode.phi0", "ode.phi0_safety", "ode.r0", "ode.C_T",
        "ode.delta", "ode.substep_fraction",
        "verify.t_cal", "verify.t_cal_fraction", "verify.margin", "verify.fit_t_a",
        "verify.fit_t_b", "verify.max_exponent", "verify.lower_bound", "verify.T0_fraction",
        "verify.x_diag", "verify.k", "verify.k1",
        "output.dir",
    };
    return keys;
}

DampingLaw make_law(const LawConfig& cfg) {
    auto reject = [&](bool given, const char* what) {
        if (given) throw ConfigError(std::string("law.") + what + " is not used by law " + std::string(to_string(cfg.kind)));
    };
    switch (cfg.kind) {
    case LawKind::linear:
        reject(cfg.p.has_value(), "p");
        return make_linear(cfg.gamma.value_or(0.75), cfg.c.value_or(1.0));
    case LawKind::polynomial:
        reject(cfg.gamma.has_value(), "gamma");
        if (!cfg.p) throw ConfigError("law.p is required for the polynomial law");
        return make_polynomial(*cfg.p, cfg.c.value_or(1.0));
    case LawKind::log_weakened:
        return make_log_weakened(cfg.p.value_or(1.0), cfg.gamma.value_or(0.75), cfg.c.value_or(1.0));
    case LawKind::exp_origin:
    case LawKind::double_exp_origin:
        reject(cfg.p.has_value(), "p");
        reject(cfg.gamma.has_value(), "gamma");
        return cfg.kind == LawKind::exp_origin ? make_exp_origin(cfg.c.value_or(1.0))
                                               : make_double_exp_origin(cfg.c.value_or(1.0));
    case LawKind::quadratic_test:
        reject(cfg.p.has_value(), "p");
        reject(cfg.gamma.has_value(), "gamma");
        reject(cfg.c.has_value(), "c");
        return make_quadratic_test();
    }
    throw ConfigError("unknown damping law");
}

double RunConfig::step() const { return dt.value_or(L / static_cast<double>(n + 1)); }

double RunConfig::calibration_time() const { return verify.t_cal.value_or(verify.t_cal_fraction * t_end); }

SimConfig RunConfig::sim_config() const {
    SimConfig s;
    s.dt = step();
    s.t_end = t_end;
    s.newton_tol = newton_tol;
    s.newton_max_iter = newton_max_iter;
    s.record_every = record_every;
    return s;
}

InitialData RunConfig::initial_data() const {
    return InitialData{parse_field_spec(init_u0), parse_field_spec(init_v0), parse_field_spec(init_u1),
                       parse_field_spec(init_v1)};
}

FieldSpec parse_field_spec(std::string_view text) {
    FieldSpec spec;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t semi = text.find(';', pos);
        const std::string_view term =
            trim(text.substr(pos, semi == std::string_view::npos ? std::string_view::npos : semi - pos));
        pos = semi == std::string_view::npos ? text.size() + 1 : semi + 1;
        if (term.empty()) continue;
        std::istringstream is{std::string(term)};
        std::string kind;
        is >> kind;
        if (kind == "mode") {
            ModeTerm m;
            if (!(is >> m.k >> m.amplitude) || m.k < 1)
                throw ConfigError("bad mode term '" + std::string(term) + "' (expected: mode k amplitude)");
            spec.modes.push_back(m);
        } else if (kind == "gauss") {
            GaussTerm g;
            if (!(is >> g.center >> g.width >> g.amplitude) || !(g.width > 0.0))
                throw ConfigError("bad gauss term '" + std::string(term)
                                  + "' (expected: gauss center width amplitude)");
            spec.bumps.push_back(g);
        } else {
            throw ConfigError("unknown initial-data term '" + std::string(term) + "'");
        }
        std::string rest;
        if (is >> rest) throw ConfigError("trailing input in initial-data term '" + std::string(term) + "'");
    }
    return spec;
}

RunConfig build_run_config(const FlatConfig& flat) {
    const auto& keys = known_config_keys();
    for (const auto& [key, value] : flat) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError(value.origin + ": unknown key " + key);
        if (kStringKeys.count(key) == 0 && value.quoted)
            throw ConfigError(value.origin + ": " + key + " must not be a quoted string");
    }

    Reader r(flat);
    RunConfig c;
    c.L = r.number("mesh.L", c.L);
    if (const auto n = r.integer("mesh.n")) {
        if (*n < 2) throw ConfigError("mesh.n must be >= 2");
        c.n = static_cast<std::size_t>(*n);
    }
    read_profile(r, "a", c.a);
    read_profile(r, "b", c.b);
    c.b.amplitude_fraction = r.number("b.amplitude_fraction");
    if (c.b.amplitude_fraction && flat.count("b.amplitude"))
        throw ConfigError("give either b.amplitude or b.amplitude_fraction, not both");

    if (const auto kind = r.string("law.kind")) {
        const auto parsed = parse_law_kind(*kind);
        if (!parsed) throw ConfigError("unknown law.kind '" + *kind + "'");
        c.law.kind = *parsed;
    }
    c.law.p = r.number("law.p");
    c.law.gamma = r.number("law.gamma");
    c.law.c = r.number("law.c");

    c.init_u0 = r.string("init.u0").value_or(c.init_u0);
    c.init_v0 = r.string("init.v0").value_or(c.init_v0);
    c.init_u1 = r.string("init.u1").value_or(c.init_u1);
    c.init_v1 = r.string("init.v1").value_or(c.init_v1);

    c.dt = r.number("sim.dt");
    c.t_end = r.number("sim.t_end", c.t_end);
    c.newton_tol = r.number("sim.newton_tol", c.newton_tol);
    if (const auto v = r.integer("sim.newton_max_iter")) c.newton_max_iter = static_cast<int>(*v);
    if (const auto v = r.integer("sim.record_every")) c.record_every = static_cast<int>(*v);

    c.ode.eps0 = r.number("ode.eps0");
    c.ode.C1 = r.number("ode.C1", c.ode.C1);
    c.ode.beta = r.number("ode.beta", c.ode.beta);
    c.ode.phi0 = r.number("ode.phi0");
    c.ode.phi0_safety = r.number("ode.phi0_safety", c.ode.phi0_safety);
    c.ode.r0 = r.number("ode.r0", c.ode.r0);
    c.ode.C_T = r.number("ode.C_T", c.ode.C_T);
    c.ode.delta = r.number("ode.delta", c.ode.delta);
    c.ode.substep_fraction = r.number("ode.substep_fraction", c.ode.substep_fraction);

    c.verify.t_cal = r.number("verify.t_cal");
    c.verify.t_cal_fraction = r.number("verify.t_cal_fraction", c.verify.t_cal_fraction);
    c.verify.margin = r.number("verify.margin", c.verify.margin);
    c.verify.fit_t_a = r.number("verify.fit_t_a");
    c.verify.fit_t_b = r.number("verify.fit_t_b");
    c.verify.max_exponent = r.number("verify.max_exponent");
    c.verify.lower_bound = r.boolean("verify.lower_bound").value_or(c.verify.lower_bound);
    c.verify.T0_fraction = r.number("verify.T0_fraction", c.verify.T0_fraction);
    c.verify.x_diag = r.boolean("verify.x_diag").value_or(c.verify.x_diag);
    c.verify.k = r.number("verify.k", c.verify.k);
    c.verify.k1 = r.number("verify.k1", c.verify.k1);

    c.output_dir = r.string("output.dir").value_or(c.output_dir);

    // Cross-field checks, all before any run starts.
    if (!(c.L > 0.0)) throw ConfigError("mesh.L must be positive");
    check_profile(c.a, "a", c.L);
    check_profile(c.b, "b", c.L);
    if (c.b.amplitude_fraction && !(*c.b.amplitude_fraction >= 0.0))
        throw ConfigError("b.amplitude_fraction must be >= 0");
    (void)make_law(c.law);
    (void)c.initial_data();
    validate(c.sim_config());
    if (!(c.t_end > 0.0)) throw ConfigError("sim.t_end must be positive");
    if (c.ode.eps0 && !(*c.ode.eps0 > 0.0)) throw ConfigError("ode.eps0 must be positive");
    if (!(c.ode.C1 > 0.0)) throw ConfigError("ode.C1 must be positive");
    if (!(c.ode.beta > 0.0)) throw ConfigError("ode.beta must be positive");
    if (c.ode.phi0 && !(*c.ode.phi0 > 0.0)) throw ConfigError("ode.phi0 must be positive");
    if (!(c.ode.phi0_safety > 0.0 && c.ode.phi0_safety < 1.0))
        throw ConfigError("ode.phi0_safety must lie in (0, 1)");
    if (!(c.ode.r0 > 0.0 && c.ode.r0 <= 1.0)) throw ConfigError("ode.r0 must lie in (0, 1]");
    if (!(c.ode.C_T > 0.0)) throw ConfigError("ode.C_T must be positive");
    if (!(c.ode.delta > 0.0 && c.ode.delta < 1.0)) throw ConfigError("ode.delta must lie in (0, 1)");
    if (!(c.ode.substep_fraction > 0.0)) throw ConfigError("ode.substep_fraction must be positive");
    const double t_cal = c.calibration_time();
    if (!(t_cal > 0.0 && t_cal < c.t_end)) throw ConfigError("calibration time must lie in (0, sim.t_end)");
    if (!(c.verify.margin >= 0.0)) throw ConfigError("verify.margin must be >= 0");
    const double fa = c.verify.fit_t_a.value_or(t_cal);
    const double fb = c.verify.fit_t_b.value_or(c.t_end);
    if (!(fa >= 0.0 && fa < fb && fb <= c.t_end))
        throw ConfigError("fit window must satisfy 0 <= fit_t_a < fit_t_b <= sim.t_end");
    if (!(c.verify.T0_fraction > 0.0 && c.verify.T0_fraction < 1.0))
        throw ConfigError("verify.T0_fraction must lie in (0, 1)");
    if (c.output_dir.empty()) throw ConfigError("output.dir must not be empty");
    return c;
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    auto num = [&](const char* k, double v) { out.emplace_back(k, fmt(v)); };
    auto opt = [&](const char* k, const std::optional<double>& v) { out.emplace_back(k, v ? fmt(*v) : ""); };
    num("mesh.L", c.L);
    out.emplace_back("mesh.n", std::to_string(c.n));
    num("a.x_lo", c.a.x_lo);
    num("a.x_hi", c.a.x_hi);
    num("a.amplitude", c.a.amplitude);
    num("a.smoothing", c.a.smoothing);
    num("b.x_lo", c.b.x_lo);
    num("b.x_hi", c.b.x_hi);
    num("b.amplitude", c.b.amplitude);
    opt("b.amplitude_fraction", c.b.amplitude_fraction);
    num("b.smoothing", c.b.smoothing);
    out.emplace_back("law.kind", std::string(to_string(c.law.kind)));
    opt("law.p", c.law.p);
    opt("law.gamma", c.law.gamma);
    opt("law.c", c.law.c);
    out.emplace_back("init.u0", c.init_u0);
    out.emplace_back("init.v0", c.init_v0);
    out.emplace_back("init.u1", c.init_u1);
    out.emplace_back("init.v1", c.init_v1);
    num("sim.dt", c.step());
    num("sim.t_end", c.t_end);
    num("sim.newton_tol", c.newton_tol);
    out.emplace_back("sim.newton_max_iter", std::to_string(c.newton_max_iter));
    out.emplace_back("sim.record_every", std::to_string(c.record_every));
    opt("ode.eps0", c.ode.eps0);
    num("ode.C1", c.ode.C1);
    num("ode.beta", c.ode.beta);
    opt("ode.phi0", c.ode.phi0);
    num("ode.phi0_safety", c.ode.phi0_safety);
    num("ode.r0", c.ode.r0);
    num("ode.C_T", c.ode.C_T);
    num("ode.delta", c.ode.delta);
    num("ode.substep_fraction", c.ode.substep_fraction);
    num("verify.t_cal", c.calibration_time());
    num("verify.margin", c.verify.margin);
    opt("verify.fit_t_a", c.verify.fit_t_a);
    opt("verify.fit_t_b", c.verify.fit_t_b);
    opt("verify.max_exponent", c.verify.max_exponent);
    out.emplace_back("verify.lower_bound", c.verify.lower_bound ? "true" : "false");
    num("verify.T0_fraction", c.verify.T0_fraction);
    out.emplace_back("verify.x_diag", c.verify.x_diag ? "true" : "false");
    num("verify.k", c.verify.k);
    num("verify.k1", c.verify.k1);
    out.emplace_back("output.dir", c.output_dir);
    return out;
}

}  // namespace decaylab
