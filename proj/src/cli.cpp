#include "qsl/cli.hpp"

#include "qsl/ed.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

namespace qsl {

namespace {

std::string fmt_g(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string fmt9(double v) { return fmt_g(v, 9); }
std::string fmt17(double v) { return fmt_g(v, 17); }  // config dumps: lossless doubles

std::string field(const std::optional<double>& v) { return v ? fmt9(*v) : std::string{}; }

const char* model_name(Model m) {
    switch (m) {
        case Model::boson: return "boson";
        case Model::chain: return "chain";
        case Model::chain_exact: return "chain-exact";
    }
    return "?";
}

const char* bound_name(BoundSel b) {
    switch (b) {
        case BoundSel::mt: return "mt";
        case BoundSel::ml: return "ml";
        case BoundSel::both: return "both";
    }
    return "?";
}

const char* kind_name(ExtremumKind k) {
    switch (k) {
        case ExtremumKind::maximum: return "maximum";
        case ExtremumKind::minimum: return "minimum";
        case ExtremumKind::inflexion: return "inflexion";
    }
    return "?";
}

Model parse_model(const std::string& s) {
    if (s == "boson") return Model::boson;
    if (s == "chain") return Model::chain;
    if (s == "chain-exact") return Model::chain_exact;
    throw ConfigError("model: unknown value '" + s + "'");
}

BoundSel parse_bound(const std::string& s) {
    if (s == "mt") return BoundSel::mt;
    if (s == "ml") return BoundSel::ml;
    if (s == "both") return BoundSel::both;
    throw ConfigError("bound: unknown value '" + s + "' (expected mt, ml or both)");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct ConfigEntry {
    std::string section, key, value;
};

std::vector<ConfigEntry> parse_entries(const std::string& text) {
    std::vector<ConfigEntry> out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated [section]");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "run" && section != "boson" && section != "chain")
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        ConfigEntry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
        if (e.section.empty())
            throw ConfigError("config: key '" + e.key + "' appears before any [section]");
        if (e.key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        out.push_back(std::move(e));
    }
    return out;
}

double to_double(const ConfigEntry& e) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(e.value, &pos);
    } catch (...) {
        pos = std::string::npos;
    }
    if (pos != e.value.size())
        throw ConfigError("config: " + e.key + ": not a number: '" + e.value + "'");
    return v;
}

long long to_int(const ConfigEntry& e) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(e.value, &pos);
    } catch (...) {
        pos = std::string::npos;
    }
    if (pos != e.value.size())
        throw ConfigError("config: " + e.key + ": not an integer: '" + e.value + "'");
    return v;
}

bool to_bool(const ConfigEntry& e) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ConfigError("config: " + e.key + ": expected true or false");
}

std::vector<double> to_list(const ConfigEntry& e) {
    std::vector<double> out;
    std::string cur;
    std::istringstream in(e.value);
    while (std::getline(in, cur, ',')) {
        ConfigEntry item{e.section, e.key, trim(cur)};
        out.push_back(to_double(item));
    }
    if (out.empty()) throw ConfigError("config: " + e.key + ": empty list");
    return out;
}

// preset as baseline: replaces model/params/taus, keeps output/strictness
void merge_preset(RunConfig& cfg, const std::string& name) {
    RunConfig p = preset_config(name);
    p.out = cfg.out;
    p.strict = cfg.strict;
    p.rel_bound = cfg.rel_bound;
    cfg = std::move(p);
}

void apply_entry(RunConfig& cfg, const ConfigEntry& e) {
    if (e.section == "run") {
        if (e.key == "model") cfg.model = parse_model(e.value);
        else if (e.key == "bound") cfg.bound = parse_bound(e.value);
        else if (e.key == "tau") cfg.tau_list = to_list(e);
        else if (e.key == "tau_max") cfg.tau_max = to_double(e);
        else if (e.key == "tau_steps") cfg.tau_steps = static_cast<std::size_t>(to_int(e));
        else if (e.key == "dt") cfg.dt = to_double(e);
        else if (e.key == "out") cfg.out = e.value;
        else if (e.key == "strict") cfg.strict = to_bool(e);
        else if (e.key == "rel_bound") cfg.rel_bound = to_double(e);
        else throw ConfigError("config: unknown key 'run." + e.key + "'");
    } else if (e.section == "boson") {
        if (e.key == "A") cfg.drive.A = to_double(e);
        else if (e.key == "omega") cfg.drive.omega = to_double(e);
        else if (e.key == "V0") cfg.drive.V0 = to_double(e);
        else throw ConfigError("config: unknown key 'boson." + e.key + "'");
    } else {
        if (e.key == "N") cfg.chain.N = static_cast<int>(to_int(e));
        else if (e.key == "J") cfg.chain.J = to_double(e);
        else if (e.key == "gamma") cfg.chain.gamma = to_double(e);
        else if (e.key == "h0") cfg.chain.h0 = to_double(e);
        else if (e.key == "h1") cfg.chain.h1 = to_double(e);
        else if (e.key == "tauH") cfg.chain.tauH = to_double(e);
        else throw ConfigError("config: unknown key 'chain." + e.key + "'");
    }
}

std::size_t steps_for(const RunConfig& cfg, double tau) {
    if (!(cfg.dt > 0.0)) return 0;  // module default grid
    const auto n = static_cast<std::size_t>(std::ceil(tau / cfg.dt - 1e-9));
    return std::max<std::size_t>(2, n);
}

std::string canonical_params(const RunConfig& cfg) {
    std::ostringstream os;
    os << "model=" << model_name(cfg.model);
    if (cfg.model == Model::boson) {
        os << ",A=" << fmt9(cfg.drive.A) << ",omega=" << fmt9(cfg.drive.omega)
           << ",V0=" << fmt9(cfg.drive.V0);
    } else {
        os << ",N=" << cfg.chain.N << ",J=" << fmt9(cfg.chain.J)
           << ",gamma=" << fmt9(cfg.chain.gamma) << ",h0=" << fmt9(cfg.chain.h0)
           << ",h1=" << fmt9(cfg.chain.h1) << ",tauH=" << fmt9(cfg.chain.tauH);
    }
    os << ",bound=" << bound_name(cfg.bound);
    os << ",dt=" << (cfg.dt > 0.0 ? fmt9(cfg.dt) : std::string("default"));
    return os.str();
}

std::string header_line(const RunConfig& cfg) {
    return std::string("# qsl-lab v") + kVersion + " preset=" + cfg.preset +
           " params=" + canonical_params(cfg) + "\n";
}

// contract: every emitted row satisfies tau >= R for the valid fields
void check_row(const BoundReport& r) {
    const double lim = r.tau + 1e-9;
    if ((r.R_mt && *r.R_mt > lim) || (r.R_ml && *r.R_ml > lim))
        throw std::runtime_error("row at tau = " + fmt9(r.tau) + " violates tau >= R");
}

std::string report_row(const BoundReport& r, BoundSel bound) {
    const bool mt = bound != BoundSel::ml;
    const bool ml = bound != BoundSel::mt;
    std::string row = fmt9(r.tau);
    row += ',';
    row += fmt9(r.omega_abs);
    row += ',';
    row += fmt9(r.bures_angle);
    row += ',';
    if (mt) row += fmt9(r.dE_mt);
    row += ',';
    if (ml) row += field(r.dE_ml);
    row += ',';
    if (mt) row += field(r.R_mt);
    row += ',';
    if (ml) row += field(r.R_ml);
    row += '\n';
    return row;
}

}  // namespace

RunConfig preset_config(const std::string& name) {
    RunConfig c;
    if (name == "fig2") {
        c.model = Model::boson;
        c.drive = {1.0, 2.0, 0.475};
        c.tau_list = {50.0, 100.0, 150.0, 200.0};
    } else if (name == "fig3") {
        c.model = Model::boson;
        c.drive = {6.0, 4.0, 3.0};
        c.tau_list = {50.0, 100.0, 150.0, 200.0};
    } else if (name == "fig1") {
        c.model = Model::chain;
        c.chain = {100, 1.0, 0.2, 1.0, 1.0, 0.001};
        c.tau_list = {100.0};
    } else if (name == "table1") {
        c.model = Model::chain;
        c.chain = {100, 1.0, 0.1, 1.0, 1.0, 0.01};
        c.tau_list = {100.0};
    } else if (name == "compare") {
        c.model = Model::chain;
        c.chain = {8, 1.0, 0.2, 1.0, 1.0, 0.01};
        c.tau_list = {100.0};
    } else {
        throw ConfigError("preset: unknown name '" + name +
                          "' (expected fig1, fig2, fig3, table1 or compare)");
    }
    c.preset = name;
    return c;
}

std::vector<double> resolve_taus(const RunConfig& cfg) {
    if (!cfg.tau_list.empty()) return cfg.tau_list;
    if (cfg.tau_max > 0.0 && cfg.tau_steps > 0) {
        std::vector<double> taus(cfg.tau_steps);
        for (std::size_t j = 0; j < cfg.tau_steps; ++j)
            taus[j] = cfg.tau_max * static_cast<double>(j + 1) / static_cast<double>(cfg.tau_steps);
        return taus;
    }
    return {100.0};
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
    const std::vector<ConfigEntry> entries = parse_entries(text);
    std::string preset_name;
    for (const auto& e : entries) {
        if (e.section == "run" && e.key == "preset") {
            if (!preset_name.empty()) throw ConfigError("config: duplicate preset key");
            preset_name = e.value;
        }
    }
    if (!preset_name.empty()) merge_preset(cfg, preset_name);
    for (const auto& e : entries) {
        if (e.section == "run" && e.key == "preset") continue;
        apply_entry(cfg, e);
    }
}

std::string dump_config(const RunConfig& cfg) {
    std::ostringstream os;
    os << "[run]\n";
    os << "model = " << model_name(cfg.model) << "\n";
    if (cfg.preset != "custom") os << "preset = " << cfg.preset << "\n";
    if (!cfg.tau_list.empty()) {
        os << "tau = ";
        for (std::size_t i = 0; i < cfg.tau_list.size(); ++i)
            os << (i ? "," : "") << fmt17(cfg.tau_list[i]);
        os << "\n";
    }
    if (cfg.tau_max > 0.0) os << "tau_max = " << fmt17(cfg.tau_max) << "\n";
    if (cfg.tau_steps > 0) os << "tau_steps = " << cfg.tau_steps << "\n";
    os << "bound = " << bound_name(cfg.bound) << "\n";
    if (cfg.dt > 0.0) os << "dt = " << fmt17(cfg.dt) << "\n";
    if (!cfg.out.empty()) os << "out = " << cfg.out << "\n";
    os << "strict = " << (cfg.strict ? "true" : "false") << "\n";
    os << "rel_bound = " << fmt17(cfg.rel_bound) << "\n";
    os << "[boson]\n";
    os << "A = " << fmt17(cfg.drive.A) << "\n";
    os << "omega = " << fmt17(cfg.drive.omega) << "\n";
    os << "V0 = " << fmt17(cfg.drive.V0) << "\n";
    os << "[chain]\n";
    os << "N = " << cfg.chain.N << "\n";
    os << "J = " << fmt17(cfg.chain.J) << "\n";
    os << "gamma = " << fmt17(cfg.chain.gamma) << "\n";
    os << "h0 = " << fmt17(cfg.chain.h0) << "\n";
    os << "h1 = " << fmt17(cfg.chain.h1) << "\n";
    os << "tauH = " << fmt17(cfg.chain.tauH) << "\n";
    return os.str();
}

void validate_config(const RunConfig& cfg) {
    const std::vector<double> taus = resolve_taus(cfg);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0)) throw ConfigError("tau: values must be > 0");
        if (i > 0 && !(taus[i] > taus[i - 1]))
            throw ConfigError("tau: values must be strictly increasing");
    }
    if (cfg.tau_list.empty() && (cfg.tau_max > 0.0) != (cfg.tau_steps > 0))
        throw ConfigError("tau_max and tau_steps must be given together");
    if (cfg.dt < 0.0) throw ConfigError("dt: must be >= 0");
    if (!(cfg.rel_bound > 0.0)) throw ConfigError("rel_bound: must be > 0");
    if (cfg.model == Model::boson) {
        if (!(cfg.drive.A > 0.0)) throw ConfigError("A: level spacing must be > 0");
        if (cfg.drive.V0 < 0.0) throw ConfigError("V0: coupling must be >= 0");
    } else {
        const ChainParams& p = cfg.chain;
        if (p.gamma < 0.0 || p.gamma > 1.0)
            throw ConfigError("gamma = " + fmt9(p.gamma) +
                              ": anisotropy must lie in the interval [0,1]");
        if (!(p.tauH > 0.0)) throw ConfigError("tauH: decay time must be > 0");
        if (cfg.model == Model::chain) {
            if (p.N < 4 || p.N % 2 != 0) throw ConfigError("N: must be even and >= 4");
        } else {
            if (p.N < 2 || p.N > 12 || p.N % 2 != 0)
                throw ConfigError("N: must be even and within [2, 12] for exact runs");
        }
    }
}

unsigned env_threads() {
    const char* e = std::getenv("QSL_THREADS");
    if (!e || !*e) return 0;
    char* end = nullptr;
    const unsigned long v = std::strtoul(e, &end, 10);
    if (end == e || *end) return 0;
    return static_cast<unsigned>(std::min<unsigned long>(v, 256));
}

std::string run_csv(const RunConfig& cfg) {
    std::ostringstream os;
    os << header_line(cfg);
    os << "tau,omega_abs,C,dE_mt,dE_ml,R_mt,R_ml\n";

    const std::vector<double> taus = resolve_taus(cfg);

    // fig1/table1 sweep several chain parameter rows; tag each with a comment
    if (cfg.model == Model::chain && (cfg.preset == "fig1" || cfg.preset == "table1")) {
        struct RowSpec {
            double gamma, tauH, h1;
        };
        std::vector<RowSpec> rows;
        if (cfg.preset == "fig1") {
            for (double th : {0.001, 0.01})
                for (double g : {0.2, 0.5, 0.8}) rows.push_back({g, th, cfg.chain.h1});
        } else {
            rows = {{0.1, 0.01, 1.0}, {0.2, 0.01, 1.0}, {0.5, 0.01, 2.0}};
        }
        for (const RowSpec& rw : rows) {
            ChainParams p = cfg.chain;
            p.gamma = rw.gamma;
            p.tauH = rw.tauH;
            p.h1 = rw.h1;
            for (double tau : taus) {
                const BoundReport rep = chain_report(p, tau, steps_for(cfg, tau));
                check_row(rep);
                os << "# row gamma=" << fmt9(rw.gamma) << " tauH=" << fmt9(rw.tauH)
                   << " h1=" << fmt9(rw.h1) << "\n";
                os << report_row(rep, cfg.bound);
            }
        }
        return os.str();
    }

    std::function<BoundReport(double)> eval;
    switch (cfg.model) {
        case Model::boson:
            eval = [&cfg](double tau) { return boson_report(cfg.drive, tau, steps_for(cfg, tau)); };
            break;
        case Model::chain:
            eval = [&cfg](double tau) { return chain_report(cfg.chain, tau, steps_for(cfg, tau)); };
            break;
        case Model::chain_exact:
            eval = [&cfg](double tau) { return exact_report(cfg.chain, tau, steps_for(cfg, tau)); };
            break;
    }
    const std::vector<BoundReport> reports = scan_R(taus, eval, env_threads());
    for (const BoundReport& r : reports) {
        check_row(r);
        os << report_row(r, cfg.bound);
    }
    return os.str();
}

std::string compare_csv(const RunConfig& cfg, double* worst_rel_err) {
    std::ostringstream os;
    os << header_line(cfg);
    os << "tau,Omega_pert,Omega_exact,abs_err,R_ml_pert,R_ml_exact,rel_err,S1,S2,S3\n";

    const QuasiparticleSpectrum spec = diagonalize(cfg.chain);
    const StrengthFactors s = strength_factors(cfg.chain, spec);
    double worst = 0.0;
    for (double tau : resolve_taus(cfg)) {
        const std::size_t steps = steps_for(cfg, tau);
        const BoundReport pert = chain_report(cfg.chain, tau, steps);
        const BoundReport exact = exact_report(cfg.chain, tau, steps);
        const double abs_err = std::abs(pert.omega_abs - exact.omega_abs);

        // rel_err: R_ml when defined on both sides; else the Bures angle,
        // whose relative spread is the sharper diagnostic near Omega = 1;
        // mismatched validity leaves the field empty (flagged via worst)
        double rel = -1.0;
        if (pert.R_ml && exact.R_ml)
            rel = std::abs(*pert.R_ml - *exact.R_ml) / std::max(std::abs(*exact.R_ml), 1e-300);
        else if (!pert.R_ml && !exact.R_ml)
            rel = exact.bures_angle > 0.0
                      ? std::abs(pert.bures_angle - exact.bures_angle) / exact.bures_angle
                      : std::abs(pert.omega_abs - exact.omega_abs);
        if (rel >= 0.0)
            worst = std::max(worst, rel);
        else
            worst = std::numeric_limits<double>::infinity();

        os << fmt9(tau) << ',' << fmt9(pert.omega_abs) << ',' << fmt9(exact.omega_abs) << ','
           << fmt9(abs_err) << ',' << field(pert.R_ml) << ',' << field(exact.R_ml) << ','
           << (rel >= 0.0 ? fmt9(rel) : std::string{}) << ',' << fmt9(s.s1) << ',' << fmt9(s.s2)
           << ',' << fmt9(s.s3) << '\n';
    }
    if (worst_rel_err) *worst_rel_err = worst;
    return os.str();
}

std::string extrema_csv(const std::string& input_text, BoundSel bound,
                        const std::string& input_name) {
    if (bound == BoundSel::both) throw ConfigError("bound: extrema needs mt or ml");

    std::istringstream in(input_text);
    std::string line;
    bool header_seen = false;
    std::vector<SweepPoint> pts;
    std::vector<StationaritySample> samples;
    std::size_t missing = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "tau,omega_abs,C,dE_mt,dE_ml,R_mt,R_ml")
                throw ConfigError("input: not a sweep CSV (unexpected column header)");
            header_seen = true;
            continue;
        }
        std::vector<std::string> f;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        f.push_back(cur);
        if (f.size() != 7) throw ConfigError("input: malformed row '" + line + "'");
        double tau = 0.0, c = 0.0;
        try {
            tau = std::stod(f[0]);
            c = std::stod(f[2]);
        } catch (...) {
            throw ConfigError("input: malformed row '" + line + "'");
        }
        const std::string& de_s = bound == BoundSel::mt ? f[3] : f[4];
        const std::string& r_s = bound == BoundSel::mt ? f[5] : f[6];
        if (de_s.empty() || r_s.empty()) {
            ++missing;
            continue;
        }
        try {
            pts.push_back({tau, std::stod(r_s), c});
            samples.push_back({tau, c, std::stod(de_s)});
        } catch (...) {
            throw ConfigError("input: malformed row '" + line + "'");
        }
    }
    if (!header_seen) throw ConfigError("input: no column header found");
    if (missing > 0)
        throw ConfigError("input: " + std::to_string(missing) + " rows lack the '" +
                          bound_name(bound) + "' bound");

    std::vector<Extremum> extrema;
    std::vector<StationarityPoint> stat;
    try {
        extrema = find_extrema(pts);
        stat = stationarity_check(samples);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("input: ") + e.what());
    }

    // rounded CSV fields perturb the two tau_star estimates independently;
    // half a sweep step is the right pairing radius
    const double half_step = pts.size() > 1 ? 0.5 * (pts[1].tau - pts[0].tau) : 0.0;

    std::ostringstream os;
    os << "# qsl-lab v" << kVersion << " preset=extrema params=bound=" << bound_name(bound)
       << ",input=" << input_name << "\n";
    os << "tau_star,kind,R,C,lhs,rhs,mismatch\n";
    for (const Extremum& ex : extrema) {
        os << fmt9(ex.tau_star) << ',' << kind_name(ex.kind) << ',' << fmt9(ex.R_value) << ','
           << fmt9(ex.C_value);
        const StationarityPoint* best = nullptr;
        for (const StationarityPoint& sp : stat)
            if (!best || std::abs(sp.tau_star - ex.tau_star) < std::abs(best->tau_star - ex.tau_star))
                best = &sp;
        if (ex.kind == ExtremumKind::maximum && best &&
            std::abs(best->tau_star - ex.tau_star) <= half_step) {
            os << ',' << fmt9(best->lhs) << ',' << fmt9(best->rhs) << ',' << fmt9(best->mismatch);
        } else {
            os << ",,,";
        }
        os << '\n';
    }
    return os.str();
}

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file_or_stream(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << content;
    f.flush();
    if (!f) {
        f.close();
        std::remove(path.c_str());
        throw std::runtime_error("write failed, partial file removed: " + path);
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"time-energy bound sweeps for a driven bosonic mode and an XY spin chain"};
    app.name("qsl");
    app.require_subcommand(1);

    struct FlagValues {
        std::string config, preset, outpath, bound, dump, input, preset_positional;
        double A = 0, omega = 0, V0 = 0, J = 0, gamma = 0, h0 = 0, h1 = 0, tauH = 0;
        double tau_max = 0, dt = 0;
        long long N = 0, tau_steps = 0;
        std::vector<double> tau;
        bool strict = false;
    } fl;

    auto add_run_options = [&fl](CLI::App* cmd) {
        cmd->add_option("--tau", fl.tau, "explicit tau values")->delimiter(',');
        cmd->add_option("--tau-max", fl.tau_max, "sweep end; rows at j*tau-max/tau-steps");
        cmd->add_option("--tau-steps", fl.tau_steps, "sweep row count");
        cmd->add_option("--dt", fl.dt, "observable grid step (default min(0.01, tau/1000))");
        cmd->add_option("--bound", fl.bound, "mt, ml or both");
        cmd->add_option("--out", fl.outpath, "output CSV path (default stdout)");
        cmd->add_option("--config", fl.config, "[section] key = value file");
        cmd->add_option("--dump-config", fl.dump, "write resolved config and exit ('-' = stdout)");
        cmd->add_option("--preset", fl.preset, "start from a frozen preset");
    };
    auto add_boson_options = [&fl](CLI::App* cmd) {
        cmd->add_option("--A", fl.A, "level spacing");
        cmd->add_option("--omega", fl.omega, "drive frequency");
        cmd->add_option("--V0", fl.V0, "coupling strength");
    };
    auto add_chain_options = [&fl](CLI::App* cmd) {
        cmd->add_option("--N", fl.N, "chain length (even)");
        cmd->add_option("--J", fl.J, "exchange coupling");
        cmd->add_option("--gamma", fl.gamma, "anisotropy in [0,1]");
        cmd->add_option("--h0", fl.h0, "static field");
        cmd->add_option("--h1", fl.h1, "drive amplitude");
        cmd->add_option("--tauH", fl.tauH, "drive decay time");
    };

    CLI::App* cmd_boson = app.add_subcommand("boson", "driven two-level bosonic mode sweep");
    add_boson_options(cmd_boson);
    add_run_options(cmd_boson);

    CLI::App* cmd_chain = app.add_subcommand("chain", "perturbative XY chain sweep");
    add_chain_options(cmd_chain);
    add_run_options(cmd_chain);

    CLI::App* cmd_exact = app.add_subcommand("chain-exact", "exact-diagonalization chain sweep");
    add_chain_options(cmd_exact);
    add_run_options(cmd_exact);

    CLI::App* cmd_compare = app.add_subcommand("compare", "perturbative vs exact chain overlap");
    add_chain_options(cmd_compare);
    add_run_options(cmd_compare);
    cmd_compare->add_flag("--strict", fl.strict, "exit 2 when rel_err exceeds the bound");

    CLI::App* cmd_extrema = app.add_subcommand("extrema", "extrema of R from an emitted sweep CSV");
    cmd_extrema->add_option("--input", fl.input, "sweep CSV to analyze")->required();
    cmd_extrema->add_option("--bound", fl.bound, "mt or ml (default mt)");
    cmd_extrema->add_option("--out", fl.outpath, "output CSV path (default stdout)");

    CLI::App* cmd_preset = app.add_subcommand("preset", "run a frozen preset");
    cmd_preset->add_option("name", fl.preset_positional, "fig1, fig2, fig3 or table1")->required();
    cmd_preset->add_option("--out", fl.outpath, "output CSV path (default stdout)");
    cmd_preset->add_option("--dump-config", fl.dump, "write resolved config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    // extrema: pure post-processing, no RunConfig
    if (app.got_subcommand(cmd_extrema)) {
        try {
            const BoundSel bound =
                cmd_extrema->count("--bound") > 0 ? parse_bound(fl.bound) : BoundSel::mt;
            const std::string text = read_text_file(fl.input);
            const std::string content = extrema_csv(text, bound, fl.input);
            write_file_or_stream(fl.outpath, content, out);
            return 0;
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            err << "numerical failure: " << e.what() << "\n";
            return 2;
        }
    }

    RunConfig cfg;
    bool is_compare = false;
    CLI::App* cmd = nullptr;
    try {
        if (app.got_subcommand(cmd_preset)) {
            cfg = preset_config(fl.preset_positional);
            if (cfg.preset == "compare")
                throw ConfigError("preset: use the compare subcommand for the desk comparison");
            cfg.out = fl.outpath;
        } else {
            if (app.got_subcommand(cmd_boson)) {
                cmd = cmd_boson;
                cfg.model = Model::boson;
            } else if (app.got_subcommand(cmd_chain)) {
                cmd = cmd_chain;
                cfg.model = Model::chain;
                cfg.chain.gamma = 0.5;
            } else if (app.got_subcommand(cmd_exact)) {
                cmd = cmd_exact;
                cfg.model = Model::chain_exact;
                cfg.chain.gamma = 0.5;
                cfg.chain.N = 8;
            } else {
                cmd = cmd_compare;
                is_compare = true;
                cfg = preset_config("compare");
            }
            const Model sub_model = cfg.model;
            auto given = [cmd](const std::string& name) {
                const CLI::Option* o = cmd->get_option_no_throw(name);
                return o != nullptr && o->count() > 0;
            };

            std::string config_text;
            if (given("--config")) config_text = read_text_file(fl.config);
            std::string file_preset;
            for (const auto& e : parse_entries(config_text))
                if (e.section == "run" && e.key == "preset") file_preset = e.value;
            if (given("--preset")) {
                if (!file_preset.empty() && file_preset != fl.preset)
                    throw ConfigError("preset: flag '" + fl.preset + "' conflicts with config '" +
                                      file_preset + "'");
                if (file_preset.empty()) merge_preset(cfg, fl.preset);
            }
            if (!config_text.empty()) apply_config_text(cfg, config_text);

            if (given("--A")) cfg.drive.A = fl.A;
            if (given("--omega")) cfg.drive.omega = fl.omega;
            if (given("--V0")) cfg.drive.V0 = fl.V0;
            if (given("--N")) cfg.chain.N = static_cast<int>(fl.N);
            if (given("--J")) cfg.chain.J = fl.J;
            if (given("--gamma")) cfg.chain.gamma = fl.gamma;
            if (given("--h0")) cfg.chain.h0 = fl.h0;
            if (given("--h1")) cfg.chain.h1 = fl.h1;
            if (given("--tauH")) cfg.chain.tauH = fl.tauH;
            if (given("--tau") && (given("--tau-max") || given("--tau-steps")))
                throw ConfigError("tau: give either --tau or --tau-max/--tau-steps, not both");
            if (given("--tau")) {
                cfg.tau_list = fl.tau;
                cfg.tau_max = 0.0;
                cfg.tau_steps = 0;
            }
            if (given("--tau-max")) {
                cfg.tau_max = fl.tau_max;
                cfg.tau_list.clear();
            }
            if (given("--tau-steps")) {
                cfg.tau_steps = static_cast<std::size_t>(fl.tau_steps);
                cfg.tau_list.clear();
            }
            if (given("--dt")) cfg.dt = fl.dt;
            if (given("--bound")) cfg.bound = parse_bound(fl.bound);
            if (given("--out")) cfg.out = fl.outpath;
            if (is_compare && fl.strict) cfg.strict = true;

            if (cfg.model != sub_model)
                throw ConfigError(std::string("model: configuration resolves to '") +
                                  model_name(cfg.model) + "' under the '" + model_name(sub_model) +
                                  "' subcommand");
        }

        validate_config(cfg);
        if (is_compare && cfg.chain.N > 12)
            throw ConfigError("N: compare needs N <= 12 for the exact reference");

        const bool want_dump = (cmd != nullptr && cmd->count("--dump-config") > 0) ||
                               (app.got_subcommand(cmd_preset) && cmd_preset->count("--dump-config") > 0);
        if (want_dump) {
            write_file_or_stream(fl.dump, dump_config(cfg), out);
            return 0;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (is_compare) {
            double worst = 0.0;
            const std::string content = compare_csv(cfg, &worst);
            write_file_or_stream(cfg.out, content, out);
            if (cfg.strict && !(worst <= cfg.rel_bound)) {
                err << "strict: rel_err " << fmt_g(worst, 9) << " exceeds bound "
                    << fmt_g(cfg.rel_bound, 9) << "\n";
                return 2;
            }
            return 0;
        }
        const std::string content = run_csv(cfg);
        write_file_or_stream(cfg.out, content, out);
        return 0;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace qsl
