#include "ctwpc/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "ctwpc/coupled_mode.hpp"
#include "ctwpc/errors.hpp"
#include "ctwpc/nld.hpp"
#include "ctwpc/phase_matching.hpp"
#include "ctwpc/pipelines.hpp"
#include "ctwpc/tdr.hpp"
#include "ctwpc/units.hpp"

namespace ctwpc::cli {

using io::json;
namespace fs = std::filesystem;

namespace {

// ---- parameter tables -----------------------------------------------------

struct ParamDef {
    std::string name;
    json fallback;  // also fixes the type; null means "optional number"
    std::string help;
};

const std::map<std::string, std::vector<ParamDef>>& param_table() {
    static const std::map<std::string, std::vector<ParamDef>> table = {
        {"dispersion",
         {{"f_min_ghz", 0.1, "lowest frequency (GHz)"},
          {"f_max_ghz", 25.0, "highest frequency (GHz)"},
          {"points", 250, "number of grid points"}}},
        {"phase-match",
         {{"pump_ghz", json::array({2.5, 3.5, 4.5}), "pump frequencies (GHz), comma separated"},
          {"flux_quanta", 0.0, "pump junction flux (flux quanta)"},
          {"processes", "Ci,Al,Co", "processes among Ci, Al, Co"},
          {"directions", "forward,backward", "probe directions"}}},
        {"gaps-map",
         {{"pump_min_ghz", 0.5, "first pump frequency (GHz)"},
          {"pump_max_ghz", 6.0, "last pump frequency (GHz)"},
          {"pump_step_ghz", 0.05, "pump step (GHz)"},
          {"flux_quanta", 0.0, "pump junction flux (flux quanta)"}}},
        {"envelope",
         {{"process", "Ci", "Ci or Co"},
          {"pump_ghz", 4.5, "pump frequency (GHz)"},
          {"flux_quanta", 0.06, "pump junction flux (flux quanta)"},
          {"detuning_mhz", 0.0, "signal detuning from the matched point (MHz)"},
          {"points", 401, "samples along the line"}}},
        {"isolate",
         {{"process", "Ci", "Ci or Co"},
          {"pump_ghz", 4.63, "pump frequency (GHz)"},
          {"left_ratio", 0.0, "pump amplitude entering from the left, relative to the right"},
          {"flux_min", 0.0, "smallest pump junction flux (flux quanta)"},
          {"flux_max", 0.12, "largest pump junction flux (flux quanta)"},
          {"points", 25, "number of pump amplitudes"},
          {"probe_ghz", nullptr, "fixed probe frequency (GHz); matched point when absent"}}},
        {"nld-sim",
         {{"pump_ghz", 2.5, "pump frequency (GHz)"},
          {"flux_quanta", 0.05, "pump junction flux of the incident wave (flux quanta)"},
          {"pump_port", "delta_right", "pump port"},
          {"probe_ghz", 5.0, "probe frequency (GHz)"},
          {"sidebands", 2, "sidebands on each side of the probe"},
          {"harmonics", 3, "pump harmonics M (1, 3, ..., 2M-1)"},
          {"even_harmonics", false, "include even pump harmonics"},
          {"ports", "bloch", "port impedances: bloch, nominal or taper"}}},
        {"nld-map",
         {{"pump_ghz", json::array({2.5, 3.5, 4.5}), "pump frequencies (GHz), comma separated"},
          {"flux_quanta", 0.05, "pump junction flux of the incident wave (flux quanta)"},
          {"pump_port", "delta_right", "pump port"},
          {"probe_min_ghz", 1.0, "first probe frequency (GHz)"},
          {"probe_max_ghz", 12.0, "last probe frequency (GHz)"},
          {"probe_step_ghz", 0.02, "probe step (GHz)"},
          {"sidebands", 2, "sidebands on each side of the probe"},
          {"harmonics", 3, "pump harmonics M"},
          {"even_harmonics", false, "include even pump harmonics"},
          {"ports", "bloch", "port impedances: bloch, nominal or taper"}}},
        {"scatter",
         {{"f_min_ghz", 4.0, "first frequency (GHz)"},
          {"f_max_ghz", 8.0, "last frequency (GHz)"},
          {"points", 1601, "number of frequencies"},
          {"ports", "bloch", "port impedances: bloch, nominal or taper"}}},
        {"tdr",
         {{"input", "", "Touchstone (.sNp) or CSV sweep"},
          {"s_param", "S11", "trace to transform, SIJ with 1-based ports"},
          {"window", "kaiser", "none, hann, kaiser or kaiser:<beta>"},
          {"velocity", nullptr, "cell/ns; Sigma group velocity at band centre when absent"},
          {"offset_ns", 0.0, "time of the line's input plane (ns)"},
          {"pad", 8, "zero-padding factor"}}},
        {"reproduce-fig",
         {{"disorder_halfwidth", 0.05, "junction disorder used by the reflectometry figure"}}},
    };
    return table;
}

std::string flag_name(const std::string& key) {
    std::string f = key;
    for (char& c : f)
        if (c == '_') c = '-';
    return "--" + f;
}

json parse_flag(const ParamDef& def, const std::string& raw, const std::string& field) {
    try {
        if (def.fallback.is_boolean()) return raw == "true" || raw == "1" || raw.empty();
        if (def.fallback.is_number_integer()) {
            std::size_t used = 0;
            const long long v = std::stoll(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        }
        if (def.fallback.is_number() || def.fallback.is_null()) return io::parse_double(raw);
        if (def.fallback.is_array()) {
            json arr = json::array();
            std::stringstream ss(raw);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) arr.push_back(io::parse_double(tok));
            return arr;
        }
        return raw;
    } catch (const std::exception&) {
        throw io::ConfigError(field, "cannot parse '" + raw + "'");
    }
}

// ---- run context ----------------------------------------------------------

class Run {
public:
    Run(std::string command, fs::path out_dir, LineSpec line, json params, int threads)
        : command_(std::move(command)), out_dir_(std::move(out_dir)), line_(std::move(line)),
          params_(std::move(params)), threads_(threads) {
        manifest_.tool_version = kToolVersion;
        manifest_.command = command_;
        manifest_.seed = line_.seed;
        manifest_.started_utc = io::utc_timestamp();
        const json effective = {{"command", command_}, {"line", io::line_spec_to_json(line_)}, {"params", params_}};
        manifest_.config_hash = io::sha256_hex(io::canonical(effective));
        manifest_.extra["effective_config"] = effective;
    }

    [[nodiscard]] const LineSpec& line() const { return line_; }
    [[nodiscard]] int threads() const { return threads_; }
    [[nodiscard]] const std::string& command() const { return command_; }
    io::RunManifest& manifest() { return manifest_; }

    [[nodiscard]] std::string field(const std::string& key) const { return "params." + command_ + "." + key; }

    [[nodiscard]] double num(const std::string& key) const {
        const auto& v = params_.at(key);
        if (!v.is_number() || !std::isfinite(v.get<double>())) throw io::ConfigError(field(key), "expected a number");
        return v.get<double>();
    }
    [[nodiscard]] std::optional<double> opt_num(const std::string& key) const {
        if (params_.at(key).is_null()) return std::nullopt;
        return num(key);
    }
    [[nodiscard]] int integer(const std::string& key) const {
        const auto& v = params_.at(key);
        if (!v.is_number_integer()) throw io::ConfigError(field(key), "expected an integer");
        return v.get<int>();
    }
    [[nodiscard]] bool flag(const std::string& key) const {
        const auto& v = params_.at(key);
        if (!v.is_boolean()) throw io::ConfigError(field(key), "expected true or false");
        return v.get<bool>();
    }
    [[nodiscard]] std::string str(const std::string& key) const {
        const auto& v = params_.at(key);
        if (!v.is_string()) throw io::ConfigError(field(key), "expected a string");
        return v.get<std::string>();
    }
    [[nodiscard]] std::vector<double> list(const std::string& key) const {
        const auto& v = params_.at(key);
        if (!v.is_array()) throw io::ConfigError(field(key), "expected an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) throw io::ConfigError(field(key), "expected an array of numbers");
            out.push_back(x.get<double>());
        }
        if (out.empty()) throw io::ConfigError(field(key), "must not be empty");
        return out;
    }
    [[nodiscard]] std::vector<std::string> words(const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(str(key));
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(tok);
        if (out.empty()) throw io::ConfigError(field(key), "must not be empty");
        return out;
    }
    [[nodiscard]] std::vector<double> range(const std::string& lo, const std::string& hi, const std::string& step) const {
        const double a = num(lo), b = num(hi), d = num(step);
        if (!(d > 0.0)) throw io::ConfigError(field(step), "must be positive");
        if (!(b >= a)) throw io::ConfigError(field(hi), "must not be below " + lo);
        const auto n = static_cast<long>(std::floor((b - a) / d + 1e-9)) + 1;
        if (n > 1000000) throw io::ConfigError(field(step), "grid too large");
        std::vector<double> v;
        for (long i = 0; i < n; ++i) v.push_back(a + d * static_cast<double>(i));
        return v;
    }
    [[nodiscard]] std::vector<double> linspace(const std::string& lo, const std::string& hi,
                                               const std::string& count) const {
        const double a = num(lo), b = num(hi);
        const int n = integer(count);
        if (n < 2) throw io::ConfigError(field(count), "needs at least 2 points");
        if (!(b > a)) throw io::ConfigError(field(hi), "must exceed " + lo);
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
        return v;
    }

    void write(const std::string& name, const std::string& text) {
        const fs::path path = out_dir_ / name;
        io::write_text(path, text);
        manifest_.outputs.push_back({name, io::sha256_hex(text)});
    }
    /// Path for writers that produce their own file; follow with record().
    [[nodiscard]] fs::path path(const std::string& name) const {
        fs::create_directories(out_dir_);
        return out_dir_ / name;
    }
    void record(const std::string& name) { manifest_.outputs.push_back({name, io::sha256_file(out_dir_ / name)}); }
    void write_csv(const std::string& name, const io::CsvTable& table) { write(name, table.str()); }
    void write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }
    void write_svg(const std::string& name, const io::PlotSpec& plot) { write(name, io::render_svg(plot)); }

    void finish() {
        manifest_.finished_utc = io::utc_timestamp();
        io::write_text(out_dir_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
    }

private:
    std::string command_;
    fs::path out_dir_;
    LineSpec line_;
    json params_;
    int threads_;
    io::RunManifest manifest_;
};

// ---- shared helpers -------------------------------------------------------

ProcessKind process_named(const std::string& name, const std::string& field) {
    if (name == "Ci") return ProcessKind::Circulation;
    if (name == "Al") return ProcessKind::CirculationAliased;
    if (name == "Co") return ProcessKind::TunableCoupling;
    throw io::ConfigError(field, "unknown process '" + name + "' (Ci, Al, Co)");
}

Direction direction_named(const std::string& name, const std::string& field) {
    if (name == "forward") return Direction::Forward;
    if (name == "backward") return Direction::Backward;
    throw io::ConfigError(field, "unknown direction '" + name + "'");
}

int port_named(const std::string& name, const std::string& field) {
    for (int p = 0; p < kPorts; ++p)
        if (name == port_name(p)) return p;
    throw io::ConfigError(field, "unknown port '" + name + "'");
}

PortConfig ports_named(const std::string& name, const CellParams& cell, const std::string& field) {
    if (name == "bloch") return matched_ports(cell);
    if (name == "nominal") return nominal_ports(cell);
    if (name == "taper") return taper_ports();
    throw io::ConfigError(field, "unknown port model '" + name + "' (bloch, nominal, taper)");
}

/// Incident amplitude on `port` that gives `flux_quanta` across the junctions at omega.
double drive_amplitude(int port, double omega, double flux_quanta, const CellParams& cell) {
    const Mode mode = (port == SigmaLeft || port == SigmaRight) ? Mode::Sigma : Mode::Delta;
    double k = 0.0;
    try {
        k = wavevector(mode, omega, cell);
    } catch (const Error& e) {
        throw Error(ErrorKind::PumpAboveCutoff, std::string("pump does not propagate: ") + e.what());
    }
    return amplitude_from_flux(quanta_to_reduced(flux_quanta), k);
}

std::string fmt(double v) { return io::format_double(v); }

double db(std::complex<double> s) { return 20.0 * std::log10(std::abs(s)); }

io::CsvTable tdr_table(const ImpulseResponse& ir, double t_max_ns = HUGE_VAL) {
    io::CsvTable t({"t_ns", "magnitude", "phase_rad"});
    for (std::size_t i = 0; i < ir.t_ns.size() && ir.t_ns[i] <= t_max_ns; ++i)
        t.add_row({ir.t_ns[i], std::abs(ir.amplitude[i]), std::arg(ir.amplitude[i])});
    return t;
}

json peak_report(const ImpulseResponse& ir, double velocity, double offset_ns) {
    json peaks = json::array();
    const auto found = find_peaks(ir);
    for (std::size_t i = 0; i < std::min<std::size_t>(found.size(), 10); ++i)
        peaks.push_back({{"t_ns", found[i].t_ns}, {"magnitude", found[i].magnitude}});
    json report = {{"window", ir.window.describe()},
                   {"resolution_ns", ir.resolution_ns},
                   {"threshold", peak_threshold(ir)},
                   {"velocity_cell_per_ns", velocity},
                   {"offset_ns", offset_ns},
                   {"peaks", peaks},
                   {"defect", nullptr}};
    if (!found.empty()) {
        const auto loc = locate_defect(ir, velocity, offset_ns);
        report["defect"] = {{"cell", loc.cell}, {"uncertainty_cells", loc.uncertainty}, {"t_ns", loc.peak.t_ns}};
    }
    return report;
}

io::PlotSpec plot(std::string title, std::string x, std::string y) {
    io::PlotSpec p;
    p.title = std::move(title);
    p.x_label = std::move(x);
    p.y_label = std::move(y);
    return p;
}

// ---- subcommands ----------------------------------------------------------

void cmd_dispersion(Run& run) {
    const auto grid = run.linspace("f_min_ghz", "f_max_ghz", "points");
    if (grid.front() <= 0.0) throw io::ConfigError(run.field("f_min_ghz"), "must be positive");
    const CellParams& cell = run.line().cell;
    io::CsvTable t({"f_GHz", "k_sigma_rad_per_cell", "k_delta_rad_per_cell", "v_sigma_cell_per_ns", "v_delta_cell_per_ns"});
    auto fig = plot("Dispersion", "f (GHz)", "k (rad/cell)");
    fig.series = {{"Sigma", {}, {}}, {"Delta", {}, {}}};
    const double nan = std::nan("");
    for (double f : grid) {
        const double w = ghz_to_rad(f);
        std::vector<double> row = {f};
        double ks = nan, kd = nan, vs = nan, vd = nan;
        if (w < cutoff(Mode::Sigma, cell)) ks = wavevector(Mode::Sigma, w, cell), vs = phase_velocity(Mode::Sigma, w, cell);
        if (w < cutoff(Mode::Delta, cell)) kd = wavevector(Mode::Delta, w, cell), vd = phase_velocity(Mode::Delta, w, cell);
        t.add_row({f, ks, kd, vs, vd});
        fig.series[0].x.push_back(f), fig.series[0].y.push_back(ks);
        fig.series[1].x.push_back(f), fig.series[1].y.push_back(kd);
    }
    run.write_csv("dispersion.csv", t);
    run.write_svg("dispersion.svg", fig);
}

double pump_epsilon(double omega_p, double flux_quanta, const CellParams& cell, const std::string& field) {
    if (flux_quanta < 0.0) throw io::ConfigError(field, "must not be negative");
    return flux_quanta == 0.0 ? 0.0 : delta_amplitude_for_flux(omega_p, flux_quanta, cell);
}

void cmd_phase_match(Run& run) {
    const CellParams& cell = run.line().cell;
    const auto pumps = run.list("pump_ghz");
    const double flux = run.num("flux_quanta");
    io::CsvTable t({"process", "direction", "f_pump_GHz", "f_signal_GHz", "f_idler_GHz", "f_probe_GHz",
                    "k_signal_rad_per_cell", "k_idler_rad_per_cell", "k_pump_rad_per_cell"});
    json missing = json::array();
    for (const auto& pname : run.words("processes")) {
        const ProcessKind kind = process_named(pname, run.field("processes"));
        for (const auto& dname : run.words("directions")) {
            const Direction dir = direction_named(dname, run.field("directions"));
            for (double fp : pumps) {
                const double wp = ghz_to_rad(fp);
                try {
                    const double eps = pump_epsilon(wp, flux, cell, run.field("flux_quanta"));
                    for (const auto& m : solve_corrected(kind, dir, wp, eps, cell)) {
                        t.add_row({to_string(kind), to_string(dir), fmt(fp), fmt(rad_to_ghz(m.omega_s)),
                                   fmt(rad_to_ghz(m.omega_i)), fmt(rad_to_ghz(probe_frequency(kind, dir, m.omega_s, wp))),
                                   fmt(m.k_s), fmt(m.k_i), fmt(m.k_p)});
                    }
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NoSolutionInBand && e.kind() != ErrorKind::PumpAboveCutoff) throw;
                    missing.push_back({{"process", to_string(kind)}, {"direction", to_string(dir)}, {"f_pump_GHz", fp},
                                       {"reason", to_string(e.kind())}});
                }
            }
        }
    }
    run.manifest().extra["no_solution"] = missing;
    run.write_csv("match_points.csv", t);
}

void write_gap_curves(Run& run, const std::vector<GapCurve>& curves, const std::string& prefix, io::PlotSpec* fig) {
    for (const auto& c : curves) {
        io::CsvTable t({"f_pump_GHz", "f_probe_GHz"});
        io::PlotSeries s{c.name(), {}, {}};
        for (const auto& [fp, fs] : c.points) {
            t.add_row({fp, fs});
            s.x.push_back(fp), s.y.push_back(fs);
        }
        run.write_csv(prefix + c.name() + ".csv", t);
        if (fig) fig->series.push_back(std::move(s));
    }
}

void cmd_gaps_map(Run& run) {
    const auto pumps = run.range("pump_min_ghz", "pump_max_ghz", "pump_step_ghz");
    const double flux = run.num("flux_quanta");
    const CellParams& cell = run.line().cell;
    // A fixed junction flux maps to a frequency-dependent amplitude, so solve per pump point.
    std::vector<GapCurve> curves;
    for (const auto& [kind, dir] : all_gap_curves()) {
        GapCurve c{kind, dir, {}};
        for (double fp : pumps) {
            const double wp = ghz_to_rad(fp);
            if (wp >= cutoff(Mode::Delta, cell)) continue;
            const double eps = pump_epsilon(wp, flux, cell, run.field("flux_quanta"));
            const auto g = gap_map({{kind, dir}}, {fp}, cell, eps);
            for (const auto& p : g.front().points) c.points.push_back(p);
        }
        curves.push_back(std::move(c));
    }
    auto fig = plot("Phase-matched gaps", "f_pump (GHz)", "f_probe (GHz)");
    write_gap_curves(run, curves, "gap_", &fig);
    run.write_svg("gaps.svg", fig);
}

void cmd_envelope(Run& run) {
    const CellParams& cell = run.line().cell;
    const ProcessKind kind = process_named(run.str("process"), run.field("process"));
    if (kind == ProcessKind::CirculationAliased) throw io::ConfigError(run.field("process"), "envelope supports Ci and Co");
    const double wp = ghz_to_rad(run.num("pump_ghz"));
    const double eps = pump_epsilon(wp, run.num("flux_quanta"), cell, run.field("flux_quanta"));
    const int points = run.integer("points");
    if (points < 2) throw io::ConfigError(run.field("points"), "needs at least 2 points");
    const auto match = solve_corrected(kind, Direction::Forward, wp, eps, cell).front();

    ProcessConfig config;
    config.kind = kind;
    config.omega_p = wp;
    config.length = run.line().n_cells;
    config.pump_bw = eps;
    if (kind == ProcessKind::TunableCoupling) config.pump_fw = eps;
    const double detuning = 2.0 * kPi * run.num("detuning_mhz") * 1e6;
    EnvelopeSolution sol;
    if (detuning == 0.0) {
        config.omega_s = match.omega_s;
        sol = solve_uniform(config, wavevectors_of(match), 1.0, Direction::Forward, points);
    } else {
        config.omega_s = match.omega_s + detuning;
        const PumpContext pump = make_pump(Mode::Delta, wp, eps, cell);
        const auto pw = process_wavevectors(kind, config.omega_s, wp, pump, cell);
        const double kappa = momentum_residual(kind, config.omega_s, wp, pump, cell);
        sol = solve_detuned(config, {pw.k_s, -pw.k_i, pw.k_p}, kappa, 1.0, Direction::Forward, points);
    }
    io::CsvTable t({"x_cell", "abs_eps_s", "abs_eps_i", "phase_s_rad", "phase_i_rad"});
    auto fig = plot("Envelopes", "x (cells)", "|amplitude|");
    fig.series = {{"signal", {}, {}}, {"idler", {}, {}}};
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
        t.add_row({sol.x[i], std::abs(sol.eps_s[i]), std::abs(sol.eps_i[i]), std::arg(sol.eps_s[i]), std::arg(sol.eps_i[i])});
        fig.series[0].x.push_back(sol.x[i]), fig.series[0].y.push_back(std::abs(sol.eps_s[i]));
        fig.series[1].x.push_back(sol.x[i]), fig.series[1].y.push_back(std::abs(sol.eps_i[i]));
    }
    run.manifest().extra["f_signal_GHz"] = rad_to_ghz(config.omega_s);
    run.manifest().extra["alpha_per_cell"] = sol.alpha;
    run.write_csv("envelope.csv", t);
    run.write_svg("envelope.svg", fig);
}

io::CsvTable isolation_curve(const LineSpec& line, ProcessKind kind, double f_pump, double left_ratio,
                             const std::vector<double>& fluxes, std::optional<double> probe_ghz, io::PlotSpec* fig,
                             const std::string& label) {
    io::CsvTable t({"process", "pump_flux_quanta", "pump_amplitude", "f_signal_GHz", "forward_dB", "backward_dB"});
    io::PlotSeries fw{label + " forward", {}, {}}, bw{label + " backward", {}, {}};
    const double wp = ghz_to_rad(f_pump);
    for (double q : fluxes) {
        const double eps = q == 0.0 ? 0.0 : delta_amplitude_for_flux(wp, q, line.cell);
        std::optional<double> ws;
        if (probe_ghz) ws = ghz_to_rad(*probe_ghz);
        const auto p = isolation_with_defect(line, kind, wp, eps, left_ratio, ws);
        t.add_row({to_string(kind), fmt(q), fmt(eps), fmt(rad_to_ghz(p.omega_s)), fmt(p.forward_db), fmt(p.backward_db)});
        fw.x.push_back(q), fw.y.push_back(p.forward_db);
        bw.x.push_back(q), bw.y.push_back(p.backward_db);
    }
    if (fig) {
        fig->series.push_back(std::move(fw));
        fig->series.push_back(std::move(bw));
    }
    return t;
}

void cmd_isolate(Run& run) {
    const ProcessKind kind = process_named(run.str("process"), run.field("process"));
    if (kind == ProcessKind::CirculationAliased) throw io::ConfigError(run.field("process"), "isolate supports Ci and Co");
    const auto fluxes = run.linspace("flux_min", "flux_max", "points");
    if (fluxes.front() < 0.0) throw io::ConfigError(run.field("flux_min"), "must not be negative");
    auto fig = plot("Attenuation vs pump", "pump flux (flux quanta)", "transmission (dB)");
    const auto t = isolation_curve(run.line(), kind, run.num("pump_ghz"), run.num("left_ratio"), fluxes,
                                   run.opt_num("probe_ghz"), &fig, run.str("process"));
    run.write_csv("isolate.csv", t);
    run.write_svg("isolate.svg", fig);
}

HarmonicBasis basis_of(const Run& run) {
    HarmonicBasis b;
    b.M = run.integer("harmonics");
    b.include_even = run.flag("even_harmonics");
    if (b.M < 1 || b.M > 16) throw io::ConfigError(run.field("harmonics"), "must lie in [1, 16]");
    return b;
}

int sidebands_of(const Run& run) {
    const int n = run.integer("sidebands");
    if (n < 0 || n > 8) throw io::ConfigError(run.field("sidebands"), "must lie in [0, 8]");
    return n;
}

void cmd_nld_sim(Run& run) {
    const LineSpec& line = run.line();
    const auto net = build_chain(line, ports_named(run.str("ports"), line.cell, run.field("ports")));
    const int port = port_named(run.str("pump_port"), run.field("pump_port"));
    const double wp = ghz_to_rad(run.num("pump_ghz"));
    const double amp = drive_amplitude(port, wp, run.num("flux_quanta"), line.cell);
    const auto basis = basis_of(run);
    const int nsb = sidebands_of(run);
    const auto pump = pump_harmonic_balance(net, wp, {Drive{port, amp, 0.0}}, basis);

    json doc = {{"f_pump_GHz", rad_to_ghz(wp)},
                {"drive", {{"port", port_name(port)}, {"amplitude", amp}}},
                {"harmonics", pump.harmonics},
                {"iterations", pump.iterations},
                {"relative_residual", pump.residual},
                {"residual_history", pump.residual_history}};
    const auto powers = pump_harmonics_at_ports(net, pump);
    json ports = json::object();
    for (int p = 0; p < kPorts; ++p) ports[port_name(p)] = powers[p];
    doc["relative_port_power"] = ports;
    json flux_a = json::array(), flux_b = json::array();
    for (int n = 0; n < net.n_cells; ++n) {
        flux_a.push_back(reduced_to_quanta(2.0 * std::abs(pump.junction_flux(n, false, 0))));
        flux_b.push_back(reduced_to_quanta(2.0 * std::abs(pump.junction_flux(n, true, 0))));
    }
    doc["fundamental_junction_flux_quanta"] = {{"electrode_a", flux_a}, {"electrode_b", flux_b}};
    run.write_json("pump.json", doc);

    const auto sc = signal_sidebands(net, pump, ghz_to_rad(run.num("probe_ghz")), nsb);
    io::CsvTable t({"input_port", "output_port", "sideband", "f_GHz", "abs_S", "S_dB", "phase_rad"});
    for (int in : sc.inputs) {
        for (int out = 0; out < kPorts; ++out) {
            for (int n = -nsb; n <= nsb; ++n) {
                const auto s = sc.at(out, in, n);
                t.add_row({port_name(in), port_name(out), std::to_string(n), fmt(rad_to_ghz(sc.frequencies[n + nsb])),
                           fmt(std::abs(s)), fmt(db(s)), fmt(std::arg(s))});
            }
        }
    }
    run.manifest().extra["truncation_warning"] = sc.truncation_warning;
    run.manifest().extra["outer_sideband_power_fraction"] = sc.outer_power_fraction;
    run.write_csv("sidebands.csv", t);
}

/// Returns false when some pump rows did not converge.
bool nld_map(Run& run, const LineSpec& line, const std::vector<double>& pumps, const std::vector<double>& probes,
             int port, double flux, const HarmonicBasis& basis, int nsb, const PortConfig& ports,
             const std::string& name, io::PlotSpec* fig) {
    const auto net = build_chain(line, ports);
    MapOptions opt;
    opt.basis = basis;
    opt.n_sidebands = nsb;
    opt.threads = run.threads();
    opt.drives_at = [&](double wp) { return std::vector<Drive>{Drive{port, drive_amplitude(port, wp, flux, line.cell), 0.0}}; };
    const auto map = transmission_map(net, pumps, probes, opt);
    io::CsvTable t({"f_pump_GHz", "f_probe_GHz", "S_fw_dB", "S_bw_dB"});
    bool all = true;
    json failed = json::array();
    for (std::size_t i = 0; i < pumps.size(); ++i) {
        if (!map.pump_converged[i]) {
            all = false;
            failed.push_back(pumps[i]);
        }
        for (std::size_t j = 0; j < probes.size(); ++j)
            t.add_row({pumps[i], probes[j], map.forward_db[i][j], map.backward_db[i][j]});
    }
    if (fig) {
        io::PlotSeries fw{"forward < -3 dB", {}, {}, true}, bw{"backward < -3 dB", {}, {}, true};
        for (std::size_t i = 0; i < pumps.size(); ++i) {
            for (std::size_t j = 0; j < probes.size(); ++j) {
                if (map.forward_db[i][j] < -3.0) fw.x.push_back(pumps[i]), fw.y.push_back(probes[j]);
                if (map.backward_db[i][j] < -3.0) bw.x.push_back(pumps[i] + 0.02), bw.y.push_back(probes[j]);
            }
        }
        fig->series.push_back(std::move(fw));
        fig->series.push_back(std::move(bw));
    }
    run.manifest().extra["nonconverged_pump_GHz"] = failed;
    run.write_csv(name, t);
    return all;
}

struct PartialResult : Error {
    explicit PartialResult(const std::string& what) : Error(ErrorKind::NonConvergence, what) {}
};

void cmd_nld_map(Run& run) {
    const LineSpec& line = run.line();
    const auto pumps = run.list("pump_ghz");
    const auto probes = run.range("probe_min_ghz", "probe_max_ghz", "probe_step_ghz");
    if (probes.front() <= 0.0) throw io::ConfigError(run.field("probe_min_ghz"), "must be positive");
    const int port = port_named(run.str("pump_port"), run.field("pump_port"));
    auto fig = plot("Transmission dips", "f_pump (GHz)", "f_probe (GHz)");
    const bool ok = nld_map(run, line, pumps, probes, port, run.num("flux_quanta"), basis_of(run), sidebands_of(run),
                            ports_named(run.str("ports"), line.cell, run.field("ports")), "nld_map.csv", &fig);
    run.write_svg("nld_map.svg", fig);
    if (!ok) throw PartialResult("harmonic balance failed for some pump frequencies; their rows are NaN");
}

void cmd_scatter(Run& run) {
    const LineSpec& line = run.line();
    const auto net = build_chain(line, ports_named(run.str("ports"), line.cell, run.field("ports")));
    const auto grid = run.linspace("f_min_ghz", "f_max_ghz", "points");
    if (grid.front() <= 0.0) throw io::ConfigError(run.field("f_min_ghz"), "must be positive");
    io::TouchstoneData data;
    data.n_ports = kPorts;
    const double centre = ghz_to_rad(0.5 * (grid.front() + grid.back()));
    for (int p = 0; p < kPorts; ++p) data.port_ohm.push_back(port_impedance(net, p, centre));
    data.reference_ohm = data.port_ohm[SigmaLeft];
    data.comments = {"ctwpc linear scattering of the two-mode junction line",
                     "ports: 1 sigma_left, 2 delta_left, 3 sigma_right, 4 delta_right",
                     std::string("port model: ") + run.str("ports") +
                         (net.ports.kind == PortImpedance::Bloch ? " (frequency dependent; listed values at band centre)" : "")};
    for (double f : grid) {
        data.freq_hz.push_back(f * kGiga);
        data.s.push_back(linear_scattering(net, ghz_to_rad(f)));
    }
    io::write_touchstone(run.path("sweep.s4p"), data);
    run.record("sweep.s4p");
}

FrequencySweep read_sweep(const std::string& path, const std::string& sparam, const std::string& field) {
    FrequencySweep sweep;
    const fs::path p(path);
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext.size() >= 3 && ext[1] == 's' && ext.back() == 'p') {
        const auto data = io::read_touchstone(p);
        if (sparam.size() != 3 || (sparam[0] != 'S' && sparam[0] != 's'))
            throw io::ConfigError(field, "expected SIJ");
        const int out = sparam[1] - '1', in = sparam[2] - '1';
        if (out < 0 || in < 0 || out >= data.n_ports || in >= data.n_ports)
            throw io::ConfigError(field, "port index out of range for a " + std::to_string(data.n_ports) + "-port file");
        sweep.freq_hz = data.freq_hz;
        for (const auto& s : data.s) sweep.s.push_back(s(out, in));
        return sweep;
    }
    const auto csv = io::read_csv(p);
    const auto has = [&](const std::string& n) {
        return std::find(csv.header.begin(), csv.header.end(), n) != csv.header.end();
    };
    const bool ghz = has("f_GHz");
    const std::size_t fc = csv.column(ghz ? "f_GHz" : "f_Hz"), rc = csv.column("re"), ic = csv.column("im");
    for (const auto& row : csv.rows) {
        sweep.freq_hz.push_back(io::parse_double(row[fc]) * (ghz ? kGiga : 1.0));
        sweep.s.emplace_back(io::parse_double(row[rc]), io::parse_double(row[ic]));
    }
    return sweep;
}

void cmd_tdr(Run& run) {
    const std::string input = run.str("input");
    if (input.empty()) throw io::ConfigError(run.field("input"), "an input sweep is required");
    const auto sweep = read_sweep(input, run.str("s_param"), run.field("s_param"));
    Window window;
    try {
        window = parse_window(run.str("window"));
    } catch (const Error& e) {
        throw io::ConfigError(run.field("window"), e.what());
    }
    const int pad = run.integer("pad");
    if (pad < 1 || pad > 64) throw io::ConfigError(run.field("pad"), "must lie in [1, 64]");
    const auto ir = impulse_response(sweep, window, pad);
    double v = 0.0;
    if (auto given = run.opt_num("velocity")) {
        v = *given;
        if (!(v > 0.0)) throw io::ConfigError(run.field("velocity"), "must be positive");
    } else {
        const double centre = 0.5 * (sweep.freq_hz.front() + sweep.freq_hz.back());
        v = group_velocity(Mode::Sigma, kTwoPi * centre, run.line().cell);
    }
    const double offset = run.num("offset_ns");
    run.write_csv("tdr.csv", tdr_table(ir));
    run.write_json("peaks.json", peak_report(ir, v, offset));
}

// ---- figure reproduction --------------------------------------------------

void fig_gap_map(Run& run) {
    const LineSpec& line = run.line();
    const double flux = 0.05;
    std::vector<double> pumps;
    for (int i = 0; i <= 7; ++i) pumps.push_back(1.5 + 0.5 * i);
    std::vector<double> probes;
    for (int i = 0; i <= 220; ++i) probes.push_back(1.0 + 0.05 * i);
    auto fig = plot("Transmission gaps: dips and matched curves", "f_pump (GHz)", "f_probe (GHz)");
    std::vector<GapCurve> curves;
    for (const auto& [kind, dir] : all_gap_curves()) {
        GapCurve c{kind, dir, {}};
        for (double fp = 1.0; fp <= 5.5 + 1e-9; fp += 0.05) {
            const double wp = ghz_to_rad(fp);
            const auto g = gap_map({{kind, dir}}, {fp}, line.cell, delta_amplitude_for_flux(wp, flux, line.cell));
            for (const auto& p : g.front().points) c.points.push_back(p);
        }
        curves.push_back(std::move(c));
    }
    write_gap_curves(run, curves, "gap_curve_", &fig);
    const bool ok = nld_map(run, line, pumps, probes, DeltaRight, flux, HarmonicBasis{}, 2, matched_ports(line.cell),
                            "gap_map.csv", &fig);
    run.write_svg("gap_map.svg", fig);
    if (!ok) throw PartialResult("harmonic balance failed for some pump frequencies; their rows are NaN");
}

void fig_attenuation(Run& run) {
    std::vector<double> fluxes;
    for (int i = 0; i <= 24; ++i) fluxes.push_back(0.005 * i);
    auto fig = plot("Attenuation at the gap centre vs pump", "pump flux (flux quanta)", "transmission (dB)");
    auto ci = isolation_curve(run.line(), ProcessKind::Circulation, 4.63, 0.0, fluxes, std::nullopt, &fig, "Ci 4.63 GHz");
    const auto co = isolation_curve(run.line(), ProcessKind::TunableCoupling, 2.6, 1.0, fluxes, std::nullopt, &fig,
                                    "Co 2.6 GHz");
    std::istringstream rows(co.str());
    std::string line;
    std::getline(rows, line);  // header
    io::CsvTable both = ci;
    while (std::getline(rows, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        both.add_row(cells);
    }
    run.write_csv("attenuation.csv", both);
    run.write_svg("attenuation.svg", fig);
}

void fig_wave_profiles(Run& run) {
    const LineSpec& line = run.line();
    const auto net = build_chain(line, matched_ports(line.cell));
    const double w = ghz_to_rad(5.0);
    for (const auto& [port, tag] : {std::pair{SigmaLeft, "sigma"}, std::pair{DeltaLeft, "delta"}}) {
        const auto prof = wave_amplitude_profile(net, port, w);
        io::CsvTable t({"cell", "sigma_forward", "sigma_backward", "delta_forward", "delta_backward"});
        auto fig = plot(std::string("Wave amplitudes at 5 GHz, drive on ") + port_name(port), "cell", "|amplitude|");
        fig.series = {{"sigma forward", {}, {}}, {"sigma backward", {}, {}}, {"delta forward", {}, {}}, {"delta backward", {}, {}}};
        for (int n = 0; n < net.n_cells; ++n) {
            const double v[4] = {prof.sigma_fw[n], prof.sigma_bw[n], prof.delta_fw[n], prof.delta_bw[n]};
            t.add_row({static_cast<double>(n), v[0], v[1], v[2], v[3]});
            for (int k = 0; k < 4; ++k) fig.series[k].x.push_back(n), fig.series[k].y.push_back(v[k]);
        }
        run.write_csv(std::string("wave_profile_") + tag + ".csv", t);
        run.write_svg(std::string("wave_profile_") + tag + ".svg", fig);
    }
    io::CsvTable t({"f_GHz", "sigma_transmitted", "sigma_reflected", "sigma_leak_forward", "sigma_leak_backward",
                    "delta_transmitted", "delta_reflected", "delta_leak_forward", "delta_leak_backward"});
    auto fig = plot("Scattering by the defect", "f (GHz)", "power fraction");
    fig.series = {{"sigma transmitted", {}, {}}, {"delta reflected", {}, {}}, {"leak (sigma in)", {}, {}}};
    const double f_max = rad_to_ghz(cutoff(Mode::Delta, line.cell));
    for (double f = 0.5; f < f_max - 0.05; f += 0.1) {
        const auto s = linear_scattering(net, ghz_to_rad(f));
        const auto a = mode_fractions(s, Mode::Sigma), b = mode_fractions(s, Mode::Delta);
        t.add_row({f, a.transmitted, a.reflected, a.leaked_forward, a.leaked_backward, b.transmitted, b.reflected,
                   b.leaked_forward, b.leaked_backward});
        fig.series[0].x.push_back(f), fig.series[0].y.push_back(a.transmitted);
        fig.series[1].x.push_back(f), fig.series[1].y.push_back(b.reflected);
        fig.series[2].x.push_back(f), fig.series[2].y.push_back(a.leaked_forward);
    }
    run.write_csv("mode_fractions.csv", t);
    run.write_svg("mode_fractions.svg", fig);
}

void fig_reflectometry(Run& run) {
    LineSpec line = run.line();
    line.disorder_halfwidth = run.num("disorder_halfwidth");
    const auto net = build_chain(line, matched_ports(line.cell));
    const double v = group_velocity(Mode::Sigma, ghz_to_rad(6.0), line.cell);
    json report = json::object();
    auto fig = plot("Reflectometry of the simulated line", "t (ns)", "|h|");
    for (const auto& [port, tag] : {std::pair{SigmaLeft, "left"}, std::pair{SigmaRight, "right"}}) {
        const auto sweep = scattering_sweep(net, port, port, 4.0, 8.0, 401);
        const auto ir = impulse_response(sweep);
        const auto t_max = 3.0 * line.n_cells / v;
        run.write_csv(std::string("reflectometry_") + tag + ".csv", tdr_table(ir, t_max));
        report[tag] = peak_report(ir, v, 0.0);
        io::PlotSeries s{std::string("from the ") + tag, {}, {}};
        for (std::size_t i = 0; i < ir.t_ns.size() && ir.t_ns[i] <= t_max; ++i)
            s.x.push_back(ir.t_ns[i]), s.y.push_back(std::abs(ir.amplitude[i]));
        fig.series.push_back(std::move(s));
    }
    run.write_json("reflectometry_peaks.json", report);
    run.write_svg("reflectometry.svg", fig);
}

// ---- dispatch -------------------------------------------------------------

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NonConvergence: return kExitNonConvergence;
        case ErrorKind::Io: return kExitIo;
        default: return kExitConfig;
    }
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, int code,
                  const std::string& field = {}) {
    json e = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    if (!field.empty()) e["field"] = field;
    err << json{{"error", e}}.dump() << "\n";
}

}  // namespace

io::json default_config() {
    const LineSpec spec = presets::fitted_device_with_defect();
    json line = {{"preset", "fitted"}, {"n_cells", spec.n_cells}, {"defects", json::array()}, {"disorder_halfwidth", 0.0},
                 {"seed", 0}};
    for (const auto& d : spec.defects) line["defects"].push_back({{"cell", d.cell_index}, {"kind", "open_junction"}});
    return {{"line", line}};
}

io::json default_params(const std::string& command) {
    json p = json::object();
    for (const auto& def : param_table().at(command)) p[def.name] = def.fallback;
    return p;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation toolkit for two-mode Josephson traveling-wave lines", "ctwpc"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    int threads = 1;
    app.add_option("--config", config_path, "JSON configuration (line and params sections)");
    app.add_option("--seed", seed, "disorder seed, overrides line.seed");
    app.add_option("--threads", threads, "worker threads for transmission maps")->check(CLI::Range(1, 256));
    app.add_option("--out-dir", out_dir, "output directory");

    std::map<std::string, std::map<std::string, std::string>> raw;
    std::map<std::string, CLI::App*> subs;
    std::string figure;
    const std::map<std::string, std::string> help = {
        {"dispersion", "wavevectors and phase velocities of both modes"},
        {"phase-match", "phase-matched points of the wave-mixing processes"},
        {"gaps-map", "matched probe frequency against pump frequency for every process"},
        {"envelope", "signal and idler envelopes along a uniform line"},
        {"isolate", "forward and backward attenuation against pump amplitude"},
        {"nld-sim", "pump harmonic balance and probe sidebands at one point"},
        {"nld-map", "transmission map over pump and probe frequencies"},
        {"scatter", "linear 4-port scattering sweep (Touchstone)"},
        {"tdr", "impulse response and reflection peaks of a sweep"},
        {"reproduce-fig", "regenerate a figure data set: 2, 3b, S6 or S4"},
    };
    for (const auto& [name, defs] : param_table()) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->fallthrough();
        subs[name] = sub;
        for (const auto& def : defs) {
            if (def.fallback.is_boolean()) {
                sub->add_flag_callback(flag_name(def.name), [&raw, name = name, key = def.name] { raw[name][key] = "true"; },
                                       def.help);
            } else {
                sub->add_option(flag_name(def.name), raw[name][def.name], def.help);
            }
        }
        if (name == "reproduce-fig")
            sub->add_option("figure", figure, "figure id")->required()->check(CLI::IsMember({"2", "3b", "S6", "S4"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        report_error(err, "Config", e.what(), kExitConfig);
        return kExitConfig;
    }

    std::string command;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;

    std::unique_ptr<Run> ctx;
    try {
        json config = default_config();
        if (!config_path.empty()) {
            try {
                config = json::parse(io::read_text(config_path));
            } catch (const json::parse_error& e) {
                throw io::ConfigError("config", e.what());
            }
            if (!config.is_object()) throw io::ConfigError("config", "expected an object");
            for (const auto& [key, _] : config.items())
                if (key != "line" && key != "params") throw io::ConfigError(key, "unknown key");
        }
        LineSpec line = io::line_spec_from_json(config.value("line", json::object()), "line");
        if (seed) line.seed = *seed;

        json params = default_params(command);
        if (config.contains("params") && config["params"].contains(command)) {
            const auto& given = config["params"][command];
            if (!given.is_object()) throw io::ConfigError("params." + command, "expected an object");
            for (const auto& [key, value] : given.items()) {
                if (!params.contains(key)) throw io::ConfigError("params." + command + "." + key, "unknown key");
                params[key] = value;
            }
        }
        for (const auto& def : param_table().at(command)) {
            const auto* opt = subs[command]->get_option_no_throw(flag_name(def.name));
            if (opt && opt->count() > 0)
                params[def.name] = parse_flag(def, raw[command][def.name], "params." + command + "." + def.name);
            else if (def.fallback.is_boolean() && raw[command].count(def.name))
                params[def.name] = true;
        }
        if (command == "reproduce-fig") params["figure"] = figure;

        ctx = std::make_unique<Run>(command, out_dir, line, params, threads);
        static const std::map<std::string, std::function<void(Run&)>> bodies = {
            {"dispersion", cmd_dispersion}, {"phase-match", cmd_phase_match}, {"gaps-map", cmd_gaps_map},
            {"envelope", cmd_envelope},     {"isolate", cmd_isolate},         {"nld-sim", cmd_nld_sim},
            {"nld-map", cmd_nld_map},       {"scatter", cmd_scatter},         {"tdr", cmd_tdr},
        };
        if (command == "reproduce-fig") {
            if (figure == "2") fig_gap_map(*ctx);
            else if (figure == "3b") fig_attenuation(*ctx);
            else if (figure == "S6") fig_wave_profiles(*ctx);
            else fig_reflectometry(*ctx);
        } else {
            bodies.at(command)(*ctx);
        }
        ctx->finish();
        out << json{{"status", "ok"}, {"command", command}, {"out_dir", out_dir}, {"outputs", ctx->manifest().outputs.size()}}
                   .dump()
            << "\n";
        return kExitOk;
    } catch (const io::ConfigError& e) {
        report_error(err, to_string(e.kind()), e.what(), kExitConfig, e.field());
        return kExitConfig;
    } catch (const Error& e) {
        const int code = exit_code_for(e.kind());
        if (ctx && code == kExitNonConvergence) {
            ctx->manifest().partial = true;
            try {
                ctx->finish();
            } catch (const Error&) {
            }
        }
        report_error(err, to_string(e.kind()), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        report_error(err, "Internal", e.what(), kExitInternal);
        return kExitInternal;
    }
}

}  // namespace ctwpc::cli
