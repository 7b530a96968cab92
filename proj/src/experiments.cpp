#include "superrad/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "superrad/correlation.hpp"
#include "superrad/kvfile.hpp"
#include "superrad/operators.hpp"
#include "superrad/semiclassical.hpp"
#include "superrad/svgplot.hpp"
#include "superrad/trajectory.hpp"

namespace superrad {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot hash missing file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64(ss.str());
}

const std::vector<double>& fig3_pump_grid() {
    static const std::vector<double> grid = {0.1, 0.25, 0.5, 1.0, 2.0,
                                             5.0, 10.0, 20.0, 50.0, 100.0};
    return grid;
}

// ---------------------------------------------------------------------------
// config

namespace {

const std::vector<std::string>& known_experiments() {
    static const std::vector<std::string> ids = {"fig3",  "fig4",  "fig5a",
                                                 "fig5b", "fig5c", "sweep",
                                                 "custom"};
    return ids;
}

std::string canonical_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "experiment=" << c.experiment << "\nn_atoms=" << c.n_atoms
       << "\ngamma_c=" << c.gamma_c << "\nw_over_gc=" << c.w_over_gc
       << "\nn_trajectories=" << c.n_trajectories << "\nduration=" << c.duration
       << "\nburn_in=" << c.burn_in << "\nbin_width=" << c.bin_width
       << "\nn_lags=" << c.n_lags << "\nsample_stride=" << c.sample_stride
       << "\nmaster_seed=" << c.master_seed << "\nmodel=" << c.model
       << "\nphoton_cutoff=" << c.photon_cutoff
       << "\nkappa_over_gc=" << c.kappa_over_gc
       << "\nintegrator=" << c.integrator << "\n";
    return os.str();
}

} // namespace

ExperimentConfig load_experiment_config(std::istream& in) {
    auto m = kv::parse(in);
    if (!m.count("schema_version"))
        throw ConfigError("experiment config is missing mandatory schema_version");
    if (kv::to_int("schema_version", m["schema_version"]) != kConfigSchemaVersion)
        throw ConfigError("unsupported experiment config schema_version");
    m.erase("schema_version");

    ExperimentConfig c;
    auto take = [&m](const char* key) -> std::string {
        auto it = m.find(key);
        if (it == m.end()) return {};
        std::string v = it->second;
        m.erase(it);
        return v;
    };
    if (auto v = take("experiment"); !v.empty()) c.experiment = v;
    if (auto v = take("n_atoms"); !v.empty()) c.n_atoms = kv::to_int("n_atoms", v);
    if (auto v = take("gamma_c"); !v.empty()) c.gamma_c = kv::to_double("gamma_c", v);
    if (auto v = take("w_over_gc"); !v.empty()) c.w_over_gc = kv::to_double("w_over_gc", v);
    if (auto v = take("n_trajectories"); !v.empty()) c.n_trajectories = kv::to_int("n_trajectories", v);
    if (auto v = take("duration"); !v.empty()) c.duration = kv::to_double("duration", v);
    if (auto v = take("burn_in"); !v.empty()) c.burn_in = kv::to_double("burn_in", v);
    if (auto v = take("bin_width"); !v.empty()) c.bin_width = kv::to_double("bin_width", v);
    if (auto v = take("n_lags"); !v.empty()) c.n_lags = kv::to_int("n_lags", v);
    if (auto v = take("sample_stride"); !v.empty()) c.sample_stride = kv::to_double("sample_stride", v);
    if (auto v = take("master_seed"); !v.empty()) c.master_seed = uint64_t(kv::to_long("master_seed", v));
    if (auto v = take("out_dir"); !v.empty()) c.out_dir = v;
    if (auto v = take("threads"); !v.empty()) c.threads = kv::to_int("threads", v);
    if (auto v = take("no_plots"); !v.empty()) c.no_plots = kv::to_int("no_plots", v) != 0;
    if (auto v = take("model"); !v.empty()) c.model = v;
    if (auto v = take("photon_cutoff"); !v.empty()) c.photon_cutoff = kv::to_int("photon_cutoff", v);
    if (auto v = take("kappa_over_gc"); !v.empty()) c.kappa_over_gc = kv::to_double("kappa_over_gc", v);
    if (auto v = take("integrator"); !v.empty()) c.integrator = v;
    if (!m.empty())
        throw ConfigError("unknown experiment config key '" + m.begin()->first + "'");
    if (c.experiment.empty())
        throw ConfigError("experiment config must set 'experiment'");
    bool known = false;
    for (const auto& id : known_experiments()) known = known || id == c.experiment;
    if (!known) throw ConfigError("unknown experiment id '" + c.experiment + "'");
    if (c.n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
    if (c.gamma_c <= 0) throw ConfigError("gamma_c must be > 0");
    return c;
}

ExperimentConfig load_experiment_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment config: " + path);
    return load_experiment_config(in);
}

// ---------------------------------------------------------------------------
// experiment machinery

namespace {

struct McDefaults {
    int n_trajectories;
    double duration; // 1/gamma_c units
    double burn_in;
    int n_lags;
};

McDefaults mc_defaults(double w_over_gc, int n_atoms) {
    switch (classify_regime(w_over_gc, n_atoms, 1.0)) {
        case Regime::Subradiant:
        case Regime::LowerThreshold:
            return {12, 1500.0, 150.0, 120};
        case Regime::Superradiant:
        case Regime::UpperThreshold:
            return {8, 300.0, 20.0, 120};
        case Regime::StrongPumping:
            return {8, 200.0, 10.0, 150};
    }
    return {8, 300.0, 20.0, 120};
}

struct McPoint {
    EnsembleResult ensemble;
    G2Estimate g2;
    G2ZeroEstimate g2_states;
};

struct Runner {
    const ExperimentConfig& cfg;
    Manifest manifest;
    fs::path dir;
    std::chrono::steady_clock::time_point t_start;

    explicit Runner(const ExperimentConfig& c)
        : cfg(c), t_start(std::chrono::steady_clock::now()) {
        const char* root = std::getenv("SUPERRAD_OUT_ROOT");
        dir = root && fs::path(cfg.out_dir).is_relative()
                  ? fs::path(root) / cfg.out_dir
                  : fs::path(cfg.out_dir);
        fs::create_directories(dir);
        manifest.experiment = cfg.experiment;
        manifest.master_seed = cfg.master_seed;
        manifest.config_hash = fnv1a64(canonical_config(cfg));
        manifest.library_version = kVersion;
        manifest.directory = dir.string();
    }

    void register_output(const std::string& name, const std::string& kind) {
        ManifestEntry e;
        e.path = name;
        e.kind = kind;
        const std::string full = (dir / name).string();
        e.fnv1a64 = fnv1a64_file(full);
        std::ifstream in(full);
        std::string line;
        while (std::getline(in, line)) ++e.n_rows;
        manifest.outputs.push_back(e);
    }

    // Runs step(), recording a partial failure instead of propagating it.
    template <typename F>
    void output_step(const std::string& name, F&& step) {
        try {
            step();
        } catch (const std::exception& e) {
            manifest.complete = false;
            std::string kind = "error";
            if (dynamic_cast<const ConfigError*>(&e)) kind = "config";
            else if (dynamic_cast<const CapacityError*>(&e)) kind = "capacity";
            else if (dynamic_cast<const NumericalError*>(&e)) kind = "numerical";
            manifest.incomplete_outputs.push_back(name + " [" + kind + "]: " +
                                                  e.what());
        }
    }

    McPoint run_mc_point(double w_over_gc, uint64_t seed_offset) const {
        const double gc = cfg.gamma_c;
        SystemParams params;
        OperatorSet ops;
        if (cfg.model == "full") {
            params.n_atoms = cfg.n_atoms;
            const double kog = cfg.kappa_over_gc > 0 ? cfg.kappa_over_gc
                                                     : 1000.0 * cfg.n_atoms;
            params.kappa = kog * gc;
            params.coupling = std::sqrt(gc * params.kappa);
            params.pump = w_over_gc * gc;
            params.photon_cutoff = cfg.photon_cutoff > 0 ? cfg.photon_cutoff : 6;
            ops = build_full_model(params);
        } else if (cfg.model == "adiabatic") {
            params = SystemParams::adiabatic(cfg.n_atoms, gc, w_over_gc * gc);
            ops = build_adiabatic_model(params);
        } else {
            throw ConfigError("model must be 'adiabatic' or 'full'");
        }

        const McDefaults def = mc_defaults(w_over_gc, cfg.n_atoms);
        EnsembleConfig ec;
        ec.n_trajectories =
            cfg.n_trajectories > 0 ? cfg.n_trajectories : def.n_trajectories;
        ec.duration = (cfg.duration > 0 ? cfg.duration : def.duration) / gc;
        ec.burn_in = (cfg.burn_in >= 0 ? cfg.burn_in : def.burn_in) / gc;
        ec.master_seed = cfg.master_seed + seed_offset;
        ec.sample_stride =
            cfg.sample_stride > 0 ? cfg.sample_stride / gc : 0.5 / gc;
        ec.observables = {"s", "p", "z2", "jpjm", "jppjmm"};
        if (cfg.model == "full") {
            ec.observables.push_back("n_phot");
            ec.observables.push_back("nn_phot");
        }
        ec.threads = cfg.threads;
        ec.engine.integrator = integrator_from_name(cfg.integrator);

        McPoint point{run_ensemble(ops, ec), {}, {}};
        const double bw = cfg.bin_width > 0
                              ? cfg.bin_width / gc
                              : default_bin_width(w_over_gc * gc, cfg.n_atoms, gc);
        const int lags = cfg.n_lags > 0 ? cfg.n_lags : def.n_lags;
        point.g2 = g2_histogram(point.ensemble.records, "cavity", bw, lags);
        point.g2_states = g2_zero_from_states(point.ensemble, ops);
        return point;
    }

    void write_sweep_csv(const std::string& name, int n_atoms,
                         const std::vector<double>& grid, bool fig4_columns,
                         const std::string& kind) {
        const auto rows = sweep_closed_form(n_atoms, grid);
        std::ofstream out(dir / name);
        if (!out) throw ConfigError("cannot write " + name);
        char buf[64];
        out << "# sweep_csv_schema 1\n# n_atoms " << n_atoms << "\n";
        out << (fig4_columns ? "w_over_gc,s,p,z2,z2_minus_s2,g2_zero,flag"
                             : "w_over_gc,s,p,z2,g2_zero,flag")
            << "\n";
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%.17g", r.w_over_gc);
            out << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", r.corr.s);
            out << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", r.corr.p);
            out << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", r.corr.z2);
            out << buf << ',';
            if (fig4_columns) {
                std::snprintf(buf, sizeof buf, "%.17g",
                              r.corr.z2 - r.corr.s * r.corr.s);
                out << buf << ',';
            }
            std::snprintf(buf, sizeof buf, "%.17g", r.g2_zero);
            out << buf << ',' << (r.corr.below_threshold ? 1 : 0) << "\n";
        }
        out.close();
        register_output(name, kind);
    }

    void finish() {
        manifest.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t_start)
                .count();
        json j;
        j["schema_version"] = manifest.schema_version;
        j["experiment"] = manifest.experiment;
        j["master_seed"] = manifest.master_seed;
        j["config_hash"] = manifest.config_hash;
        j["library_version"] = manifest.library_version;
        j["wall_time_s"] = manifest.wall_time_s;
        j["complete"] = manifest.complete;
        j["incomplete_outputs"] = manifest.incomplete_outputs;
        j["outputs"] = json::array();
        for (const auto& e : manifest.outputs)
            j["outputs"].push_back({{"path", e.path},
                                    {"kind", e.kind},
                                    {"fnv1a64", e.fnv1a64},
                                    {"n_rows", e.n_rows}});
        std::ofstream out(dir / "manifest.json");
        out << j.dump(2) << "\n";
    }
};

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    g.reserve(n);
    for (int i = 0; i < n; ++i)
        g.push_back(lo * std::pow(hi / lo, double(i) / double(n - 1)));
    return g;
}

std::string w_tag(double w) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", w);
    std::string s = buf;
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

void run_fig3(Runner& r) {
    std::ostringstream mc_csv;
    mc_csv << "# fig3_csv_schema 1\n"
           << "# n_atoms " << r.cfg.n_atoms << "\n"
           << "w_over_gc,g2,g2_err,g2_states,g2_states_err,n_triggers\n";
    uint64_t offset = 1;
    for (double w : fig3_pump_grid()) {
        const std::string rec_name = "records_w" + w_tag(w) + ".txt";
        r.output_step("fig3 point w=" + w_tag(w), [&] {
            const McPoint point = r.run_mc_point(w, offset);
            write_records_file((r.dir / rec_name).string(),
                               point.ensemble.records);
            r.register_output(rec_name, "records");
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", w);
            mc_csv << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", point.g2.values.at(0));
            mc_csv << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", point.g2.std_errors.at(0));
            mc_csv << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", point.g2_states.value);
            mc_csv << buf << ',';
            std::snprintf(buf, sizeof buf, "%.17g", point.g2_states.std_error);
            mc_csv << buf << ',' << point.g2.n_phot << "\n";
        });
        offset += 1;
    }
    r.output_step("fig3 Monte-Carlo CSV", [&] {
        std::ofstream out(r.dir / "mc_g2zero.csv");
        out << mc_csv.str();
        out.close();
        r.register_output("mc_g2zero.csv", "g2_vs_w");
    });
    for (int n : {10, 100, 1000}) {
        r.output_step("fig3 semiclassical N=" + std::to_string(n), [&] {
            r.write_sweep_csv("semiclassical_N" + std::to_string(n) + ".csv", n,
                              log_grid(1.05, 10.0 * n, 240), false, "sweep");
        });
    }
}

void run_fig4(Runner& r) {
    for (int n : {10, 100, 1000}) {
        r.output_step("fig4 sweep N=" + std::to_string(n), [&] {
            r.write_sweep_csv("sweep_N" + std::to_string(n) + ".csv", n,
                              log_grid(0.05, 4.0 * n, 240), true, "sweep_fig4");
        });
    }
}

void run_fig5(Runner& r, char panel) {
    const double w = panel == 'a' ? 0.25 : panel == 'b' ? 5.0 : 100.0;
    r.output_step(std::string("fig5") + panel, [&] {
        const McPoint point = r.run_mc_point(w, 1);
        write_records_file((r.dir / "records.txt").string(),
                           point.ensemble.records);
        r.register_output("records.txt", "records");
        const bool thermal = panel == 'c';
        write_g2_csv_file((r.dir / "g2_tau.csv").string(), point.g2,
                          thermal ? std::optional<double>(w * r.cfg.gamma_c)
                                  : std::nullopt);
        r.register_output("g2_tau.csv", "g2_tau");
    });
}

void run_sweep(Runner& r) {
    r.output_step("sweep", [&] {
        const int n = r.cfg.n_atoms;
        const double hi = r.cfg.w_over_gc > 1 ? r.cfg.w_over_gc : 4.0 * n;
        r.write_sweep_csv("sweep_N" + std::to_string(n) + ".csv", n,
                          log_grid(1.05, hi, 200), false, "sweep");
    });
}

void run_custom(Runner& r) {
    if (r.cfg.w_over_gc <= 0)
        throw ConfigError("custom experiment requires w_over_gc > 0");
    r.output_step("custom", [&] {
        const McPoint point = r.run_mc_point(r.cfg.w_over_gc, 1);
        write_records_file((r.dir / "records.txt").string(),
                           point.ensemble.records);
        r.register_output("records.txt", "records");
        write_g2_csv_file((r.dir / "g2_tau.csv").string(), point.g2);
        r.register_output("g2_tau.csv", "g2_tau");
    });
}

// --- CSV reading for the plot emitter ---------------------------------------

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int col(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return int(i);
        return -1;
    }
    std::vector<double> column(const std::string& name) const {
        const int c = col(name);
        if (c < 0) throw ConfigError("CSV is missing column '" + name + "'");
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& row : rows) v.push_back(row.at(c));
        return v;
    }
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV: " + path);
    CsvTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            cells.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (t.columns.empty()) {
            t.columns = cells;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(c.empty() ? 0.0 : std::stod(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

const char* kPalette[] = {"#1f6fb2", "#9450a8", "#d9a514", "#2c9a5b", "#c0392b"};

} // namespace

Manifest run_experiment(const ExperimentConfig& cfg) {
    Runner r(cfg);
    if (cfg.experiment == "fig3") run_fig3(r);
    else if (cfg.experiment == "fig4") run_fig4(r);
    else if (cfg.experiment == "fig5a") run_fig5(r, 'a');
    else if (cfg.experiment == "fig5b") run_fig5(r, 'b');
    else if (cfg.experiment == "fig5c") run_fig5(r, 'c');
    else if (cfg.experiment == "sweep") run_sweep(r);
    else if (cfg.experiment == "custom") run_custom(r);
    else throw ConfigError("unknown experiment id '" + cfg.experiment + "'");
    r.finish();
    if (!cfg.no_plots) {
        const auto missing = emit_plots(r.manifest);
        for (const auto& m : missing)
            r.manifest.incomplete_outputs.push_back("plot input missing: " + m);
    }
    return r.manifest;
}

Manifest read_manifest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path);
    json j;
    in >> j;
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    m.experiment = j.at("experiment").get<std::string>();
    m.master_seed = j.at("master_seed").get<uint64_t>();
    m.config_hash = j.at("config_hash").get<uint64_t>();
    m.library_version = j.value("library_version", "");
    m.wall_time_s = j.value("wall_time_s", 0.0);
    m.complete = j.value("complete", true);
    for (const auto& s : j.value("incomplete_outputs", json::array()))
        m.incomplete_outputs.push_back(s.get<std::string>());
    for (const auto& e : j.at("outputs")) {
        ManifestEntry me;
        me.path = e.at("path").get<std::string>();
        me.kind = e.at("kind").get<std::string>();
        me.fnv1a64 = e.at("fnv1a64").get<uint64_t>();
        me.n_rows = e.value("n_rows", 0l);
        m.outputs.push_back(me);
    }
    m.directory = fs::path(path).parent_path().string();
    return m;
}

std::vector<std::string> emit_plots(const Manifest& manifest) {
    std::vector<std::string> missing;
    if (manifest.outputs.empty()) return missing; // nothing to render
    const fs::path dir = manifest.directory;

    auto svg_path = [&](const std::string& csv) {
        fs::path p = dir / csv;
        p.replace_extension(".svg");
        return p.string();
    };

    // fig3-style overlays need the semiclassical companions up front.
    std::vector<std::pair<std::string, CsvTable>> sweeps;
    for (const auto& e : manifest.outputs) {
        if (e.kind != "sweep" && e.kind != "sweep_fig4") continue;
        const std::string full = (dir / e.path).string();
        if (!fs::exists(full)) {
            missing.push_back(e.path);
            continue;
        }
        sweeps.emplace_back(e.path, read_csv(full));
    }

    for (const auto& e : manifest.outputs) {
        const std::string full = (dir / e.path).string();
        if (e.kind == "records" || e.kind == "plot") continue;
        if (!fs::exists(full)) {
            missing.push_back(e.path);
            continue;
        }
        if (e.kind == "g2_tau") {
            const CsvTable t = read_csv(full);
            PlotPanel panel;
            panel.axes.title = manifest.experiment + ": intensity correlation";
            panel.axes.xlabel = "tau [1/Gamma_c]";
            panel.axes.ylabel = "g2(tau)";
            panel.axes.hguides = {1.0, 2.0};
            PlotSeries mc;
            mc.label = "Monte-Carlo";
            mc.x = t.column("tau");
            mc.y = t.column("g2");
            mc.yerr = t.column("g2_err");
            mc.points = true;
            panel.series.push_back(std::move(mc));
            if (t.col("thermal") >= 0) {
                PlotSeries th;
                th.label = "thermal reference";
                th.x = t.column("tau");
                th.y = t.column("thermal");
                th.color = kPalette[1];
                th.dashed = true;
                panel.series.push_back(std::move(th));
            }
            write_svg_file(svg_path(e.path), {panel});
        } else if (e.kind == "g2_vs_w") {
            const CsvTable t = read_csv(full);
            PlotPanel panel;
            panel.axes.title = "g2(0) vs pump strength";
            panel.axes.xlabel = "w/Gamma_c";
            panel.axes.ylabel = "g2(0)";
            panel.axes.logx = true;
            panel.axes.hguides = {1.0, 2.0};
            int ci = 1;
            for (const auto& [name, sweep] : sweeps) {
                if (name.find("semiclassical_N") == std::string::npos) continue;
                PlotSeries s;
                const auto n0 = name.find('N');
                s.label = "semiclassical " + name.substr(n0, name.find('.') - n0);
                s.x = sweep.column("w_over_gc");
                s.y = sweep.column("g2_zero");
                s.color = kPalette[ci++ % 5];
                panel.series.push_back(std::move(s));
            }
            PlotSeries mc;
            mc.label = "Monte-Carlo";
            mc.x = t.column("w_over_gc");
            mc.y = t.column("g2");
            mc.yerr = t.column("g2_err");
            mc.points = true;
            mc.line = false;
            mc.color = kPalette[3];
            panel.series.push_back(std::move(mc));
            write_svg_file(svg_path(e.path), {panel});
        } else if (e.kind == "sweep" || e.kind == "sweep_fig4") {
            const CsvTable t = read_csv(full);
            const bool fig4 = e.kind == "sweep_fig4";
            std::vector<PlotPanel> panels(3);
            const char* ylabels[3] = {"<sigma_z>", "<sp sm>",
                                      fig4 ? "z2 - s^2" : "g2(0)"};
            const char* fields[3] = {"s", "p", fig4 ? "z2_minus_s2" : "g2_zero"};
            for (int i = 0; i < 3; ++i) {
                panels[i].axes.xlabel = "w/Gamma_c";
                panels[i].axes.ylabel = ylabels[i];
                panels[i].axes.logx = true;
                if (i == 0)
                    panels[i].axes.title =
                        manifest.experiment + ": steady-state pair correlations";
                PlotSeries s;
                s.x = t.column("w_over_gc");
                s.y = t.column(fields[i]);
                panels[i].series.push_back(std::move(s));
            }
            write_svg_file(svg_path(e.path), panels, 640, 240);
        }
    }
    return missing;
}

} // namespace superrad
