#include "superrad/params.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "superrad/kvfile.hpp"

namespace superrad {

double SystemParams::gamma_c() const {
    if (kappa <= 0.0)
        throw ConfigError("gamma_c = g^2/kappa requires kappa > 0: the collective "
                          "decay rate only exists under the bad-cavity assumption");
    return coupling * coupling / kappa;
}

void SystemParams::validate() const {
    if (n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
    if (coupling < 0 || kappa < 0 || pump < 0 || gamma_free < 0)
        throw ConfigError("rates must be non-negative");
    if (photon_cutoff < 0) throw ConfigError("photon_cutoff must be >= 0");
}

SystemParams SystemParams::adiabatic(int n_atoms, double gamma_c, double pump) {
    if (gamma_c <= 0) throw ConfigError("adiabatic params require Gamma_c > 0");
    SystemParams p;
    p.n_atoms = n_atoms;
    p.kappa = 1000.0 * n_atoms * gamma_c;
    p.coupling = std::sqrt(gamma_c * p.kappa);
    p.pump = pump;
    p.validate();
    return p;
}

ValidityReport validity_report(const SystemParams& p, double margin) {
    ValidityReport r;
    r.margin = margin;
    const double gc = p.kappa > 0 ? p.coupling * p.coupling / p.kappa : 0.0;
    if (p.gamma_free == 0.0) {
        r.cooperativity_infinite = true;
        r.cooperativity = std::numeric_limits<double>::infinity();
        r.collective_cooperativity = std::numeric_limits<double>::infinity();
        r.note = "free-space decay neglected";
        r.collective_strong_coupling = true;
        r.bad_cavity = true;
        // kappa/(N*C*gamma) reduces to kappa/(N*Gamma_c); gamma cancels.
        r.bad_cavity_ratio = gc > 0 ? p.kappa / (p.n_atoms * gc)
                                    : std::numeric_limits<double>::infinity();
        return r;
    }
    r.cooperativity = p.coupling * p.coupling / (p.kappa * p.gamma_free);
    r.collective_cooperativity = p.n_atoms * r.cooperativity;
    r.bad_cavity_ratio =
        p.kappa / (r.collective_cooperativity * p.gamma_free);
    r.collective_strong_coupling = r.collective_cooperativity >= margin;
    r.bad_cavity = r.bad_cavity_ratio >= margin;
    return r;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Subradiant: return "subradiant";
        case Regime::LowerThreshold: return "threshold(w=Gamma_c)";
        case Regime::Superradiant: return "superradiant";
        case Regime::UpperThreshold: return "threshold(w=N*Gamma_c)";
        case Regime::StrongPumping: return "strong-pumping";
    }
    return "?";
}

Regime classify_regime(double pump, int n_atoms, double gamma_c) {
    if (gamma_c <= 0) throw ConfigError("classify_regime requires Gamma_c > 0");
    const double x = pump / gamma_c; // scale-invariant control parameter
    if (x < 1.0) return Regime::Subradiant;
    if (x == 1.0) return Regime::LowerThreshold;
    if (x < static_cast<double>(n_atoms)) return Regime::Superradiant;
    if (x == static_cast<double>(n_atoms)) return Regime::UpperThreshold;
    return Regime::StrongPumping;
}

Regime classify_regime(double pump, const SystemParams& p) {
    return classify_regime(pump, p.n_atoms, p.gamma_c());
}

// --- parameter files -------------------------------------------------------

namespace {

using kv::to_double;
using kv::to_int;

} // namespace

SystemParams load_params(std::istream& in) {
    auto kv = kv::parse(in);
    if (!kv.count("schema_version"))
        throw ConfigError("parameter file is missing mandatory schema_version");
    if (to_int("schema_version", kv["schema_version"]) != kParamsSchemaVersion)
        throw ConfigError("unsupported parameter schema_version (expect " +
                          std::to_string(kParamsSchemaVersion) + ")");
    kv.erase("schema_version");

    SystemParams p;
    auto take = [&kv](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return {};
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    if (auto v = take("n_atoms"); !v.empty()) p.n_atoms = to_int("n_atoms", v);
    if (auto v = take("coupling"); !v.empty()) p.coupling = to_double("coupling", v);
    if (auto v = take("kappa"); !v.empty()) p.kappa = to_double("kappa", v);
    if (auto v = take("pump"); !v.empty()) p.pump = to_double("pump", v);
    if (auto v = take("gamma_free"); !v.empty()) p.gamma_free = to_double("gamma_free", v);
    if (auto v = take("detuning"); !v.empty()) p.detuning = to_double("detuning", v);
    if (auto v = take("photon_cutoff"); !v.empty()) p.photon_cutoff = to_int("photon_cutoff", v);
    if (!kv.empty())
        throw ConfigError("unknown parameter key '" + kv.begin()->first + "'");
    p.validate();
    return p;
}

SystemParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open parameter file: " + path);
    return load_params(in);
}

void save_params(std::ostream& out, const SystemParams& p) {
    out.precision(17);
    out << "schema_version = " << kParamsSchemaVersion << "\n"
        << "n_atoms = " << p.n_atoms << "\n"
        << "coupling = " << p.coupling << "\n"
        << "kappa = " << p.kappa << "\n"
        << "pump = " << p.pump << "\n"
        << "gamma_free = " << p.gamma_free << "\n"
        << "detuning = " << p.detuning << "\n"
        << "photon_cutoff = " << p.photon_cutoff << "\n";
}

void save_params_file(const std::string& path, const SystemParams& p) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write parameter file: " + path);
    save_params(out, p);
}

} // namespace superrad
