#include "atomgrav/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace atomgrav {

namespace {

using nlohmann::json;

const std::map<std::string, std::map<std::string, double>>& unit_tables() {
    static const std::map<std::string, std::map<std::string, double>> tables = {
        {"time", {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}}},
        {"chirp", {{"Hz/s", 1.0}, {"kHz/s", 1e3}, {"MHz/s", 1e6}, {"GHz/s", 1e9}}},
        {"frequency", {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}}},
        {"momentum", {{"hbar_k", 1.0}}},
        {"length", {{"m", 1.0}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}}},
        {"acceleration", {{"m/s^2", 1.0}}},
        {"temperature", {{"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}, {"nK", 1e-9}}},
        {"angle", {{"rad", 1.0}, {"mrad", 1e-3}, {"deg", std::numbers::pi / 180.0}}},
        {"curvature", {{"rad/m^2", 1.0}}},
        {"quartic", {{"rad/m^4", 1.0}}},
        {"depth", {{"Er", 1.0}}},
    };
    return tables;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

std::string expected_units(const std::string& dimension) {
    std::string s;
    for (const auto& [u, f] : unit_tables().at(dimension)) {
        if (!s.empty()) s += ", ";
        s += "\"" + u + "\"";
    }
    return s;
}

const json* find(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

}  // namespace

double parse_quantity(const json& j, const std::string& path, const std::string& dimension) {
    const auto& table = unit_tables().at(dimension);
    if (!j.is_string()) {
        fail(path, "physical quantities need an explicit unit string like \"3 ms\" (units: " +
                       expected_units(dimension) + ")");
    }
    const std::string s = j.get<std::string>();
    std::istringstream in(s);
    double value = 0.0;
    std::string unit;
    if (!(in >> value)) fail(path, "cannot parse a number from \"" + s + "\"");
    in >> unit;
    std::string extra;
    if (in >> extra) fail(path, "trailing text after unit in \"" + s + "\"");
    auto it = table.find(unit);
    if (it == table.end())
        fail(path, "unit \"" + unit + "\" is not a " + dimension + " unit (expected one of " +
                       expected_units(dimension) + ")");
    return value * it->second;
}

namespace {

double quantity_field(const json& j, const std::string& parent, const std::string& key,
                      const std::string& dimension, double fallback, bool required = false) {
    const json* f = find(j, key);
    if (!f) {
        if (required) fail(parent + "." + key, "missing required field");
        return fallback;
    }
    return parse_quantity(*f, parent + "." + key, dimension);
}

double number_field(const json& j, const std::string& parent, const std::string& key,
                    double fallback, bool required = false) {
    const json* f = find(j, key);
    if (!f) {
        if (required) fail(parent + "." + key, "missing required field");
        return fallback;
    }
    if (!f->is_number()) fail(parent + "." + key, "expected a plain number");
    return f->get<double>();
}

std::string canonical(double v, const char* unit) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    if (unit[0] != '\0') out << ' ' << unit;
    return out.str();
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("$: config root must be a JSON object");
    for (const auto& [key, val] : j.items()) {
        static const char* known[] = {"name",     "notes", "gravity",    "source",
                                      "velocity_select", "sequence",   "aberration",
                                      "scan",     "fit"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) fail("$." + key, "unknown top-level field");
    }

    ExperimentConfig c;
    if (const json* f = find(j, "name")) c.name = f->get<std::string>();
    if (const json* f = find(j, "notes")) c.notes = f->get<std::string>();

    if (const json* g = find(j, "gravity")) {
        c.g_true = quantity_field(*g, "$.gravity", "g_true", "acceleration", c.g_true);
        c.g_ref = quantity_field(*g, "$.gravity", "g_ref", "acceleration", c.g_true);
        c.tilt = quantity_field(*g, "$.gravity", "tilt", "angle", 0.0);
    }

    const json* src = find(j, "source");
    if (!src) fail("$.source", "missing required section");
    {
        const std::string kind =
            find(*src, "kind") ? (*src)["kind"].get<std::string>() : "condensate";
        if (kind == "condensate")
            c.cloud.kind = CloudKind::condensate;
        else if (kind == "thermal")
            c.cloud.kind = CloudKind::thermal;
        else
            fail("$.source.kind", "expected \"condensate\" or \"thermal\", got \"" + kind + "\"");
        c.cloud.atom_number = number_field(*src, "$.source", "atom_number", 0.0, true);
        if (c.cloud.atom_number < 1) fail("$.source.atom_number", "must be >= 1");
        c.cloud.dp_par = quantity_field(*src, "$.source", "dp_parallel", "momentum", 0.0, true);
        c.cloud.dp_perp = quantity_field(*src, "$.source", "dp_perp", "momentum", 0.0);
        c.cloud.sigma_perp = quantity_field(*src, "$.source", "sigma_perp", "length", 0.0);
        c.cloud.temperature = quantity_field(*src, "$.source", "temperature", "temperature", 0.0);
        if (const json* tf = find(*src, "trap_frequencies")) {
            if (!tf->is_array() || tf->size() != 3)
                fail("$.source.trap_frequencies", "expected an array of 3 frequencies");
            double w[3];
            for (int i = 0; i < 3; ++i)
                w[i] = 2 * std::numbers::pi *
                       parse_quantity((*tf)[i],
                                      "$.source.trap_frequencies[" + std::to_string(i) + "]",
                                      "frequency");
            c.cloud.trap = {w[0], w[1], w[2]};
        }
        try {
            c.cloud.validate();
        } catch (const std::exception& e) {
            fail("$.source", e.what());
        }
    }

    c.velocity_select_duration =
        find(j, "velocity_select") ? parse_quantity(j["velocity_select"], "$.velocity_select", "time")
                                   : 0.0;
    if (c.velocity_select_duration < 0) fail("$.velocity_select", "must be >= 0");

    const json* sq = find(j, "sequence");
    if (!sq) fail("$.sequence", "missing required section");
    {
        const double order = number_field(*sq, "$.sequence", "order", 0.0, true);
        if (order < 1 || order != std::floor(order))
            fail("$.sequence.order", "must be a positive integer");
        c.n = static_cast<int>(order);
        c.T = quantity_field(*sq, "$.sequence", "T", "time", 0.0, true);
        if (c.T <= 0) fail("$.sequence.T", "must be > 0");
        if (const json* bl = find(*sq, "bloch")) {
            if (!bl->is_array()) fail("$.sequence.bloch", "expected an array of segments");
            int idx = 0;
            for (const auto& b : *bl) {
                const std::string p = "$.sequence.bloch[" + std::to_string(idx++) + "]";
                BlochInsertion ins;
                const double arm = number_field(b, p, "arm", -1.0, true);
                if (arm != 0.0 && arm != 1.0) fail(p + ".arm", "must be 0 or 1");
                ins.arm = static_cast<int>(arm);
                ins.t_start = quantity_field(b, p, "t_start", "time", 0.0, true);
                ins.segment.depth_er = quantity_field(b, p, "depth", "depth", 0.0, true);
                ins.segment.load_time = quantity_field(b, p, "load_time", "time", 0.0, true);
                ins.segment.sweep_time = quantity_field(b, p, "sweep_time", "time", 0.0, true);
                const double units = number_field(b, p, "units", 1.0);
                if (units < 0 || units != std::floor(units)) fail(p + ".units", "must be a non-negative integer");
                ins.segment.units = static_cast<int>(units);
                const double dir = number_field(b, p, "direction", 1.0);
                if (dir != 1.0 && dir != -1.0) fail(p + ".direction", "must be +1 or -1");
                ins.segment.direction = static_cast<int>(dir);
                c.bloch.push_back(ins);
            }
        }
    }

    if (const json* ab = find(j, "aberration")) {
        c.aberration.c2 = quantity_field(*ab, "$.aberration", "c2", "curvature", 0.0);
        c.aberration.c4 = quantity_field(*ab, "$.aberration", "c4", "quartic", 0.0);
    }

    const json* sc = find(j, "scan");
    if (!sc) fail("$.scan", "missing required section");
    {
        if (const json* ac = find(*sc, "alpha_center")) {
            if (ac->is_string() && ac->get<std::string>() == "auto") {
                c.alpha_center_auto = true;
            } else {
                c.alpha_center_auto = false;
                c.alpha_center = parse_quantity(*ac, "$.scan.alpha_center", "chirp");
            }
        }
        c.alpha_span = quantity_field(*sc, "$.scan", "alpha_span", "chirp", 0.0, true);
        if (c.alpha_span <= 0) fail("$.scan.alpha_span", "must be > 0");
        const double pts = number_field(*sc, "$.scan", "points", 0.0, true);
        if (pts < 2 || pts != std::floor(pts)) fail("$.scan.points", "must be an integer >= 2");
        c.points = static_cast<int>(pts);
        const double det = number_field(*sc, "$.scan", "detected_atoms", 0.0, true);
        if (det < 0 || det != std::floor(det)) fail("$.scan.detected_atoms", "must be an integer >= 0");
        c.detected_atoms = static_cast<long long>(det);
        const double mc = number_field(*sc, "$.scan", "mc_atoms", 20000.0);
        if (mc < 1 || mc != std::floor(mc)) fail("$.scan.mc_atoms", "must be a positive integer");
        c.mc_atoms = static_cast<int>(mc);
        const double seed = number_field(*sc, "$.scan", "seed", 1.0);
        if (seed < 0 || seed != std::floor(seed)) fail("$.scan.seed", "must be a non-negative integer");
        c.seed = static_cast<std::uint64_t>(seed);
        c.mirror_phase_jitter =
            quantity_field(*sc, "$.scan", "mirror_phase_jitter", "angle", 0.0);
        c.cycle_time = quantity_field(*sc, "$.scan", "cycle_time", "time", 1.0);
    }

    if (const json* ft = find(j, "fit")) {
        if (const json* fx = find(*ft, "fix_period")) {
            if (!fx->is_boolean()) fail("$.fit.fix_period", "expected a boolean");
            c.fit_fix_period = fx->get<bool>();
        }
    }
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    try {
        return parse_config(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string preset_path(const std::string& name) {
    namespace fs = std::filesystem;
    for (const auto& dir : {std::string("presets"), std::string(ATOMGRAV_PRESET_DIR)}) {
        const fs::path p = fs::path(dir) / (name + ".json");
        if (fs::exists(p)) return p.string();
    }
    throw ConfigError("preset \"" + name + "\" not found (looked in ./presets and " +
                      ATOMGRAV_PRESET_DIR ")");
}

ExperimentConfig load_preset(const std::string& name) { return load_config_file(preset_path(name)); }

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    if (!c.notes.empty()) j["notes"] = c.notes;
    j["gravity"] = {{"g_true", canonical(c.g_true, "m/s^2")},
                    {"g_ref", canonical(c.g_ref, "m/s^2")},
                    {"tilt", canonical(c.tilt, "rad")}};
    j["source"] = {
        {"kind", c.cloud.kind == CloudKind::condensate ? "condensate" : "thermal"},
        {"atom_number", c.cloud.atom_number},
        {"dp_parallel", canonical(c.cloud.dp_par, "hbar_k")},
        {"dp_perp", canonical(c.cloud.dp_perp, "hbar_k")},
        {"sigma_perp", canonical(c.cloud.sigma_perp, "m")},
        {"temperature", canonical(c.cloud.temperature, "K")},
        {"trap_frequencies",
         json::array({canonical(c.cloud.trap.wx / (2 * std::numbers::pi), "Hz"),
                      canonical(c.cloud.trap.wy / (2 * std::numbers::pi), "Hz"),
                      canonical(c.cloud.trap.wz / (2 * std::numbers::pi), "Hz")})},
    };
    j["velocity_select"] = canonical(c.velocity_select_duration, "s");
    json seqj = {{"order", c.n}, {"T", canonical(c.T, "s")}};
    if (!c.bloch.empty()) {
        json arr = json::array();
        for (const auto& b : c.bloch)
            arr.push_back({{"arm", b.arm},
                           {"t_start", canonical(b.t_start, "s")},
                           {"depth", canonical(b.segment.depth_er, "Er")},
                           {"load_time", canonical(b.segment.load_time, "s")},
                           {"sweep_time", canonical(b.segment.sweep_time, "s")},
                           {"units", b.segment.units},
                           {"direction", b.segment.direction}});
        seqj["bloch"] = arr;
    }
    j["sequence"] = seqj;
    j["aberration"] = {{"c2", canonical(c.aberration.c2, "rad/m^2")},
                       {"c4", canonical(c.aberration.c4, "rad/m^4")}};
    j["scan"] = {
        {"alpha_center",
         c.alpha_center_auto ? json("auto") : json(canonical(c.alpha_center, "Hz/s"))},
        {"alpha_span", canonical(c.alpha_span, "Hz/s")},
        {"points", c.points},
        {"detected_atoms", static_cast<double>(c.detected_atoms)},
        {"mc_atoms", c.mc_atoms},
        {"seed", static_cast<double>(c.seed)},
        {"mirror_phase_jitter", canonical(c.mirror_phase_jitter, "rad")},
        {"cycle_time", canonical(c.cycle_time, "s")},
    };
    j["fit"] = {{"fix_period", c.fit_fix_period}};
    return j;
}

FringesRun run_fringes(const ExperimentConfig& config) {
    FringesRun run;
    run.resolved = config;
    if (config.velocity_select_duration > 0)
        run.resolved.cloud =
            velocity_select(config.velocity_select_duration, config.cloud, config.cst);

    run.seq = build_mach_zehnder(config.n, config.T, run.resolved.cloud, config.cst);
    run.seq.bloch = config.bloch;
    run.n_eff = effective_order(run.seq);

    const double center = config.alpha_center_auto
                              ? doppler_chirp_rate(config.g_true, config.tilt, config.cst)
                              : config.alpha_center;
    std::vector<double> grid(config.points);
    for (int i = 0; i < config.points; ++i)
        grid[i] = center - config.alpha_span / 2 +
                  config.alpha_span * (config.points == 1 ? 0.5 : double(i) / (config.points - 1));

    ScanOptions opt;
    opt.g = config.g_true;
    opt.tilt = config.tilt;
    opt.mirror_phase_jitter = config.mirror_phase_jitter;
    opt.mc_atoms = config.mc_atoms;
    run.scan = simulate_fringe_scan(run.seq, run.resolved.cloud, grid, config.aberration,
                                    config.detected_atoms, config.seed, opt);

    const double period_guess = 1.0 / (run.n_eff * config.T * config.T);
    run.fit = fit_fringes(run.scan, period_guess, config.fit_fix_period);
    if (run.fit.converged && run.fit.visibility_significant) {
        auto [g, sg] = extract_g(run.fit, config.cst, config.tilt, config.g_ref);
        run.g = g;
        run.sigma_g = sg;
    }
    return run;
}

json fringes_summary(const FringesRun& run, const ExperimentConfig& original) {
    json j;
    j["preset"] = original.name;
    j["n_eff"] = run.n_eff;
    j["fit"] = json::parse(fit_to_json(run.fit));
    j["g_m_per_s2"] = run.g;
    j["sigma_g_m_per_s2"] = run.sigma_g;
    j["splitter"] = {{"tau_s", run.seq.splitter.tau},
                     {"omega_peak_rad_per_s", run.seq.splitter.omega_peak},
                     {"within_bragg_window", run.seq.splitter.within_bragg_window}};
    j["mirror"] = {{"tau_s", run.seq.mirror.tau},
                   {"omega_peak_rad_per_s", run.seq.mirror.omega_peak},
                   {"within_bragg_window", run.seq.mirror.within_bragg_window}};
    j["selected_cloud"] = {{"atom_number", run.resolved.cloud.atom_number},
                           {"dp_parallel_hbar_k", run.resolved.cloud.dp_par}};
    j["config"] = config_to_json(original);
    return j;
}

}  // namespace atomgrav
