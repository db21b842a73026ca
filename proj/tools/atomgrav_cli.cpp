#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "atomgrav/bragg.hpp"
#include "atomgrav/config.hpp"
#include "atomgrav/csv.hpp"
#include "atomgrav/fit.hpp"
#include "atomgrav/fringe.hpp"
#include "atomgrav/meanfield.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace atomgrav;

namespace {

struct ConfigSource {
    std::string preset;
    std::string config_file;

    ExperimentConfig load() const {
        if (!preset.empty() && !config_file.empty())
            throw ConfigError("pass either --preset or --config, not both");
        if (!preset.empty()) return load_preset(preset);
        if (!config_file.empty()) return load_config_file(config_file);
        throw ConfigError("one of --preset or --config is required");
    }
};

void add_config_flags(CLI::App* cmd, ConfigSource& src) {
    cmd->add_option("--preset", src.preset, "Named preset shipped in presets/");
    cmd->add_option("--config", src.config_file, "Experiment config JSON file");
}

double parse_cli_quantity(const std::string& text, const std::string& flag,
                          const std::string& dimension) {
    return parse_quantity(json(text), flag, dimension);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

int cmd_fringes(const ConfigSource& src, std::optional<std::uint64_t> seed,
                const std::string& out_dir) {
    ExperimentConfig config = src.load();
    if (seed) config.seed = *seed;
    const FringesRun run = run_fringes(config);

    fs::create_directories(out_dir);
    const fs::path csv_path = fs::path(out_dir) / (config.name + "_fringes.csv");
    const fs::path sum_path = fs::path(out_dir) / (config.name + "_summary.json");
    write_scan_csv(run.scan, csv_path.string());
    const json summary = fringes_summary(run, config);
    write_text(sum_path, summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    if (!run.fit.converged) {
        std::cerr << "fringes: fit did not converge\n";
        return 1;
    }
    return 0;
}

int cmd_fit(const std::string& csv_path, const std::string& period_text, bool fix_period,
            const std::string& tilt_text, const std::string& g_ref_text,
            const std::string& out_dir) {
    const double period_guess = parse_cli_quantity(period_text, "--period-guess", "chirp");
    const double tilt = parse_cli_quantity(tilt_text, "--tilt", "angle");
    const double g_ref = parse_cli_quantity(g_ref_text, "--g-ref", "acceleration");

    const FringeScan scan = read_scan_csv(csv_path);
    if (scan.size() == 0) throw std::runtime_error(csv_path + ": no data rows");
    const FringeFit fit = fit_fringes(scan, period_guess, fix_period);

    json j = json::parse(fit_to_json(fit));
    if (fit.converged && fit.visibility_significant) {
        auto [g, sg] = extract_g(fit, rb87_780nm(), tilt, g_ref);
        j["g_m_per_s2"] = g;
        j["sigma_g_m_per_s2"] = sg;
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text(fs::path(out_dir) / (fs::path(csv_path).stem().string() + "_fit.json"),
                   j.dump(2) + "\n");
    }
    std::cout << j.dump(2) << "\n";
    return fit.converged ? 0 : 1;
}

int cmd_dephasing(const ConfigSource& src, const std::string& tmin_text,
                  const std::string& tmax_text, int tpoints,
                  const std::vector<std::string>& texp_texts, const std::string& out_dir) {
    ExperimentConfig config = src.load();
    const double tmin = parse_cli_quantity(tmin_text, "--T-min", "time");
    const double tmax = parse_cli_quantity(tmax_text, "--T-max", "time");
    if (!(tmin > 0 && tmax > tmin) || tpoints < 2)
        throw std::runtime_error("dephasing: need 0 < --T-min < --T-max and --T-points >= 2");
    std::vector<double> T_grid(tpoints);
    for (int i = 0; i < tpoints; ++i)
        T_grid[i] = tmin * std::pow(tmax / tmin, double(i) / (tpoints - 1));
    std::vector<double> texp_grid;
    for (const auto& t : texp_texts)
        texp_grid.push_back(parse_cli_quantity(t, "--t-exp", "time"));
    if (texp_grid.empty()) texp_grid = {12e-3};

    const auto model = make_meanfield_model(config.cloud.atom_number, config.cloud.trap, config.cst);
    const auto rows = sensitivity_curves(model, T_grid, texp_grid, config.n, config.g_true);

    csv::Table t;
    t.header = {"T_s", "t_exp_s", "dephasing_dg_over_g", "shot_noise_dg_over_g"};
    for (const auto& r : rows)
        t.rows.push_back({csv::format_double(r.T), csv::format_double(r.t_exp),
                          csv::format_double(r.dephasing_dgg),
                          csv::format_double(r.shot_noise_dgg)});
    fs::create_directories(out_dir);
    const fs::path path = fs::path(out_dir) / (config.name + "_sensitivity.csv");
    csv::write_file(path.string(), t);
    std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_pulse_calibrate(const ConfigSource& src, const std::string& target_name) {
    ExperimentConfig config = src.load();
    TransferTarget target;
    if (target_name == "half")
        target = TransferTarget::half;
    else if (target_name == "full")
        target = TransferTarget::full;
    else
        throw std::runtime_error("--target must be half or full");

    SourceCloud cloud = config.cloud;
    if (config.velocity_select_duration > 0)
        cloud = velocity_select(config.velocity_select_duration, cloud, config.cst);
    const BraggPulse pulse = design_pulse(config.n, target, cloud, config.cst);
    const double eff = ensemble_mean_transfer(pulse, cloud, config.cst);

    json j;
    j["order"] = pulse.n;
    j["target"] = target_name;
    j["tau_s"] = pulse.tau;
    j["omega_peak_rad_per_s"] = pulse.omega_peak;
    j["truncation_s"] = pulse.trunc;
    j["mean_transfer"] = eff;
    j["window_lo_per_s"] = pulse.window_lo;
    j["window_hi_per_s"] = pulse.window_hi;
    j["within_bragg_window"] = pulse.within_bragg_window;
    j["selected_dp_parallel_hbar_k"] = cloud.dp_par;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_spectroscopy(const ConfigSource& src, int points, const std::string& out_dir) {
    ExperimentConfig config = src.load();
    SourceCloud cloud = config.cloud;
    if (config.velocity_select_duration > 0)
        cloud = velocity_select(config.velocity_select_duration, cloud, config.cst);

    const BraggPulse probe = make_spectroscopy_probe(cloud, config.cst);
    const double doppler = 4.0 * probe.n * config.cst.omega_r() * std::max(cloud.dp_par, 1e-3);
    const double span = 4.0 * doppler + 8.0 / probe.tau;
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[i] = -span + 2 * span * i / (points - 1);

    const auto res = bragg_spectroscopy(cloud, probe, grid, config.cst);

    csv::Table t;
    t.header = {"detuning_rad_per_s", "transfer"};
    for (std::size_t i = 0; i < res.detuning.size(); ++i)
        t.rows.push_back({csv::format_double(res.detuning[i]), csv::format_double(res.transfer[i])});
    fs::create_directories(out_dir);
    const fs::path path = fs::path(out_dir) / (config.name + "_spectroscopy.csv");
    csv::write_file(path.string(), t);

    json j;
    j["probe_tau_s"] = probe.tau;
    j["fitted_width_hbar_k"] = res.fitted_width_hk;
    j["fitted_width_rad_per_s"] = res.fitted_width_sigma;
    j["cloud_dp_parallel_hbar_k"] = cloud.dp_par;
    j["csv"] = path.string();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_bloch_area(const ConfigSource& src) {
    ExperimentConfig config = src.load();
    // the pulse amplitudes are irrelevant to the space-time area, so skip the
    // expensive design step and use placeholder pulses
    PulseSequence seq;
    seq.n = config.n;
    seq.T = config.T;
    seq.bloch = config.bloch;
    seq.cst = config.cst;
    const double neff = effective_order(seq);
    json j;
    j["n_eff"] = neff;
    j["order"] = config.n;
    j["T_s"] = config.T;
    j["fringe_period_hz_per_s"] = 1.0 / (neff * config.T * config.T);
    j["bloch_segments"] = config.bloch.size();
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bose-Einstein-condensate Mach-Zehnder gravimeter toolkit"};
    app.require_subcommand(1);

    ConfigSource fringes_src, deph_src, pulse_src, spec_src, area_src;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";

    auto* fringes = app.add_subcommand("fringes", "Simulate a chirp-scanned fringe and fit it");
    add_config_flags(fringes, fringes_src);
    fringes->add_option("--seed", seed, "Override the scan RNG seed");
    fringes->add_option("--out-dir", out_dir, "Output directory (CSV + summary JSON)");

    std::string fit_csv, fit_period, fit_tilt = "0 rad", fit_gref = "9.81 m/s^2",
                fit_out_dir;
    bool fit_fix = false;
    auto* fitc = app.add_subcommand("fit", "Fit an existing fringe CSV");
    fitc->add_option("csv", fit_csv, "Fringe CSV (alpha_hz_per_s,population,...)")->required();
    fitc->add_option("--period-guess", fit_period, "e.g. \"111 kHz/s\"")->required();
    fitc->add_flag("--fix-period", fit_fix, "Pin the period at the guess");
    fitc->add_option("--tilt", fit_tilt, "Beam tilt used in g extraction");
    fitc->add_option("--g-ref", fit_gref, "Prior g for fringe-order folding");
    fitc->add_option("--out-dir", fit_out_dir, "Also write <stem>_fit.json here");

    std::string tmin = "1 ms", tmax = "100 ms";
    int tpoints = 25, spec_points = 81;
    std::vector<std::string> texps;
    auto* deph = app.add_subcommand("dephasing", "Mean-field + shot-noise sensitivity table");
    add_config_flags(deph, deph_src);
    deph->add_option("--T-min", tmin, "Smallest interrogation time");
    deph->add_option("--T-max", tmax, "Largest interrogation time");
    deph->add_option("--T-points", tpoints, "Log-spaced grid size");
    deph->add_option("--t-exp", texps, "Expansion times, e.g. \"12 ms\" (repeatable)");
    deph->add_option("--out-dir", out_dir, "Output directory");

    std::string target = "full";
    auto* pulse = app.add_subcommand("pulse-calibrate", "Design a Bragg pulse for the config cloud");
    add_config_flags(pulse, pulse_src);
    pulse->add_option("--target", target, "half | full");

    auto* spec = app.add_subcommand("spectroscopy", "Bragg momentum-width spectroscopy");
    add_config_flags(spec, spec_src);
    spec->add_option("--points", spec_points, "Detuning grid size");
    spec->add_option("--out-dir", out_dir, "Output directory");

    auto* area = app.add_subcommand("bloch-area", "Effective order of the configured sequence");
    add_config_flags(area, area_src);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fringes->parsed()) return cmd_fringes(fringes_src, seed, out_dir);
        if (fitc->parsed())
            return cmd_fit(fit_csv, fit_period, fit_fix, fit_tilt, fit_gref, fit_out_dir);
        if (deph->parsed()) return cmd_dephasing(deph_src, tmin, tmax, tpoints, texps, out_dir);
        if (pulse->parsed()) return cmd_pulse_calibrate(pulse_src, target);
        if (spec->parsed()) return cmd_spectroscopy(spec_src, spec_points, out_dir);
        if (area->parsed()) return cmd_bloch_area(area_src);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
