#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "atomgrav/fit.hpp"
#include "atomgrav/fringe.hpp"
#include "atomgrav/sequence.hpp"
#include "atomgrav/source.hpp"

namespace atomgrav {

// Schema violation with the offending field path in the message ("$.scan.points: ...").
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One experiment run, fully resolved: every physical quantity in the file
// carries an explicit unit suffix ("3 ms", "0.14 hbar_k"); bare numbers are
// allowed only for counts, orders and seeds.
struct ExperimentConfig {
    std::string name = "unnamed";
    std::string notes;

    double g_true = 9.81;  // m/s^2, fed to the simulation
    double g_ref = 9.81;   // m/s^2, prior used to resolve the fringe order
    double tilt = 0.0;     // rad

    SourceCloud cloud{};
    double velocity_select_duration = 0.0;  // s, 0 = no selection pulse

    int n = 1;
    double T = 0.0;
    std::vector<BlochInsertion> bloch;
    AberrationMap aberration{};

    bool alpha_center_auto = true;  // center the scan on the g_true resonance
    double alpha_center = 0.0;      // Hz/s, used when not auto
    double alpha_span = 0.0;        // Hz/s full width
    int points = 0;
    long long detected_atoms = 0;
    int mc_atoms = 20000;
    std::uint64_t seed = 1;
    double mirror_phase_jitter = 0.0;  // rad
    double cycle_time = 1.0;           // s

    bool fit_fix_period = false;

    Constants<double> cst = rb87_780nm();
};

// "NUMBER UNIT" -> SI value; the accepted unit set depends on the expected
// dimension. Throws ConfigError naming `path` on any mismatch.
double parse_quantity(const nlohmann::json& j, const std::string& path,
                      const std::string& dimension);

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

// Presets ship in-repo; resolution order: ./presets/<name>.json relative to
// the current directory, then the build-time preset directory.
ExperimentConfig load_preset(const std::string& name);
std::string preset_path(const std::string& name);

// Canonical JSON form (unit-suffixed strings); parse_config(config_to_json(c))
// reproduces c, which is how summaries stay re-runnable.
nlohmann::json config_to_json(const ExperimentConfig& c);

// Shared fringe pipeline: velocity selection, pulse design, scan, fit, g.
struct FringesRun {
    ExperimentConfig resolved;  // post velocity-selection cloud etc.
    PulseSequence seq;
    double n_eff = 0.0;
    FringeScan scan;
    FringeFit fit;
    double g = 0.0;
    double sigma_g = 0.0;
};

FringesRun run_fringes(const ExperimentConfig& config);

// Summary JSON: fitted parameters, derived quantities, embedded resolved config.
nlohmann::json fringes_summary(const FringesRun& run, const ExperimentConfig& original);

}  // namespace atomgrav
