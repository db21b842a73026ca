// End-to-end checks of the atomgrav command line: each subcommand is run as a
// real subprocess and judged on exit code, emitted files and JSON/CSV output.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <filesystem>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "atomgrav_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path so = scratch() / ("out_" + std::to_string(counter) + ".txt");
    const fs::path se = scratch() / ("err_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(ATOMGRAV_CLI_PATH) + " " + args + " > " + so.string() +
                            " 2> " + se.string();
    RunResult r;
    r.status = std::system(cmd.c_str());
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

// degenerate cloud (no momentum spread): pulse design is fast and the
// noise-free fringe is an exact sinusoid, so every check is sharp
const char* tiny_config = R"({
    "name": "tiny",
    "gravity": { "g_true": "9.7859 m/s^2", "g_ref": "9.79 m/s^2", "tilt": "0 rad" },
    "source": { "kind": "condensate", "atom_number": 1000000, "dp_parallel": "0 hbar_k",
                "trap_frequencies": ["50 Hz", "57 Hz", "28 Hz"] },
    "sequence": { "order": 1, "T": "3 ms" },
    "scan": { "alpha_span": "150 kHz/s", "points": 13, "detected_atoms": 0,
              "mc_atoms": 1, "seed": 7 }
})";

fs::path write_tiny_config(long long detected, const std::string& stem) {
    json j = json::parse(tiny_config);
    j["name"] = stem;
    j["scan"]["detected_atoms"] = detected;
    const fs::path p = scratch() / (stem + ".json");
    std::ofstream(p) << j.dump(2);
    return p;
}

}  // namespace

TEST_CASE("fringes: noise-free run recovers g and writes CSV + summary") {
    const fs::path cfg = write_tiny_config(0, "tiny");
    const fs::path out = scratch() / "run1";
    const auto r = run_cli("fringes --config " + cfg.string() + " --out-dir " + out.string());
    CAPTURE(r.err);
    REQUIRE(r.status == 0);

    const json summary = json::parse(r.out);
    CHECK(summary["n_eff"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(summary["fit"]["converged"].get<bool>());
    CHECK(summary["fit"]["visibility"].get<double>() > 0.98);
    CHECK(summary["fit"]["period_hz_per_s"].get<double>() ==
          doctest::Approx(111111.1).epsilon(1e-3));
    CHECK(summary["g_m_per_s2"].get<double>() == doctest::Approx(9.7859).epsilon(1e-7));

    CHECK(fs::exists(out / "tiny_fringes.csv"));
    CHECK(fs::exists(out / "tiny_summary.json"));
    // the stdout summary and the file are the same document
    CHECK(json::parse(slurp(out / "tiny_summary.json")) == summary);
}

TEST_CASE("fringes: same seed gives byte-identical CSV, new seed does not") {
    const fs::path cfg = write_tiny_config(2000, "tinynoisy");
    const fs::path o1 = scratch() / "det_a";
    const fs::path o2 = scratch() / "det_b";
    const fs::path o3 = scratch() / "det_c";
    REQUIRE(run_cli("fringes --config " + cfg.string() + " --seed 42 --out-dir " + o1.string())
                .status == 0);
    REQUIRE(run_cli("fringes --config " + cfg.string() + " --seed 42 --out-dir " + o2.string())
                .status == 0);
    REQUIRE(run_cli("fringes --config " + cfg.string() + " --seed 43 --out-dir " + o3.string())
                .status == 0);
    const std::string a = slurp(o1 / "tinynoisy_fringes.csv");
    CHECK(a == slurp(o2 / "tinynoisy_fringes.csv"));
    CHECK(a != slurp(o3 / "tinynoisy_fringes.csv"));
    // the summary records the seed actually used
    const json s1 = json::parse(slurp(o1 / "tinynoisy_summary.json"));
    CHECK(s1["config"]["scan"]["seed"].get<double>() == 42);
}

TEST_CASE("fit: refitting an emitted CSV reproduces the fringes-run answer") {
    const fs::path csv = scratch() / "run1" / "tiny_fringes.csv";
    REQUIRE(fs::exists(csv));  // produced by the first test case
    const json summary = json::parse(slurp(scratch() / "run1" / "tiny_summary.json"));

    const fs::path out = scratch() / "refit";
    const auto r = run_cli("fit " + csv.string() +
                           " --period-guess \"111.111 kHz/s\" --g-ref \"9.79 m/s^2\" --out-dir " +
                           out.string());
    CAPTURE(r.err);
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["converged"].get<bool>());
    CHECK(j["alpha0_hz_per_s"].get<double>() ==
          doctest::Approx(summary["fit"]["alpha0_hz_per_s"].get<double>()).epsilon(1e-10));
    CHECK(j["g_m_per_s2"].get<double>() ==
          doctest::Approx(summary["g_m_per_s2"].get<double>()).epsilon(1e-10));
    CHECK(fs::exists(out / "tiny_fringes_fit.json"));
}

TEST_CASE("fit: a hand-written synthetic CSV is fitted correctly") {
    const double alpha0 = 25.08e6, period = 111111.1;
    const fs::path csv = scratch() / "synth.csv";
    {
        std::ofstream f(csv);
        f.precision(17);
        f << "alpha_hz_per_s,population,atoms,seed\n";
        for (int i = 0; i < 9; ++i) {
            const double a = alpha0 - 0.6 * period + 1.2 * period * i / 8.0;
            const double p =
                0.5 * (1.0 + 0.9 * std::cos(2 * std::numbers::pi * (a - alpha0) / period));
            f << a << "," << p << ",0,0\n";
        }
    }
    const auto r = run_cli("fit " + csv.string() + " --period-guess \"111 kHz/s\"");
    CAPTURE(r.err);
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["visibility"].get<double>() == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(j["alpha0_hz_per_s"].get<double>() == doctest::Approx(alpha0).epsilon(1e-9));
}

TEST_CASE("fit: degenerate CSVs fail with a diagnostic") {
    const fs::path empty = scratch() / "empty.csv";
    std::ofstream(empty) << "alpha_hz_per_s,population,atoms,seed\n";
    const auto r1 = run_cli("fit " + empty.string() + " --period-guess \"111 kHz/s\"");
    CHECK(r1.status != 0);
    CHECK(r1.err.find("no data rows") != std::string::npos);

    const fs::path bad = scratch() / "bad.csv";
    std::ofstream(bad) << "alpha_hz_per_s,population,atoms,seed\n"
                       << "1e6,0.5,0,0\n"
                       << "2e6,not-a-number,0,0\n";
    const auto r2 = run_cli("fit " + bad.string() + " --period-guess \"111 kHz/s\"");
    CHECK(r2.status != 0);
    // rows are reported by 1-based file line; the header is line 1
    CHECK(r2.err.find("data row 3") != std::string::npos);
}

TEST_CASE("dephasing: sensitivity table has the documented columns and physics") {
    const fs::path cfg = write_tiny_config(0, "tinydeph");
    const fs::path out = scratch() / "deph";
    const auto r = run_cli("dephasing --config " + cfg.string() +
                           " --T-min \"5 ms\" --T-max \"50 ms\" --T-points 5" +
                           " --t-exp \"12 ms\" --out-dir " + out.string());
    CAPTURE(r.err);
    REQUIRE(r.status == 0);

    std::ifstream f(out / "tinydeph_sensitivity.csv");
    REQUIRE(f.good());
    std::string header;
    std::getline(f, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    CHECK(header == "T_s,t_exp_s,dephasing_dg_over_g,shot_noise_dg_over_g");

    int rows = 0;
    std::string line;
    const double k = 8052877.6457, g = 9.7859, root_n = 1000.0;  // sqrt(1e6)
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double T, texp, deph, shot;
        REQUIRE((ss >> T >> texp >> deph >> shot));
        CHECK(texp == doctest::Approx(12e-3));
        CHECK(deph > 0.0);
        // single-shot counting floor: dg/g = 1 / (sqrt(N) * 2 n k g T^2)
        CHECK(shot == doctest::Approx(1.0 / (root_n * 2.0 * k * g * T * T)).epsilon(1e-6));
        ++rows;
    }
    CHECK(rows == 5);
}

TEST_CASE("bloch-area: fig4 preset reports the boosted effective order") {
    const auto r = run_cli("bloch-area --preset fig4");
    CAPTURE(r.err);
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["order"].get<int>() == 2);
    CHECK(j["bloch_segments"].get<int>() == 4);
    CHECK(j["n_eff"].get<double>() == doctest::Approx(2.42).epsilon(1e-6));
    CHECK(j["fringe_period_hz_per_s"].get<double>() == doctest::Approx(66115.7).epsilon(1e-4));
}

TEST_CASE("pulse-calibrate: degenerate cloud reaches near-unit transfer") {
    const fs::path cfg = write_tiny_config(0, "tinypulse");
    const auto r = run_cli("pulse-calibrate --config " + cfg.string() + " --target full");
    CAPTURE(r.err);
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["order"].get<int>() == 1);
    CHECK(j["mean_transfer"].get<double>() > 0.999);
    CHECK(j["tau_s"].get<double>() > 0.0);

    const auto rh = run_cli("pulse-calibrate --config " + cfg.string() + " --target half");
    REQUIRE(rh.status == 0);
    const json jh = json::parse(rh.out);
    CHECK(jh["mean_transfer"].get<double>() == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("spectroscopy: probe recovers the prepared momentum width") {
    json cfg = json::parse(tiny_config);
    cfg["name"] = "tinyspec";
    cfg["source"]["dp_parallel"] = "0.05 hbar_k";
    const fs::path p = scratch() / "tinyspec.json";
    std::ofstream(p) << cfg.dump(2);

    const fs::path out = scratch() / "spec";
    const auto r = run_cli("spectroscopy --config " + p.string() + " --points 17 --out-dir " +
                           out.string());
    CAPTURE(r.err);
    REQUIRE(r.status == 0);
    const json j = json::parse(r.out);
    CHECK(j["fitted_width_hbar_k"].get<double>() == doctest::Approx(0.05).epsilon(0.4));
    CHECK(fs::exists(out / "tinyspec_spectroscopy.csv"));

    std::ifstream f(out / "tinyspec_spectroscopy.csv");
    std::string header;
    std::getline(f, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    CHECK(header == "detuning_rad_per_s,transfer");
    int rows = 0;
    for (std::string line; std::getline(f, line);)
        if (!line.empty() && line != "\r") ++rows;
    CHECK(rows == 17);
}

TEST_CASE("flag validation: bad invocations exit nonzero with a message") {
    CHECK(run_cli("no-such-subcommand").status != 0);
    CHECK(run_cli("fringes").status != 0);  // neither --preset nor --config

    const fs::path cfg = write_tiny_config(0, "tinyflags");
    const auto both = run_cli("fringes --config " + cfg.string() + " --preset fig1");
    CHECK(both.status != 0);
    CHECK(both.err.find("not both") != std::string::npos);

    const auto badp = run_cli("fringes --preset fig99");
    CHECK(badp.status != 0);
    CHECK(badp.err.find("fig99") != std::string::npos);

    const fs::path csv = scratch() / "run1" / "tiny_fringes.csv";
    const auto badu = run_cli("fit " + csv.string() + " --period-guess \"111 banana\"");
    CHECK(badu.status != 0);
    CHECK(badu.err.find("banana") != std::string::npos);
}
