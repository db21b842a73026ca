#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "atomgrav/sequence.hpp"
#include "atomgrav/source.hpp"

namespace atomgrav {

// One chirp-scanned fringe record. population is the normalized diffracted-
// port fraction; atoms is the detected count behind each point (0 when the
// scan was generated noise-free); point_seed is the per-point RNG substream.
struct FringeScan {
    std::vector<double> alpha;  // Hz/s
    std::vector<double> population;
    std::vector<long long> atoms;
    std::vector<std::uint64_t> point_seed;

    // generation metadata (not part of the CSV schema)
    int n = 0;
    double T = 0.0;
    double n_eff = 0.0;
    std::uint64_t seed = 0;

    std::size_t size() const { return alpha.size(); }
};

struct ScanOptions {
    double g = 9.81;                  // true gravity fed to the phase model, m/s^2
    double tilt = 0.0;                // beam-vertical misalignment, rad
    double mirror_phase_jitter = 0.0; // 1-sigma white jitter on the mirror pulse phase, rad
    int mc_atoms = 20000;             // Monte Carlo ensemble size per scan
};

// Monte Carlo chirp scan. One atom ensemble is drawn per scan; per-atom pulse
// amplitudes come from the full momentum-ladder dynamics at the atom's
// longitudinal momentum, the chirp enters only through the interferometer
// phase, and each point adds binomial counting noise over
// detected_atoms_per_shot trials (0 = noise-free mean population).
// Deterministic for fixed seed; point substreams are derived from the point
// index so any evaluation order gives identical output.
FringeScan simulate_fringe_scan(const PulseSequence& seq, const SourceCloud& cloud,
                                const std::vector<double>& alpha_grid,
                                const AberrationMap& aberration, long long detected_atoms_per_shot,
                                std::uint64_t seed, const ScanOptions& opt = {});

// CSV schema: header alpha_hz_per_s,population,atoms,seed (RFC 4180).
void write_scan_csv(const FringeScan& scan, const std::string& path);
FringeScan read_scan_csv(const std::string& path);

}  // namespace atomgrav
