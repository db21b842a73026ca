#pragma once
#include <numbers>
#include <utility>
#include <vector>

#include "atomgrav/bloch.hpp"
#include "atomgrav/bragg.hpp"
#include "atomgrav/constants.hpp"
#include "atomgrav/source.hpp"

namespace atomgrav {

// Static transverse phase profile of the beamsplitting beams; the same map
// applies at every pulse (the beam is fixed, the atoms move through it).
// phi(0,0) = 0 by construction: only the differential combination
// n [phi(r1) - 2 phi(r2) + phi(r3)] enters any observable.
struct AberrationMap {
    double c2 = 0.0;  // defocus curvature, rad/m^2
    double c4 = 0.0;  // quartic term, rad/m^4

    double phi(double x, double y) const {
        const double r2 = x * x + y * y;
        return c2 * r2 + c4 * r2 * r2;
    }
};

// A Bloch stage grafted onto one interferometer arm. `arm` 1 is the arm
// diffracted by the first splitter, 0 the undiffracted one; t_start is the
// load-ramp start measured from the first splitter.
struct BlochInsertion {
    int arm = 1;
    double t_start = 0.0;
    BlochSegment segment;
};

// pi/2 - pi - pi/2 Mach-Zehnder with optional Bloch insertions. Pulses sit at
// t = 0, T, 2T; the chirp alpha (Hz/s) is scanned at fringe time and only
// enters through the interferometer phase.
struct PulseSequence {
    int n = 1;
    double T = 0.0;
    BraggPulse splitter;
    BraggPulse mirror;
    BraggPulse recombiner;
    double alpha = 0.0;
    std::vector<BlochInsertion> bloch;
    Constants<double> cst = rb87_780nm();

    // Readout convention: with this offset added to the interferometer phase,
    // the diffracted-port population sits at a fringe *top* for the
    // phase-nulling chirp (the natural pi/2-pi-pi/2 diamond yields
    // (1 - cos PHI)/2 at that port).
    double phase_offset = std::numbers::pi;
};

// Momentum is linear in t over [t0, t1] (hbar k units); z in meters is the
// consistent quadratic. Momentum may jump between consecutive segments
// (instantaneous Bragg kicks); position is always continuous.
struct TrajectorySegment {
    double t0 = 0.0, t1 = 0.0;
    double p0 = 0.0, p1 = 0.0;  // hbar k
    double z0 = 0.0;
};

struct ArmTrajectory {
    std::vector<TrajectorySegment> segs;
    double vr = 0.0;  // m/s per hbar k, fixed by the atomic species

    double momentum_at(double t) const;  // hbar k
    double position_at(double t) const;  // m
};

// Designs the three pulses for (n, cloud): half-transfer splitters, a
// full-transfer mirror. T must be positive.
PulseSequence build_mach_zehnder(int n, double T, const SourceCloud& cloud,
                                 const Constants<double>& c = rb87_780nm());

// Piecewise-ballistic arm kinematics in the freely falling frame over
// [0, 2T]. first = diffracted arm, second = undiffracted arm.
std::pair<ArmTrajectory, ArmTrajectory> arm_trajectories(const PulseSequence& seq);

// Checks diamond closure: arms re-converge in position (< 1 um) and the
// momentum split at recombination equals the bare two-port value (all Bloch
// excursions canceled). Throws std::runtime_error otherwise.
void check_closure(const PulseSequence& seq);

// Space-time-area order n_eff = m / (2 hbar k T^2) * integral |z_u - z_l| dt.
// Exactly n for a pure Bragg Mach-Zehnder.
double effective_order(const PulseSequence& seq);

// PHI = (2 k g - 2 pi alpha) n_eff T^2  (alpha in Hz/s, g in m/s^2).
double interferometer_phase(const PulseSequence& seq, double g, double alpha);

}  // namespace atomgrav
