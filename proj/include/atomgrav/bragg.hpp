#pragma once
#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "atomgrav/constants.hpp"
#include "atomgrav/source.hpp"

namespace atomgrav {

enum class Envelope { gaussian, square };

// delta(t) = base + slope * t, rad/s with t measured from pulse center.
struct DetuningLaw {
    double base = 0.0;
    double slope = 0.0;
};

// Two-frequency Bragg pulse coupling |p> to |p + 2n hbar k|.
struct BraggPulse {
    int n = 1;
    Envelope envelope = Envelope::gaussian;
    double tau = 0.0;         // gaussian: 1-sigma duration; square: full duration (s)
    double omega_peak = 0.0;  // peak two-photon Rabi frequency, rad/s
    double trunc = 0.0;       // envelope half-window (gaussian >= 4 tau; square = tau/2)
    DetuningLaw delta{};

    // Design-time diagnostics (filled by design_pulse): the classic Bragg
    // window dp*k/m < 1/tau < omega_r. The lower (Doppler/addressing) bound is
    // enforced; the upper bound is advisory because the optimizer deliberately
    // trades a small controlled leak for a large mean-transfer gain on wide
    // ensembles (quasi-Bragg regime).
    double window_lo = 0.0;  // dp*k/m at design time, s^-1
    double window_hi = 0.0;  // omega_r, s^-1
    bool within_bragg_window = true;

    double rabi(double t) const;       // envelope value at t (pulse-centered)
    double envelope_area() const;      // integral of rabi(t)/omega_peak dt
};

// Amplitudes c_j on the ladder |p0 + 2j hbar k>, j in [jmin, jmax].
struct LadderState {
    double p0 = 0.0;  // hbar*k
    int jmin = 0, jmax = 0;
    Eigen::VectorXcd c;
    double t = 0.0;

    static LadderState basis(double p0, int jmin, int jmax, int j_occupied);
    double norm_sq() const { return c.squaredNorm(); }
    double edge_occupation() const;
    std::complex<double> amplitude(int j) const { return c[j - jmin]; }
};

struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Integrates i c_j' = [omega_r (p0+2j)^2 - j delta(t)] c_j + Omega(t)/2 (c_{j-1}+c_{j+1})
// over the truncated envelope. Throws TruncationError when edge occupation
// exceeds 1e-4 (span too small) and std::invalid_argument for non-normalized input.
LadderState evolve_ladder(const BraggPulse& pulse, const LadderState& initial,
                          const Constants<double>& c = rb87_780nm(), double rtol = 1e-8);

// Restriction of the full pulse evolution to the two interferometer ports
// {|p0>, |p0+2n hbar k>}. Column 0: final (port0, portn) amplitudes starting
// from |p0>; column 1: starting from |p0+2n>. Sub-unitary: the deficit is
// leakage to other ladder states. Grows the ladder span internally as needed.
Eigen::Matrix2cd port_matrix(const BraggPulse& pulse, double p0,
                             const Constants<double>& c = rb87_780nm(), double rtol = 1e-8);

// Probabilists' Gauss-Hermite rule (weights for the unit-variance Gaussian,
// normalized to sum 1), via Golub-Welsch on the Jacobi matrix.
std::vector<std::pair<double, double>> gauss_hermite(int npts);

// Ensemble-mean transfer |<n|U|0>|^2 over the cloud's longitudinal momentum
// distribution (incoherent average; atoms are independent).
double ensemble_mean_transfer(const BraggPulse& pulse, const SourceCloud& cloud,
                              const Constants<double>& c = rb87_780nm(), int quad_pts = 24,
                              double rtol = 1e-8);

enum class TransferTarget { half, full };

// Designs a Gaussian pulse for order n on the given cloud: jointly optimizes
// (tau, omega_peak) for maximum ensemble-mean transfer ({full}), or reuses the
// {full} tau and calibrates omega_peak to mean transfer 0.5 +- 0.005 ({half}).
BraggPulse design_pulse(int n, TransferTarget target, const SourceCloud& cloud,
                        const Constants<double>& c = rb87_780nm());

// Two-level transfer probability for a Gaussian pulse of 1-sigma duration tau
// (pi area on resonance) at constant detuning delta (rad/s). Exact in the deep
// Bragg regime where adjacent ladder states are adiabatically eliminated.
double two_level_gaussian_transfer(double tau, double delta, double area = -1.0);

// Filters the cloud through the transfer-vs-detuning profile of an n=1
// Gaussian pi pulse of the given duration; returns the transferred
// sub-ensemble re-expressed at its filtered 1-sigma width with atom number
// rescaled by the kept fraction.
SourceCloud velocity_select(double pulse_duration, const SourceCloud& cloud,
                            const Constants<double>& c = rb87_780nm());

struct SpectroscopyResult {
    std::vector<double> detuning;  // rad/s offsets from the order-n resonance
    std::vector<double> transfer;
    double fitted_width_hk = 0.0;  // 1-sigma momentum width from the Gaussian fit
    double fitted_width_sigma = 0.0;
    bool converged = false;
};

// Transfer fraction vs probe detuning; Gaussian fit width converted to
// momentum via the two-photon Doppler relation for the probe's order.
SpectroscopyResult bragg_spectroscopy(const SourceCloud& cloud, const BraggPulse& probe,
                                      const std::vector<double>& detuning_grid,
                                      const Constants<double>& c = rb87_780nm());

// Weak, long Gaussian probe suitable for resolving the cloud.
BraggPulse make_spectroscopy_probe(const SourceCloud& cloud,
                                   const Constants<double>& c = rb87_780nm());

// Effective 2n-photon Rabi frequency of the n-th order two-level reduction
// (product over intermediate-state detunings).
double effective_rabi(int n, double omega, const Constants<double>& c = rb87_780nm());

}  // namespace atomgrav
