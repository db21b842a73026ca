#pragma once
#include <string>
#include <utility>

#include "atomgrav/constants.hpp"
#include "atomgrav/fringe.hpp"

namespace atomgrav {

// Converged sinusoid P = (A + V cos(2 pi (alpha - alpha0) / period)) / 2.
// Uncertainties are 1-sigma from the fit covariance scaled by reduced chi^2.
struct FringeFit {
    double offset = 0.0;      // A
    double visibility = 0.0;  // V, canonicalized >= 0
    double alpha0 = 0.0;      // Hz/s, folded near the scan center
    double period = 0.0;      // Hz/s
    double sigma_offset = 0.0;
    double sigma_visibility = 0.0;
    double sigma_alpha0 = 0.0;
    double sigma_period = 0.0;
    double residual_rms = 0.0;
    double chi2 = 0.0;
    int dof = 0;
    bool converged = false;
    bool period_fixed = false;
    // set when V clears 3 sigma of zero; callers must not trust alpha0 otherwise
    bool visibility_significant = false;
};

// Damped least squares with 4 phase starts at quarter-period offsets (cosine
// fits are phase-ambiguous). fix_period pins the period at period_guess.
// Throws on under-sampled scans (< 6 points or < 1 period of coverage).
FringeFit fit_fringes(const FringeScan& scan, double period_guess, bool fix_period = false);

// g = pi alpha0 / (k cos tilt), with alpha0 moved by whole periods into the
// branch nearest g_ref (fringe-order ambiguity is resolved by prior).
// Returns (g, sigma_g). Rejects non-converged or insignificant fits.
std::pair<double, double> extract_g(const FringeFit& fit, const Constants<double>& c = rb87_780nm(),
                                    double tilt = 0.0, double g_ref = 9.81);

// Per-shot mid-fringe phase scatter relative to the total interferometer
// phase, scaled to a 1-Hz bandwidth: (2 dP / V) / (2 pi alpha0 / period) *
// sqrt(cycle_time). dP is the residual RMS over the mid-fringe points
// (|P - A/2| < V/4). Throws when V is not significant.
double mid_fringe_precision(const FringeFit& fit, const FringeScan& scan, double cycle_time);

// Small-signal population response dP = (V/2) dPhi at mid-fringe.
double mid_fringe_response(const FringeFit& fit, double dphi);

// JSON serialization with explicit units per field.
std::string fit_to_json(const FringeFit& fit);

}  // namespace atomgrav
