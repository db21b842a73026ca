#pragma once
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "atomgrav/constants.hpp"

namespace atomgrav {

enum class CloudKind { condensate, thermal };

// Atom ensemble entering the interferometer. Momentum widths are 1-sigma
// Gaussian in hbar*k units (single stored convention; conversions from other
// width conventions happen at the edges). z is the lattice/vertical axis.
struct SourceCloud {
    CloudKind kind = CloudKind::condensate;
    double atom_number = 1.0;
    double dp_par = 0.0;        // longitudinal 1-sigma width, hbar*k
    double dp_perp = 0.0;       // transverse 1-sigma width (per axis), hbar*k
    double sigma_perp = 0.0;    // transverse 1-sigma spatial width, m
    double temperature = 0.0;   // K (thermal only)
    TrapConfig<double> trap{};  // provenance

    void validate() const;  // throws on non-physical fields
};

struct AtomSample {
    double p_par;       // hbar*k
    double vx, vy;      // m/s (transverse velocity)
    double x, y;        // m (transverse position at the first pulse)
};

// Two-photon resonance for an n-th order transition: delta_n = 4 n omega_r.
template <class S = double>
S bragg_resonance(int n, const Constants<S>& c) {
    if (n < 0) throw std::invalid_argument("bragg_resonance: order must be >= 0");
    return S(4) * S(n) * c.omega_r();
}

// Chirp rate (Hz/s) that keeps the lattice resonant with the falling cloud:
// alpha0 = k g cos(theta) / pi. theta is the beam-vertical misalignment.
template <class S = double>
S doppler_chirp_rate(S g, S tilt, const Constants<S>& c) {
    using std::abs;
    if (!(abs(tilt) < std::numbers::pi_v<S> / 2))
        throw std::invalid_argument("doppler_chirp_rate: |tilt| must be < pi/2");
    return c.k() * g * std::cos(tilt) / std::numbers::pi_v<S>;
}

// 1-sigma Maxwell-Boltzmann momentum width sqrt(m kB T)/(hbar k), in hbar*k.
template <class S = double>
S thermal_momentum_width(S temperature, const Constants<S>& c) {
    if (!(temperature > S(0)))
        throw std::invalid_argument("thermal_momentum_width: temperature must be > 0");
    constexpr S kB = S(1.380649e-23);
    return std::sqrt(c.mass * kB * temperature) / (c.hbar * c.k());
}

// Deterministic Gaussian phase-space samples; same (cloud, count, seed) gives
// the same stream regardless of caller threading.
std::vector<AtomSample> sample_atoms(const SourceCloud& cloud, int count, std::uint64_t seed,
                                     const Constants<double>& c = rb87_780nm());

}  // namespace atomgrav
