#pragma once
#include <cmath>
#include <numbers>

namespace atomgrav {

// Laser/atom constants for the vertical Bragg lattice. All SI; momenta that
// cross module boundaries are expressed in units of hbar*k (one photon recoil).
template <class S = double>
struct Constants {
    S hbar;      // J s
    S mass;      // kg
    S lambda;    // lattice wavelength, m
    S a_scatt;   // s-wave scattering length, m

    S k() const { return S(2) * std::numbers::pi_v<S> / lambda; }
    S omega_r() const { return hbar * k() * k() / (S(2) * mass); }  // rad/s
    S recoil_velocity() const { return hbar * k() / mass; }         // m/s per hbar*k
    // interaction parameter U = 4*pi*hbar^2*a/m (J m^3)
    S interaction_U() const {
        return S(4) * std::numbers::pi_v<S> * hbar * hbar * a_scatt / mass;
    }
};

// 87Rb addressed on the 780 nm D2 line; scattering length 100.4 a0.
template <class S = double>
constexpr Constants<S> rb87_780nm() {
    return Constants<S>{
        S(1.054571817e-34),
        S(86.909180527 * 1.66053906660e-27),
        S(780.241e-9),
        S(100.4 * 0.529177210903e-10),
    };
}

template <class S = double>
struct TrapConfig {
    S wx, wy, wz;  // angular frequencies, rad/s; z is the vertical (lattice) axis

    S geometric_mean() const { return std::cbrt(wx * wy * wz); }
};

}  // namespace atomgrav
