#pragma once
#include <vector>

#include "atomgrav/constants.hpp"

namespace atomgrav {

// One Bloch-oscillation large-momentum-transfer stage: adiabatic load,
// quasimomentum sweep through `units` Brillouin zones, adiabatic unload.
struct BlochSegment {
    double depth_er = 0.0;    // lattice depth in recoil energies
    double load_time = 0.0;   // load/unload ramp duration, s (each)
    double sweep_time = 0.0;  // sweep duration per Brillouin zone, s
    int units = 1;            // number of 2 hbar k units imparted
    int direction = +1;       // +1 accelerates along +k, -1 opposes

    double duration() const { return 2 * load_time + units * sweep_time; }
};

// Probability that the lattice-retained arm tunnels out of the lowest band
// during one zone traversal. Shallow-lattice band-edge gap V0 Er / 2 in the
// standard Landau-Zener form: exp(-pi V0^2 omega_r t_sweep / 64).
double landau_zener_loss(double depth_er, double sweep_time,
                         const Constants<double>& c = rb87_780nm());

// Band gap expressed against the ramp rate 1/t_load: (V0 omega_r / 2) t_load.
// Values well above 1 indicate the load does not excite higher bands.
double adiabaticity_margin(double depth_er, double load_time,
                           const Constants<double>& c = rb87_780nm());

// Piecewise-linear momentum (hbar k units) of both arms across one segment;
// times are relative to the start of the load ramp.
struct MomentumProfile {
    std::vector<double> t;
    std::vector<double> p_retained;
    std::vector<double> p_other;
};

MomentumProfile arm_momentum_profile(const BlochSegment& seg, double p0_hk);

}  // namespace atomgrav
