#include "atomgrav/bloch.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace atomgrav {

double landau_zener_loss(double depth_er, double sweep_time, const Constants<double>& c) {
    if (depth_er <= 0 || sweep_time <= 0)
        throw std::invalid_argument("landau_zener_loss: depth and sweep time must be > 0");
    const double x = std::numbers::pi * depth_er * depth_er * c.omega_r() * sweep_time / 64.0;
    return std::exp(-x);
}

double adiabaticity_margin(double depth_er, double load_time, const Constants<double>& c) {
    if (depth_er <= 0 || load_time < 0)
        throw std::invalid_argument("adiabaticity_margin: invalid inputs");
    return 0.5 * depth_er * c.omega_r() * load_time;
}

MomentumProfile arm_momentum_profile(const BlochSegment& seg, double p0_hk) {
    if (seg.depth_er <= 0 || seg.sweep_time <= 0 || seg.load_time < 0 || seg.units < 0)
        throw std::invalid_argument("arm_momentum_profile: invalid segment");
    MomentumProfile prof;
    const double kick = 2.0 * seg.units * seg.direction;
    prof.t = {0.0, seg.load_time, seg.load_time + seg.units * seg.sweep_time, seg.duration()};
    prof.p_retained = {p0_hk, p0_hk, p0_hk + kick, p0_hk + kick};
    prof.p_other = {p0_hk, p0_hk, p0_hk, p0_hk};
    return prof;
}

}  // namespace atomgrav
