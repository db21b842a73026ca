#include "atomgrav/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace atomgrav {

namespace {

struct Ramp {
    double a = 0.0, b = 0.0;  // ramp window, s
    double dp = 0.0;          // total momentum change across the window, hbar k
};

double ramp_at(const Ramp& r, double t) {
    if (t <= r.a) return 0.0;
    if (t >= r.b) return r.dp;
    return r.dp * (t - r.a) / (r.b - r.a);
}

const TrajectorySegment& segment_at(const std::vector<TrajectorySegment>& segs, double t) {
    if (segs.empty()) throw std::logic_error("ArmTrajectory: empty trajectory");
    for (const auto& s : segs)
        if (t <= s.t1) return s;
    return segs.back();
}

}  // namespace

double ArmTrajectory::momentum_at(double t) const {
    const auto& s = segment_at(segs, t);
    if (s.t1 == s.t0) return s.p0;
    const double u = std::clamp((t - s.t0) / (s.t1 - s.t0), 0.0, 1.0);
    return s.p0 + (s.p1 - s.p0) * u;
}

double ArmTrajectory::position_at(double t) const {
    const auto& s = segment_at(segs, t);
    const double h = s.t1 - s.t0;
    const double dt = std::clamp(t - s.t0, 0.0, std::max(h, 0.0));
    const double slope = h > 0 ? (s.p1 - s.p0) / h : 0.0;
    return s.z0 + vr * (s.p0 * dt + 0.5 * slope * dt * dt);
}

PulseSequence build_mach_zehnder(int n, double T, const SourceCloud& cloud,
                                 const Constants<double>& c) {
    if (T <= 0) throw std::invalid_argument("build_mach_zehnder: T must be > 0");
    PulseSequence seq;
    seq.n = n;
    seq.T = T;
    seq.cst = c;
    seq.splitter = design_pulse(n, TransferTarget::half, cloud, c);
    seq.mirror = design_pulse(n, TransferTarget::full, cloud, c);
    seq.recombiner = seq.splitter;
    return seq;
}

std::pair<ArmTrajectory, ArmTrajectory> arm_trajectories(const PulseSequence& seq) {
    if (seq.T <= 0) throw std::invalid_argument("arm_trajectories: T must be > 0");
    const double T = seq.T, tend = 2 * seq.T;

    std::vector<Ramp> ramps[2];
    for (const auto& ins : seq.bloch) {
        if (ins.arm != 0 && ins.arm != 1)
            throw std::invalid_argument("arm_trajectories: Bloch insertion arm must be 0 or 1");
        const auto& s = ins.segment;
        const double t0 = ins.t_start, t1 = ins.t_start + s.duration();
        if (t0 < 0 || t1 > tend)
            throw std::invalid_argument("arm_trajectories: Bloch insertion outside [0, 2T]");
        if (t0 < T && t1 > T)
            throw std::invalid_argument("arm_trajectories: Bloch insertion straddles the mirror");
        Ramp r;
        r.a = t0 + s.load_time;
        r.b = r.a + s.units * s.sweep_time;
        r.dp = 2.0 * s.units * s.direction;
        ramps[ins.arm].push_back(r);
    }
    for (auto& rs : ramps) {
        std::sort(rs.begin(), rs.end(), [](const Ramp& x, const Ramp& y) { return x.a < y.a; });
        for (size_t i = 1; i < rs.size(); ++i)
            if (rs[i].a < rs[i - 1].b)
                throw std::invalid_argument("arm_trajectories: overlapping Bloch insertions");
    }

    // arm 1 is diffracted by the first splitter (+2n hbar k), swapped back at
    // the mirror; Bloch ramps stack on top of that baseline
    auto p_of = [&](int arm, double t) {
        const bool kicked = (arm == 1) == (t < T);
        double p = kicked ? 2.0 * seq.n : 0.0;
        for (const auto& r : ramps[arm]) p += ramp_at(r, t);
        return p;
    };

    std::vector<double> knots{0.0, T, tend};
    for (auto& rs : ramps)
        for (const auto& r : rs) {
            knots.push_back(r.a);
            knots.push_back(r.b);
        }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-15; }),
                knots.end());

    const double vr = seq.cst.hbar * seq.cst.k() / seq.cst.mass;  // m/s per hbar k
    std::pair<ArmTrajectory, ArmTrajectory> out;
    for (int a = 0; a < 2; ++a) {
        ArmTrajectory& traj = a == 1 ? out.first : out.second;
        traj.vr = vr;
        double z = 0.0;
        const double eps = 1e-12 * std::max(1.0, tend);
        for (size_t i = 0; i + 1 < knots.size(); ++i) {
            TrajectorySegment s;
            s.t0 = knots[i];
            s.t1 = knots[i + 1];
            s.p0 = p_of(a, s.t0 + eps);
            s.p1 = p_of(a, s.t1 - eps);
            s.z0 = z;
            z += vr * 0.5 * (s.p0 + s.p1) * (s.t1 - s.t0);
            traj.segs.push_back(s);
        }
    }
    return out;
}

void check_closure(const PulseSequence& seq) {
    auto [up, lo] = arm_trajectories(seq);
    const double tend = 2 * seq.T;
    const double dz = up.position_at(tend) - lo.position_at(tend);
    if (std::abs(dz) > 1e-6)
        throw std::runtime_error("sequence does not close: final arm separation " +
                                 std::to_string(dz * 1e6) + " um exceeds 1 um");
    // at recombination the momentum split must be the bare two-port value
    // (every Bloch excursion undone), so both output ports exist
    const double dp = up.momentum_at(tend) - lo.momentum_at(tend);
    if (std::abs(dp + 2.0 * seq.n) > 1e-9)
        throw std::runtime_error("sequence does not close: residual momentum offset " +
                                 std::to_string(dp + 2.0 * seq.n) + " hbar k at recombination");
}

namespace {

// integral of |d0 + d1 s + d2 s^2| over [0, h], splitting at interior roots
double abs_quadratic_integral(double d0, double d1, double d2, double h) {
    auto antider = [&](double s) { return s * (d0 + s * (d1 / 2 + s * d2 / 3)); };
    std::vector<double> cuts{0.0, h};
    if (std::abs(d2) > 0) {
        const double disc = d1 * d1 - 4 * d2 * d0;
        if (disc >= 0) {
            const double sq = std::sqrt(disc);
            // Citardauq-stable pair of roots
            const double q = -0.5 * (d1 + (d1 >= 0 ? sq : -sq));
            for (double r : {q / d2, d0 != 0.0 ? d0 / q : 0.0})
                if (r > 0 && r < h) cuts.push_back(r);
        }
    } else if (std::abs(d1) > 0) {
        const double r = -d0 / d1;
        if (r > 0 && r < h) cuts.push_back(r);
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        acc += std::abs(antider(cuts[i + 1]) - antider(cuts[i]));
    return acc;
}

}  // namespace

double effective_order(const PulseSequence& seq) {
    check_closure(seq);
    auto [up, lo] = arm_trajectories(seq);

    std::vector<double> knots;
    for (const auto* t : {&up, &lo})
        for (const auto& s : t->segs) {
            knots.push_back(s.t0);
            knots.push_back(s.t1);
        }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-15; }),
                knots.end());

    const double vr = up.vr;
    double area = 0.0;  // integral |z_u - z_l| dt, m s
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], h = knots[i + 1] - knots[i];
        if (h <= 0) continue;
        // both momenta are linear on this interval, so the separation is an
        // exact quadratic in s = t - a
        const double pu0 = up.momentum_at(a + h * 1e-9), pu1 = up.momentum_at(a + h * (1 - 1e-9));
        const double pl0 = lo.momentum_at(a + h * 1e-9), pl1 = lo.momentum_at(a + h * (1 - 1e-9));
        const double d0 = up.position_at(a) - lo.position_at(a);
        const double d1 = vr * (pu0 - pl0);
        const double d2 = vr * ((pu1 - pu0) - (pl1 - pl0)) / (2 * h);
        area += abs_quadratic_integral(d0, d1, d2, h);
    }
    const double hk = seq.cst.hbar * seq.cst.k();
    return seq.cst.mass * area / (2.0 * hk * seq.T * seq.T);
}

double interferometer_phase(const PulseSequence& seq, double g, double alpha) {
    const double neff = effective_order(seq);
    return (2.0 * seq.cst.k() * g - 2.0 * std::numbers::pi * alpha) * neff * seq.T * seq.T;
}

}  // namespace atomgrav
