#include "atomgrav/meanfield.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "atomgrav/ode.hpp"

namespace atomgrav {

double chemical_potential(double atom_number, const TrapConfig<double>& trap,
                          const Constants<double>& c) {
    if (atom_number <= 0) throw std::invalid_argument("chemical_potential: N must be > 0");
    if (!(trap.wx > 0 && trap.wy > 0 && trap.wz > 0))
        throw std::invalid_argument("chemical_potential: all trap frequencies must be > 0");
    const double wbar = trap.geometric_mean();
    const double abar = std::sqrt(c.hbar / (c.mass * wbar));
    return 0.5 * c.hbar * wbar * std::pow(15.0 * atom_number * c.a_scatt / abar, 0.4);
}

MeanFieldModel make_meanfield_model(double atom_number, const TrapConfig<double>& trap,
                                    const Constants<double>& c) {
    MeanFieldModel m;
    m.atom_number = atom_number;
    m.trap = trap;
    m.cst = c;
    m.mu = chemical_potential(atom_number, trap, c);
    m.interaction_u = c.interaction_U();
    m.peak_density = m.mu / m.interaction_u;
    const double w[3] = {trap.wx, trap.wy, trap.wz};
    for (int i = 0; i < 3; ++i) m.radius[i] = std::sqrt(2.0 * m.mu / (c.mass * w[i] * w[i]));
    m.volume0 = 4.0 * std::numbers::pi / 3.0 * m.radius.prod();
    return m;
}

namespace {

using V6 = Eigen::Matrix<double, 6, 1>;

V6 scaling_rhs_eval(const TrapConfig<double>& trap, const V6& y) {
    V6 dy;
    const double vol = y[0] * y[1] * y[2];
    const double w2[3] = {trap.wx * trap.wx, trap.wy * trap.wy, trap.wz * trap.wz};
    for (int i = 0; i < 3; ++i) {
        dy[i] = y[3 + i];
        dy[3 + i] = w2[i] / (y[i] * vol);
    }
    return dy;
}

}  // namespace

ScalingState evolve_scaling(const TrapConfig<double>& trap, double t) {
    if (t < 0) throw std::invalid_argument("evolve_scaling: t must be >= 0");
    ScalingState s;
    s.t = t;
    if (t == 0) return s;
    auto rhs = [&](double, const V6& y, V6& dy) { dy = scaling_rhs_eval(trap, y); };
    OdeOptions opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-12;
    V6 y0;
    y0 << 1, 1, 1, 0, 0, 0;
    V6 y = rk45_integrate(rhs, y0, 0.0, t, opt);
    s.lambda = y.head<3>();
    s.lambda_dot = y.tail<3>();
    return s;
}

double momentum_width(const MeanFieldModel& model, double t) {
    auto s = evolve_scaling(model.trap, t);
    const double p = model.cst.mass * s.lambda_dot[2] * model.radius[2] / std::sqrt(7.0);
    return p / (model.cst.hbar * model.cst.k());
}

double dephasing_rate(const MeanFieldModel& model, double t) {
    auto s = evolve_scaling(model.trap, t);
    return model.mu / (model.cst.hbar * std::sqrt(model.atom_number) * s.volume_ratio());
}

double integrated_dephasing(const MeanFieldModel& model, double t_exp, double T) {
    if (t_exp < 0 || T < 0) throw std::invalid_argument("integrated_dephasing: negative time");
    if (T == 0) return 0.0;
    const double rate_scale = model.mu / (model.cst.hbar * std::sqrt(model.atom_number));
    using V7 = Eigen::Matrix<double, 7, 1>;
    auto rhs = [&](double, const V7& y, V7& dy) {
        dy.head<6>() = scaling_rhs_eval(model.trap, y.head<6>());
        dy[6] = rate_scale / (y[0] * y[1] * y[2]);
    };
    OdeOptions opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-12;
    V7 y;
    y << 1, 1, 1, 0, 0, 0, 0;
    if (t_exp > 0) {
        // free expansion without phase accumulation, then reset the integral
        V6 y0;
        y0 << 1, 1, 1, 0, 0, 0;
        auto rhs6 = [&](double, const V6& q, V6& dq) { dq = scaling_rhs_eval(model.trap, q); };
        V6 ye = rk45_integrate(rhs6, y0, 0.0, t_exp, opt);
        y.head<6>() = ye;
    }
    y = rk45_integrate(rhs, y, t_exp, t_exp + 2 * T, opt);
    return y[6];
}

std::vector<SensitivityRow> sensitivity_curves(const MeanFieldModel& model,
                                               const std::vector<double>& T_grid,
                                               const std::vector<double>& t_exp_grid, int n,
                                               double g) {
    if (T_grid.empty() || t_exp_grid.empty())
        throw std::invalid_argument("sensitivity_curves: empty grid");
    const double k = model.cst.k();
    std::vector<SensitivityRow> rows;
    rows.reserve(T_grid.size() * t_exp_grid.size());
    for (double te : t_exp_grid) {
        for (double T : T_grid) {
            SensitivityRow r;
            r.T = T;
            r.t_exp = te;
            const double scale_phase = 2.0 * n * k * g * T * T;  // full fringe phase
            r.dephasing_dgg = integrated_dephasing(model, te, T) / scale_phase;
            r.shot_noise_dgg = 1.0 / (std::sqrt(model.atom_number) * scale_phase);
            rows.push_back(r);
        }
    }
    return rows;
}

}  // namespace atomgrav
