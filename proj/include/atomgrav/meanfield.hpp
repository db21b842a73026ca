#pragma once
#include <Eigen/Dense>
#include <vector>

#include "atomgrav/constants.hpp"

namespace atomgrav {

// Thomas-Fermi condensate released from a harmonic trap.
struct MeanFieldModel {
    double atom_number = 0.0;
    TrapConfig<double> trap{};
    Constants<double> cst = rb87_780nm();

    double mu = 0.0;            // chemical potential, J
    double interaction_u = 0.0; // 4 pi hbar^2 a / m, J m^3
    double peak_density = 0.0;  // n(0) = mu / U, m^-3
    Eigen::Vector3d radius{0, 0, 0};  // TF radii, m
    double volume0 = 0.0;       // TF ellipsoid volume, m^3
};

// Anisotropic scale factors of the expanding condensate.
struct ScalingState {
    Eigen::Vector3d lambda{1, 1, 1};
    Eigen::Vector3d lambda_dot{0, 0, 0};
    double t = 0.0;

    double volume_ratio() const { return lambda.prod(); }
};

// mu = (hbar wbar / 2) (15 N a / abar)^(2/5), abar = sqrt(hbar / m wbar).
double chemical_potential(double atom_number, const TrapConfig<double>& trap,
                          const Constants<double>& c = rb87_780nm());

// Populates the derived TF quantities (mu, U, n(0), radii, V(0)).
MeanFieldModel make_meanfield_model(double atom_number, const TrapConfig<double>& trap,
                                    const Constants<double>& c = rb87_780nm());

// Free expansion: integrates lambda_i'' = w_i^2 / (lambda_i lx ly lz) from
// lambda = 1, lambda' = 0 at release.
ScalingState evolve_scaling(const TrapConfig<double>& trap, double t);

// 1-sigma vertical momentum width of the expanding cloud in hbar k units:
// m lambda_z' R_z / sqrt(7) (TF velocity-field marginal along z).
double momentum_width(const MeanFieldModel& model, double t);

// Mean-field phase-diffusion rate w_mf(t) = mu V(0) / (hbar sqrt(N) V(t)).
double dephasing_rate(const MeanFieldModel& model, double t);

// Integral of w_mf over the interferometer window [t_exp, t_exp + 2T].
double integrated_dephasing(const MeanFieldModel& model, double t_exp, double T);

struct SensitivityRow {
    double T = 0.0;      // interferometer half-time, s
    double t_exp = 0.0;  // pre-expansion time, s
    double dephasing_dgg = 0.0;  // dephasing-limited relative precision
    double shot_noise_dgg = 0.0;
};

// Per-shot relative-precision budget on a (T, t_exp) grid for order-n Bragg:
// dephasing dg/g = dPhi_mf / (2 n k g T^2); shot noise dg/g = N^-1/2 / (2 n k g T^2).
std::vector<SensitivityRow> sensitivity_curves(const MeanFieldModel& model,
                                               const std::vector<double>& T_grid,
                                               const std::vector<double>& t_exp_grid, int n,
                                               double g = 9.81);

}  // namespace atomgrav
