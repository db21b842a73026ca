#include "atomgrav/bragg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "atomgrav/levmar.hpp"
#include "atomgrav/ode.hpp"

namespace atomgrav {

using cd = std::complex<double>;

double BraggPulse::rabi(double t) const {
    if (envelope == Envelope::square) return std::abs(t) <= tau / 2 ? omega_peak : 0.0;
    if (std::abs(t) > trunc) return 0.0;
    // truncated at +-trunc and shifted so the envelope starts/ends at zero
    const double base = std::exp(-trunc * trunc / (2 * tau * tau));
    return omega_peak * (std::exp(-t * t / (2 * tau * tau)) - base) / (1 - base);
}

double BraggPulse::envelope_area() const {
    if (envelope == Envelope::square) return tau;
    const double base = std::exp(-trunc * trunc / (2 * tau * tau));
    const double erfpart = std::erf(trunc / (tau * std::numbers::sqrt2));
    return (tau * std::sqrt(2 * std::numbers::pi) * erfpart - 2 * trunc * base) / (1 - base);
}

LadderState LadderState::basis(double p0, int jmin, int jmax, int j_occupied) {
    if (j_occupied < jmin || j_occupied > jmax)
        throw std::invalid_argument("LadderState::basis: occupied state outside span");
    LadderState s;
    s.p0 = p0;
    s.jmin = jmin;
    s.jmax = jmax;
    s.c = Eigen::VectorXcd::Zero(jmax - jmin + 1);
    s.c[j_occupied - jmin] = 1.0;
    return s;
}

double LadderState::edge_occupation() const {
    return std::max(std::norm(c[0]), std::norm(c[c.size() - 1]));
}

LadderState evolve_ladder(const BraggPulse& pulse, const LadderState& initial,
                          const Constants<double>& cst, double rtol) {
    if (std::abs(initial.norm_sq() - 1.0) > 1e-9)
        throw std::invalid_argument("evolve_ladder: initial state not normalized");
    const int dim = initial.jmax - initial.jmin + 1;
    const double wr = cst.omega_r();
    Eigen::VectorXd w(dim);
    for (int i = 0; i < dim; ++i) {
        const double j = initial.jmin + i;
        w[i] = wr * (initial.p0 + 2 * j) * (initial.p0 + 2 * j);
    }
    Eigen::VectorXd jidx(dim);
    for (int i = 0; i < dim; ++i) jidx[i] = initial.jmin + i;

    const double half_window = pulse.envelope == Envelope::square ? pulse.tau / 2 : pulse.trunc;
    auto rhs = [&](double t, const Eigen::VectorXcd& c, Eigen::VectorXcd& dc) {
        const double om = 0.5 * pulse.rabi(t);
        const double delta = pulse.delta.base + pulse.delta.slope * t;
        for (int i = 0; i < dim; ++i) {
            cd acc = (w[i] - jidx[i] * delta) * c[i];
            if (i > 0) acc += om * c[i - 1];
            if (i + 1 < dim) acc += om * c[i + 1];
            dc[i] = cd(0, -1) * acc;
        }
    };

    OdeOptions opt;
    opt.rtol = rtol;
    opt.atol = 1e-12;
    double peak_edge = 0.0;
    auto watch_edge = [&](double, const Eigen::VectorXcd& c) {
        peak_edge = std::max(peak_edge,
                             std::max(std::norm(c[0]), std::norm(c[c.size() - 1])));
    };
    LadderState out = initial;
    out.c = rk45_integrate(rhs, initial.c, -half_window, half_window, opt, watch_edge);
    out.t = initial.t + 2 * half_window;
    if (peak_edge > 1e-4)
        throw TruncationError("evolve_ladder: ladder span too small (edge occupation " +
                              std::to_string(peak_edge) + " > 1e-4)");
    return out;
}

Eigen::Matrix2cd port_matrix(const BraggPulse& pulse, double p0, const Constants<double>& cst,
                             double rtol) {
    const int n = pulse.n;
    for (int span = std::abs(n) + 3; span <= std::abs(n) + 13; span += 2) {
        try {
            Eigen::Matrix2cd m;
            for (int col = 0; col < 2; ++col) {
                auto s0 = LadderState::basis(p0, -span, n + span, col == 0 ? 0 : n);
                auto s1 = evolve_ladder(pulse, s0, cst, rtol);
                m(0, col) = s1.amplitude(0);
                m(1, col) = s1.amplitude(n);
            }
            return m;
        } catch (const TruncationError&) {
            // grow span and retry
        }
    }
    throw TruncationError("port_matrix: ladder span growth exhausted");
}

std::vector<std::pair<double, double>> gauss_hermite(int npts) {
    // probabilists' Hermite: recurrence beta_j = sqrt(j); weights from the
    // first components of the Jacobi-matrix eigenvectors
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npts, npts);
    for (int j = 1; j < npts; ++j) {
        const double b = std::sqrt(static_cast<double>(j));
        J(j, j - 1) = b;
        J(j - 1, j) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<std::pair<double, double>> rule(npts);
    for (int i = 0; i < npts; ++i) {
        const double w = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        rule[i] = {es.eigenvalues()[i], w};
    }
    return rule;
}

double ensemble_mean_transfer(const BraggPulse& pulse, const SourceCloud& cloud,
                              const Constants<double>& cst, int quad_pts, double rtol) {
    if (cloud.dp_par <= 0.0) {
        auto m = port_matrix(pulse, 0.0, cst, rtol);
        return std::norm(m(1, 0));
    }
    auto rule = gauss_hermite(quad_pts);
    double acc = 0.0;
    for (auto [x, w] : rule) {
        auto m = port_matrix(pulse, cloud.dp_par * x, cst, rtol);
        acc += w * std::norm(m(1, 0));
    }
    return acc;
}

double effective_rabi(int n, double omega, const Constants<double>& cst) {
    if (n < 1) throw std::invalid_argument("effective_rabi: order must be >= 1");
    double denom = 1.0;
    const double wr = cst.omega_r();
    for (int j = 1; j < n; ++j) denom *= 2.0 * (4.0 * wr * j * (n - j));
    return std::pow(omega, n) / denom;
}

namespace {

// omega_peak giving integral(effective_rabi(envelope)) = pi for a Gaussian
// envelope: int Omega^n exp(-n t^2 / 2 tau^2) dt = Omega^n tau sqrt(2 pi / n)
double pi_area_omega(int n, double tau, const Constants<double>& cst) {
    double denom = 1.0;
    const double wr = cst.omega_r();
    for (int j = 1; j < n; ++j) denom *= 2.0 * (4.0 * wr * j * (n - j));
    const double integral_unit = tau * std::sqrt(2 * std::numbers::pi / n);
    return std::pow(std::numbers::pi * denom / integral_unit, 1.0 / n);
}

BraggPulse make_gaussian(int n, double tau, double omega, const Constants<double>& cst) {
    BraggPulse p;
    p.n = n;
    p.envelope = Envelope::gaussian;
    p.tau = tau;
    p.omega_peak = omega;
    p.trunc = 4 * tau;
    p.delta.base = bragg_resonance(n, cst);
    p.window_hi = cst.omega_r();
    return p;
}

struct DesignEval {
    double tau, omega, eff;
};

}  // namespace

BraggPulse design_pulse(int n, TransferTarget target, const SourceCloud& cloud,
                        const Constants<double>& cst) {
    if (n < 1) throw std::invalid_argument("design_pulse: order must be >= 1");
    const double wr = cst.omega_r();
    const double window_lo = 2.0 * wr * cloud.dp_par;  // dp*k/m in s^-1
    const double window_hi = wr;
    if (window_lo >= window_hi)
        throw std::invalid_argument(
            "design_pulse: empty design window — dp*k/m = " + std::to_string(window_lo) +
            " s^-1 is not below omega_r = " + std::to_string(window_hi) +
            " s^-1 (cloud too hot)");

    // tau search range: below ~0.25/omega_r the pulse leaves the Bragg regime
    // entirely (Raman-Nath); above 1/(dp*k/m) it no longer addresses the cloud.
    const double tau_min = 0.25 / wr;
    double tau_max = std::min(window_lo > 0 ? 1.0 / window_lo : 8.0 / wr, 8.0 / wr);
    if (tau_max < 2 * tau_min) tau_max = 2 * tau_min;

    auto eval = [&](double tau, double omega, int quad, double rtol) {
        return ensemble_mean_transfer(make_gaussian(n, tau, omega, cst), cloud, cst, quad, rtol);
    };

    // per-tau omega search: coarse multiplicative grid around the perturbative
    // pi-area estimate, preferring the smallest omega within 1e-4 of the peak
    // (avoids landing on 3pi solutions for narrow ensembles)
    auto best_omega = [&](double tau, int quad, double rtol) {
        const double om0 = pi_area_omega(n, tau, cst);
        double best_eff = -1.0, best_om = om0;
        std::vector<std::pair<double, double>> evals;
        for (double f = 0.5; f <= 2.501; f *= 1.06) {
            const double om = f * om0;
            const double e = eval(tau, om, quad, rtol);
            evals.push_back({om, e});
            if (e > best_eff) {
                best_eff = e;
                best_om = om;
            }
        }
        for (auto& [om, e] : evals)
            if (e >= best_eff - 1e-4 && om < best_om) best_om = om;
        // parabolic refinement in log(omega)
        double lo = best_om / 1.06, hi = best_om * 1.06;
        for (int it = 0; it < 12; ++it) {
            const double m1 = best_om * std::pow(lo / best_om, 0.5);
            const double m2 = best_om * std::pow(hi / best_om, 0.5);
            const double e1 = eval(tau, m1, quad, rtol);
            const double eb = eval(tau, best_om, quad, rtol);
            const double e2 = eval(tau, m2, quad, rtol);
            if (e1 > eb && e1 >= e2) {
                hi = best_om;
                best_om = m1;
            } else if (e2 > eb) {
                lo = best_om;
                best_om = m2;
            } else {
                lo = m1;
                hi = m2;
            }
        }
        return DesignEval{tau, best_om, eval(tau, best_om, quad, rtol)};
    };

    // coarse tau sweep (log-spaced), light quadrature
    DesignEval best{0, 0, -1};
    const int tau_pts = 12;
    for (int i = 0; i < tau_pts; ++i) {
        const double tau = tau_min * std::pow(tau_max / tau_min, i / double(tau_pts - 1));
        auto d = best_omega(tau, 8, 1e-6);
        if (d.eff > best.eff) best = d;
    }
    // refine tau around the winner
    double lo = best.tau / std::pow(tau_max / tau_min, 1.0 / (tau_pts - 1));
    double hi = best.tau * std::pow(tau_max / tau_min, 1.0 / (tau_pts - 1));
    lo = std::max(lo, tau_min);
    hi = std::min(hi, tau_max);
    for (int it = 0; it < 7; ++it) {
        const double t1 = best.tau * std::pow(lo / best.tau, 0.5);
        const double t2 = best.tau * std::pow(hi / best.tau, 0.5);
        auto d1 = best_omega(t1, 8, 1e-6);
        auto d2 = best_omega(t2, 8, 1e-6);
        if (d1.eff > best.eff && d1.eff >= d2.eff) {
            hi = best.tau;
            best = d1;
        } else if (d2.eff > best.eff) {
            lo = best.tau;
            best = d2;
        } else {
            lo = t1;
            hi = t2;
        }
    }
    // final omega polish at full quadrature/tolerance
    auto final_design = best_omega(best.tau, 16, 1e-8);

    BraggPulse pulse = make_gaussian(n, final_design.tau, final_design.omega, cst);
    pulse.window_lo = window_lo;
    pulse.within_bragg_window = (1.0 / pulse.tau < window_hi) && (1.0 / pulse.tau > window_lo);

    if (target == TransferTarget::half) {
        // smallest omega with mean transfer 0.5 (monotone on the rising branch)
        double omlo = 0.0, omhi = final_design.omega;
        double e_hi = ensemble_mean_transfer(pulse, cloud, cst, 16, 1e-8);
        if (e_hi < 0.5)
            throw std::runtime_error("design_pulse: cannot reach 0.5 mean transfer for half target");
        for (int it = 0; it < 60; ++it) {
            const double om = 0.5 * (omlo + omhi);
            pulse.omega_peak = om;
            const double e = ensemble_mean_transfer(pulse, cloud, cst, 16, 1e-8);
            if (std::abs(e - 0.5) < 0.004) break;
            (e < 0.5 ? omlo : omhi) = om;
        }
    }
    return pulse;
}

double two_level_gaussian_transfer(double tau, double delta, double area) {
    if (area <= 0) area = std::numbers::pi;
    if (tau <= 0.0) return std::pow(std::sin(area / 2), 2);  // broadband limit
    const double trunc = 4 * tau;
    const double base = std::exp(-8.0);
    const double erfpart = std::erf(4.0 / std::numbers::sqrt2);
    const double unit_area =
        (tau * std::sqrt(2 * std::numbers::pi) * erfpart - 2 * trunc * base) / (1 - base);
    const double om_pk = area / unit_area;
    auto om = [&](double t) {
        return om_pk * (std::exp(-t * t / (2 * tau * tau)) - base) / (1 - base);
    };
    using V = Eigen::Vector4d;  // (Re c0, Im c0, Re c1, Im c1)
    auto rhs = [&](double t, const V& y, V& dy) {
        const double o = 0.5 * om(t);
        // i c0' = o c1 ; i c1' = delta c1 + o c0
        dy[0] = o * y[3];
        dy[1] = -o * y[2];
        dy[2] = delta * y[3] + o * y[1];
        dy[3] = -delta * y[2] - o * y[0];
    };
    OdeOptions opt;
    opt.rtol = 1e-10;
    opt.atol = 1e-13;
    V y0(1, 0, 0, 0);
    V y = rk45_integrate(rhs, y0, -trunc, trunc, opt);
    return y[2] * y[2] + y[3] * y[3];
}

SourceCloud velocity_select(double pulse_duration, const SourceCloud& cloud_in,
                            const Constants<double>& cst) {
    if (!(pulse_duration >= 0.0))
        throw std::invalid_argument("velocity_select: duration must be >= 0");
    SourceCloud cloud = cloud_in;
    if (pulse_duration == 0.0 || cloud.dp_par == 0.0) return cloud;
    const double wr = cst.omega_r();
    const double sig = cloud.dp_par;
    // transfer profile of the n=1 selection pulse at atom momentum p (hbar k)
    auto transfer = [&](double p) {
        return two_level_gaussian_transfer(pulse_duration, 4.0 * wr * p);
    };
    // integrate T(p) * gaussian prior on a wide fixed grid (profile has slow
    // sinc-like lobes, so plain dense trapezoid beats Gauss-Hermite here)
    const int N = 1601;
    const double span = 8.0 * sig;
    double kept = 0.0, second = 0.0;
    for (int i = 0; i < N; ++i) {
        const double p = -span + 2 * span * i / (N - 1);
        const double wgt = std::exp(-p * p / (2 * sig * sig)) * (i == 0 || i == N - 1 ? 0.5 : 1.0);
        const double t = transfer(p);
        kept += wgt * t;
        second += wgt * t * p * p;
    }
    const double norm = [&] {
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
            const double p = -span + 2 * span * i / (N - 1);
            s += std::exp(-p * p / (2 * sig * sig)) * (i == 0 || i == N - 1 ? 0.5 : 1.0);
        }
        return s;
    }();
    const double frac = kept / norm;
    cloud.dp_par = std::sqrt(second / kept);
    cloud.atom_number = std::max(1.0, cloud.atom_number * frac);
    return cloud;
}

BraggPulse make_spectroscopy_probe(const SourceCloud& cloud, const Constants<double>& cst) {
    const double wr = cst.omega_r();
    const double doppler = 2.0 * wr * std::max(cloud.dp_par, 1e-3);
    // resolve the cloud: Fourier width well below the Doppler spread
    const double tau = std::max(300e-6, 3.0 / doppler);
    BraggPulse p = make_gaussian(1, tau, 0.0, cst);
    const double area = 0.5 * std::numbers::pi;  // weak probe, peak transfer 0.5
    p.omega_peak = area / p.envelope_area();
    p.window_lo = doppler;
    p.within_bragg_window = 1.0 / tau < cst.omega_r();
    return p;
}

SpectroscopyResult bragg_spectroscopy(const SourceCloud& cloud, const BraggPulse& probe,
                                      const std::vector<double>& detuning_grid,
                                      const Constants<double>& cst) {
    if (detuning_grid.size() < 5)
        throw std::invalid_argument("bragg_spectroscopy: detuning grid too small");
    const double wr = cst.omega_r();
    if (cloud.dp_par > 0.0 && 1.0 / probe.tau >= 10.0 * 2.0 * wr * cloud.dp_par)
        throw std::invalid_argument(
            "bragg_spectroscopy: probe too short to resolve the cloud (1/tau >= 10 dp k/m)");

    const double area = probe.omega_peak * probe.envelope_area();
    auto rule = gauss_hermite(24);
    SpectroscopyResult res;
    res.detuning = detuning_grid;
    res.transfer.reserve(detuning_grid.size());
    for (double off : detuning_grid) {
        double acc = 0.0;
        if (cloud.dp_par > 0.0) {
            for (auto [x, w] : rule) {
                const double doppler = 4.0 * probe.n * wr * cloud.dp_par * x;
                acc += w * two_level_gaussian_transfer(probe.tau, doppler - off, area);
            }
        } else {
            acc = two_level_gaussian_transfer(probe.tau, -off, area);
        }
        res.transfer.push_back(acc);
    }

    // gaussian fit: a exp(-(x-x0)^2 / 2 s^2) + b
    double peak = 0.0, xpeak = 0.0;
    for (size_t i = 0; i < res.transfer.size(); ++i)
        if (res.transfer[i] > peak) {
            peak = res.transfer[i];
            xpeak = res.detuning[i];
        }
    double span = std::abs(res.detuning.back() - res.detuning.front());
    Eigen::VectorXd p0(4);
    p0 << peak, xpeak, span / 6, 0.0;
    auto residuals = [&](const Eigen::VectorXd& q) {
        Eigen::VectorXd r(res.detuning.size());
        for (size_t i = 0; i < res.detuning.size(); ++i) {
            const double z = (res.detuning[i] - q[1]) / q[2];
            r[i] = q[0] * std::exp(-0.5 * z * z) + q[3] - res.transfer[i];
        }
        return r;
    };
    auto fitres = levmar(residuals, p0);
    res.converged = fitres.converged;
    if (!res.converged)
        throw std::runtime_error("bragg_spectroscopy: gaussian width fit did not converge");
    res.fitted_width_sigma = std::abs(fitres.params[2]);
    // two-photon Doppler relation: detuning = 2 n k p / m = 4 n omega_r * p[hbar k]
    res.fitted_width_hk = res.fitted_width_sigma / (4.0 * probe.n * wr);
    return res;
}

}  // namespace atomgrav
