#include "atomgrav/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "atomgrav/levmar.hpp"

namespace atomgrav {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double model(double alpha, double a, double v, double alpha0, double period) {
    return 0.5 * (a + v * std::cos(two_pi * (alpha - alpha0) / period));
}

}  // namespace

FringeFit fit_fringes(const FringeScan& scan, double period_guess, bool fix_period) {
    const std::size_t m = scan.size();
    if (m < 6) throw std::invalid_argument("fit_fringes: need at least 6 points");
    if (!(period_guess > 0)) throw std::invalid_argument("fit_fringes: period guess must be > 0");
    const auto [amin, amax] = std::minmax_element(scan.alpha.begin(), scan.alpha.end());
    const double span = *amax - *amin;
    if (span < period_guess)
        throw std::invalid_argument("fit_fringes: scan must span at least one period");

    const auto [pmin, pmax] = std::minmax_element(scan.population.begin(), scan.population.end());
    const double a_init = *pmin + *pmax;          // A = 2 * mean level
    const double v_init = std::max(*pmax - *pmin, 1e-6);
    const double center = 0.5 * (*amin + *amax);

    // counting noise is strongest at mid-fringe and weakest at the turning
    // points, so when per-point atom numbers are available weight each residual
    // by its binomial shot-noise sigma. The sigma is evaluated from the model
    // population, not the observed one: near the fringe extremes the observed
    // rate is a noisy variance estimate that correlates with the residual and
    // skews the error scale. Noise-free scans (atoms = 0) fit unweighted.
    bool counted = scan.atoms.size() == m;
    for (std::size_t i = 0; counted && i < m; ++i) counted = scan.atoms[i] > 0;

    const int npar = fix_period ? 3 : 4;
    auto residuals = [&](const Eigen::VectorXd& q) {
        const double period = fix_period ? period_guess : q[3];
        Eigen::VectorXd r(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double mi = model(scan.alpha[i], q[0], q[1], q[2], period);
            double w = 1.0;
            if (counted) {
                const double n = static_cast<double>(scan.atoms[i]);
                const double p = std::clamp(mi, 1.0 / (n + 2.0), 1.0 - 1.0 / (n + 2.0));
                w = std::sqrt(n / (p * (1.0 - p)));
            }
            r[i] = w * (mi - scan.population[i]);
        }
        return r;
    };

    LevMarResult best;
    best.chi2 = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 4; ++s) {
        Eigen::VectorXd q0(npar);
        q0[0] = a_init;
        q0[1] = v_init;
        q0[2] = center + s * period_guess / 4.0;
        if (!fix_period) q0[3] = period_guess;
        auto res = levmar(residuals, q0);
        // the guess pins the harmonic branch: on near-commensurate grids an
        // aliased harmonic can interpolate the samples as well as the real
        // fringe, so refuse solutions that wander to a different octave
        const double per = fix_period ? period_guess : std::abs(res.params[3]);
        const bool octave_ok = per > 0.5 * period_guess && per < 2.0 * period_guess;
        if (res.converged && octave_ok && res.chi2 < best.chi2) best = res;
    }

    FringeFit fit;
    fit.period_fixed = fix_period;
    fit.converged = std::isfinite(best.chi2);
    if (!fit.converged) return fit;

    Eigen::VectorXd q = best.params;
    double period = fix_period ? period_guess : q[3];
    // canonical form: positive visibility, positive period, alpha0 folded to
    // within half a period of the scan center
    if (period < 0) period = -period;
    if (q[1] < 0) {
        q[1] = -q[1];
        q[2] += period / 2;
    }
    q[2] -= period * std::round((q[2] - center) / period);
    if (!fix_period) q[3] = period;
    // sigma_alpha0 depends on which fringe-order branch the optimizer landed on
    // (alpha0 trades off against the period across whole cycles), so refresh
    // the covariance at the canonical parameters just reported. Counted scans
    // have absolutely normalized residuals, so their covariance is used as is;
    // unweighted fits carry an unknown noise scale and get the reduced-chi^2
    // inflation.
    const Eigen::MatrixXd cov = levmar_covariance(residuals, q, !counted);

    fit.offset = q[0];
    fit.visibility = q[1];
    fit.alpha0 = q[2];
    fit.period = period;
    fit.chi2 = best.chi2;
    fit.dof = best.dof;
    // residual_rms stays in population units regardless of weighting
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double d = model(scan.alpha[i], q[0], q[1], q[2], period) - scan.population[i];
        ss += d * d;
    }
    fit.residual_rms = std::sqrt(ss / m);
    fit.sigma_offset = std::sqrt(std::max(cov(0, 0), 0.0));
    fit.sigma_visibility = std::sqrt(std::max(cov(1, 1), 0.0));
    fit.sigma_alpha0 = std::sqrt(std::max(cov(2, 2), 0.0));
    fit.sigma_period = fix_period ? 0.0 : std::sqrt(std::max(cov(3, 3), 0.0));
    fit.visibility_significant = fit.visibility > 3.0 * fit.sigma_visibility;
    if (fit.visibility > 1.0 + 3.0 * fit.sigma_visibility + 1e-12)
        fit.converged = false;  // wildly unphysical fit, refuse to report
    return fit;
}

std::pair<double, double> extract_g(const FringeFit& fit, const Constants<double>& c, double tilt,
                                    double g_ref) {
    if (!fit.converged) throw std::invalid_argument("extract_g: fit did not converge");
    if (!fit.visibility_significant)
        throw std::invalid_argument("extract_g: visibility consistent with zero");
    if (!(std::abs(tilt) < std::numbers::pi / 2))
        throw std::invalid_argument("extract_g: |tilt| must be < pi/2");
    const double scale = std::numbers::pi / (c.k() * std::cos(tilt));
    // fold alpha0 into the fringe-order branch nearest the prior g_ref
    const double alpha_ref = g_ref / scale;
    const double alpha0 =
        fit.alpha0 - fit.period * std::round((fit.alpha0 - alpha_ref) / fit.period);
    return {scale * alpha0, scale * fit.sigma_alpha0};
}

double mid_fringe_precision(const FringeFit& fit, const FringeScan& scan, double cycle_time) {
    if (!fit.converged) throw std::invalid_argument("mid_fringe_precision: fit did not converge");
    if (!fit.visibility_significant)
        throw std::invalid_argument("mid_fringe_precision: visibility consistent with zero");
    if (!(cycle_time > 0)) throw std::invalid_argument("mid_fringe_precision: cycle time <= 0");

    // population scatter where the fringe is steep: |P_model - A/2| < V/4
    double acc = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < scan.size(); ++i) {
        const double pm = model(scan.alpha[i], fit.offset, fit.visibility, fit.alpha0, fit.period);
        if (std::abs(pm - fit.offset / 2) < fit.visibility / 4) {
            const double r = scan.population[i] - pm;
            acc += r * r;
            ++count;
        }
    }
    double dp;
    if (count >= 3) {
        dp = std::sqrt(acc / count);
    } else {
        dp = fit.residual_rms;  // degenerate sampling; fall back to the global scatter
    }
    const double dphi_shot = 2.0 * dp / fit.visibility;
    const double total_phase = two_pi * std::abs(fit.alpha0) / fit.period;
    if (total_phase <= 0) throw std::runtime_error("mid_fringe_precision: vanishing total phase");
    return dphi_shot / total_phase * std::sqrt(cycle_time);
}

double mid_fringe_response(const FringeFit& fit, double dphi) {
    return 0.5 * fit.visibility * dphi;
}

std::string fit_to_json(const FringeFit& fit) {
    nlohmann::json j;
    j["offset"] = fit.offset;
    j["visibility"] = fit.visibility;
    j["alpha0_hz_per_s"] = fit.alpha0;
    j["period_hz_per_s"] = fit.period;
    j["sigma_offset"] = fit.sigma_offset;
    j["sigma_visibility"] = fit.sigma_visibility;
    j["sigma_alpha0_hz_per_s"] = fit.sigma_alpha0;
    j["sigma_period_hz_per_s"] = fit.sigma_period;
    j["residual_rms"] = fit.residual_rms;
    j["chi2"] = fit.chi2;
    j["dof"] = fit.dof;
    j["converged"] = fit.converged;
    j["period_fixed"] = fit.period_fixed;
    j["visibility_significant"] = fit.visibility_significant;
    return j.dump(2);
}

}  // namespace atomgrav
