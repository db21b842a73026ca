#pragma once
#include <Eigen/Dense>

#include <cmath>
#include <functional>

namespace atomgrav {

struct LevMarResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;  // scaled by reduced chi^2
    double chi2 = 0.0;
    int dof = 0;
    int iterations = 0;
    bool converged = false;
};

struct LevMarOptions {
    int max_iter = 200;
    double ftol = 1e-12;   // relative chi^2 improvement
    double xtol = 1e-12;   // relative step size
    double lambda0 = 1e-3;
};

// Parameter covariance at `q`: pseudoinverse of J^T J with a forward-difference
// Jacobian. Exposed separately so callers that transform parameters after the
// fit (e.g. folding a periodic one) can refresh the covariance at the reported
// point. With `rescale` the covariance is inflated by reduced chi^2, which
// keeps quoted errors meaningful when the residual weights are only relative;
// residuals already normalized to unit noise sigma should pass rescale = false
// (a noisy chi^2 estimate would only widen the error distribution).
inline Eigen::MatrixXd levmar_covariance(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
    const Eigen::VectorXd& q, bool rescale = true) {
    const Eigen::VectorXd r = residuals(q);
    const int m = static_cast<int>(r.size());
    const int npar = static_cast<int>(q.size());
    Eigen::MatrixXd J(m, npar);
    for (int j = 0; j < npar; ++j) {
        const double h = std::max(1e-8, 1e-8 * std::abs(q[j]));
        Eigen::VectorXd qh = q;
        qh[j] += h;
        J.col(j) = (residuals(qh) - r) / h;
    }
    const int dof = std::max(1, m - npar);
    const double scale = rescale ? r.squaredNorm() / dof : 1.0;
    Eigen::MatrixXd JtJ = J.transpose() * J;
    return scale * JtJ.completeOrthogonalDecomposition().pseudoInverse();
}

// Dense Levenberg-Marquardt with forward-difference Jacobian. `residuals`
// maps parameters to the residual vector (model - data, already weighted).
inline LevMarResult levmar(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
                           const Eigen::VectorXd& p0, const LevMarOptions& opt = {}) {
    LevMarResult out;
    Eigen::VectorXd p = p0;
    Eigen::VectorXd r = residuals(p);
    double chi2 = r.squaredNorm();
    const int m = static_cast<int>(r.size());
    const int npar = static_cast<int>(p.size());
    double lambda = opt.lambda0;

    auto jacobian = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& rq) {
        Eigen::MatrixXd J(m, npar);
        for (int j = 0; j < npar; ++j) {
            const double h = std::max(1e-8, 1e-8 * std::abs(q[j]));
            Eigen::VectorXd qh = q;
            qh[j] += h;
            J.col(j) = (residuals(qh) - rq) / h;
        }
        return J;
    };

    Eigen::MatrixXd J = jacobian(p, r);
    for (int it = 0; it < opt.max_iter; ++it) {
        out.iterations = it + 1;
        Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::VectorXd g = J.transpose() * r;
        Eigen::MatrixXd A = JtJ;
        A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-30);
        Eigen::VectorXd step = A.ldlt().solve(-g);
        Eigen::VectorXd pn = p + step;
        Eigen::VectorXd rn = residuals(pn);
        const double chi2n = rn.squaredNorm();
        if (chi2n < chi2) {
            const double dchi = chi2 - chi2n;
            const bool fdone = dchi <= opt.ftol * std::max(chi2, 1e-300);
            const bool xdone = step.norm() <= opt.xtol * (p.norm() + opt.xtol);
            p = pn;
            r = rn;
            chi2 = chi2n;
            J = jacobian(p, r);
            lambda = std::max(lambda * 0.3, 1e-12);
            if (fdone || xdone) {
                out.converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) {
                out.converged = true;  // stuck at a (possibly flat) minimum
                break;
            }
        }
    }

    out.params = p;
    out.chi2 = chi2;
    out.dof = std::max(1, m - npar);
    out.covariance = levmar_covariance(residuals, p);
    return out;
}

}  // namespace atomgrav
