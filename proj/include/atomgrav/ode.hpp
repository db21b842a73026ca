#pragma once
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace atomgrav {

// Adaptive Dormand-Prince RK45. State must support Eigen-style arithmetic
// (vector space ops plus a cwise norm via lpNorm or abs on scalars). Used for
// the momentum-ladder Schroedinger system and the expansion scaling equations;
// both are smooth and non-stiff so an explicit embedded pair is the right tool.
struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-12;
    double max_dt = 0.0;           // 0 -> no cap
    long max_steps = 2'000'000;
};

namespace detail {
inline double err_norm(double e, double sc) { return std::abs(e) / sc; }
template <class V>
double inf_scaled_norm(const V& err, const V& y0, const V& y1, double rtol, double atol) {
    double m = 0.0;
    for (int i = 0; i < err.size(); ++i) {
        double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        m = std::max(m, std::abs(err[i]) / sc);
    }
    return m;
}
}  // namespace detail

// Integrates dy/dt = f(t, y) from t0 to t1. f must have signature
// void f(double t, const State&, State& dydt). Calls observer(t, y) after each
// accepted step when provided.
template <class State, class Rhs, class Obs>
State rk45_integrate(Rhs&& f, State y, double t0, double t1, const OdeOptions& opt, Obs&& observer) {
    if (t1 == t0) return y;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    double t = t0;
    double span = std::abs(t1 - t0);
    double dt = dir * span / 100.0;
    if (opt.max_dt > 0.0) dt = dir * std::min(std::abs(dt), opt.max_dt);

    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y;
    State ytmp = y, y5 = y, err = y;
    f(t, y, k1);

    // Dormand-Prince coefficients
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    long steps = 0;
    double prev_err = 1.0;
    while (dir * (t1 - t) > 0.0) {
        if (++steps > opt.max_steps) throw std::runtime_error("rk45: step limit exceeded");
        if (dir * (t + dt - t1) > 0.0) dt = t1 - t;

        ytmp = y + dt * (a21 * k1);
        f(t + c2 * dt, ytmp, k2);
        ytmp = y + dt * (a31 * k1 + a32 * k2);
        f(t + c3 * dt, ytmp, k3);
        ytmp = y + dt * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * dt, ytmp, k4);
        ytmp = y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * dt, ytmp, k5);
        ytmp = y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + dt, ytmp, k6);
        y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + dt, y5, k7);
        err = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double e;
        if constexpr (std::is_arithmetic_v<State>) {
            double sc = opt.atol + opt.rtol * std::max(std::abs(y), std::abs(y5));
            e = detail::err_norm(err, sc);
        } else {
            e = detail::inf_scaled_norm(err, y, y5, opt.rtol, opt.atol);
        }

        if (e <= 1.0) {
            t += dt;
            y = y5;
            k1 = k7;  // FSAL
            observer(t, y);
            // PI controller (0.7/0.4 exponents), clipped growth
            double fac = 0.9 * std::pow(std::max(e, 1e-10), -0.7 / 5.0) * std::pow(prev_err, 0.4 / 5.0);
            prev_err = std::max(e, 1e-10);
            dt *= std::clamp(fac, 0.2, 5.0);
        } else {
            dt *= std::max(0.2, 0.9 * std::pow(e, -1.0 / 5.0));
        }
        if (opt.max_dt > 0.0 && std::abs(dt) > opt.max_dt) dt = dir * opt.max_dt;
        if (std::abs(dt) < 1e-18 * span) throw std::runtime_error("rk45: step size underflow");
    }
    return y;
}

template <class State, class Rhs>
State rk45_integrate(Rhs&& f, State y0, double t0, double t1, const OdeOptions& opt = {}) {
    return rk45_integrate(std::forward<Rhs>(f), std::move(y0), t0, t1, opt,
                          [](double, const State&) {});
}

}  // namespace atomgrav
