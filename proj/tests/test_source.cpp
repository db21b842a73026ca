// Atom-source tests: resonance conditions, chirp rates, thermal widths, and
// the deterministic Gaussian sampler.
//
// Analytical anchors (87Rb, 780.241 nm lattice, all SI):
//   k       = 2*pi / 780.241e-9        = 8.0528776e6  m^-1
//   omega_r = hbar k^2 / (2 m)         = 2.3694e4     rad/s   (2*pi * 3771 Hz)
//   v_r     = hbar k / m               = 5.8845e-3    m/s per hbar*k
//   alpha0  = k g / pi : the chirp rate that freezes the two-photon detuning
//             of a cloud falling at g. For g = 9.7955 m/s^2 this is 25.11 MHz/s.
//   Maxwell-Boltzmann 1-sigma momentum width sqrt(m kB T) / (hbar k): at
//             T = 150 nK this is 0.6437 hbar*k.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "atomgrav/source.hpp"

using namespace atomgrav;

namespace {
const Constants<double> cst = rb87_780nm();
}

// ---------------------------------------------------------------------------
// Constants block: derived laser/atom numbers
// ---------------------------------------------------------------------------

TEST_CASE("constants: wavevector, recoil frequency and recoil velocity for 87Rb at 780 nm") {
    CHECK(cst.k() == doctest::Approx(8052877.6457).epsilon(1e-9));
    CHECK(cst.omega_r() == doctest::Approx(23693.66).epsilon(1e-5));
    CHECK(cst.recoil_velocity() == doctest::Approx(5.8845e-3).epsilon(1e-4));
    // omega_r must equal hbar k^2 / 2m by construction
    const double wr = cst.hbar * cst.k() * cst.k() / (2.0 * cst.mass);
    CHECK(cst.omega_r() == doctest::Approx(wr).epsilon(1e-14));
}

TEST_CASE("bragg_resonance: delta_n = 4 n omega_r") {
    CHECK(bragg_resonance(0, cst) == 0.0);
    CHECK(bragg_resonance(1, cst) == doctest::Approx(4.0 * cst.omega_r()).epsilon(1e-14));
    CHECK(bragg_resonance(3, cst) == doctest::Approx(12.0 * cst.omega_r()).epsilon(1e-14));
    CHECK_THROWS_AS(bragg_resonance(-1, cst), std::invalid_argument);
}

TEST_CASE("doppler_chirp_rate: alpha0 = k g cos(tilt) / pi") {
    // Untitled beam at g = 9.7955 m/s^2: 25.11 MHz/s (the fringe-center chirp).
    const double a0 = doppler_chirp_rate(9.7955, 0.0, cst);
    CHECK(a0 == doctest::Approx(25.11e6).epsilon(1e-3));
    // Exact formula check
    CHECK(a0 == doctest::Approx(cst.k() * 9.7955 / std::numbers::pi).epsilon(1e-14));
    // cos(theta) projection: a 3-degree misalignment shifts the resonance by
    // (1 - cos 3deg) = 1.37e-3 fractionally.
    const double a3 = doppler_chirp_rate(9.7955, 3.0 * std::numbers::pi / 180.0, cst);
    CHECK(a3 / a0 == doctest::Approx(std::cos(3.0 * std::numbers::pi / 180.0)).epsilon(1e-14));
    // Sign of g carries through (inverted launch direction)
    CHECK(doppler_chirp_rate(-9.7955, 0.0, cst) == doctest::Approx(-a0).epsilon(1e-14));
    CHECK_THROWS_AS(doppler_chirp_rate(9.81, 1.6, cst), std::invalid_argument);
}

TEST_CASE("thermal_momentum_width: sqrt(m kB T)/(hbar k), 0.6437 hbar*k at 150 nK") {
    CHECK(thermal_momentum_width(150e-9, cst) == doctest::Approx(0.6437).epsilon(2e-4));
    // Width scales as sqrt(T)
    const double w1 = thermal_momentum_width(100e-9, cst);
    const double w4 = thermal_momentum_width(400e-9, cst);
    CHECK(w4 / w1 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(thermal_momentum_width(0.0, cst), std::invalid_argument);
    CHECK_THROWS_AS(thermal_momentum_width(-1e-9, cst), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Cloud validation
// ---------------------------------------------------------------------------

TEST_CASE("SourceCloud::validate rejects non-physical parameters") {
    SourceCloud ok;
    ok.atom_number = 1e5;
    ok.dp_par = 0.1;
    ok.dp_perp = 0.2;
    ok.sigma_perp = 20e-6;
    CHECK_NOTHROW(ok.validate());

    SourceCloud bad = ok;
    bad.dp_par = -0.1;
    CHECK_THROWS(bad.validate());
    bad = ok;
    bad.dp_perp = -1.0;
    CHECK_THROWS(bad.validate());
    bad = ok;
    bad.sigma_perp = -1e-6;
    CHECK_THROWS(bad.validate());
    bad = ok;
    bad.atom_number = 0.0;
    CHECK_THROWS(bad.validate());
}

// ---------------------------------------------------------------------------
// Sampler: determinism, degenerate limits, and Gaussian moments
// ---------------------------------------------------------------------------

TEST_CASE("sample_atoms: identical (cloud, count, seed) reproduces the stream bit-for-bit") {
    SourceCloud cloud;
    cloud.atom_number = 1e4;
    cloud.dp_par = 0.14;
    cloud.dp_perp = 0.256;
    cloud.sigma_perp = 19.9e-6;

    const auto a = sample_atoms(cloud, 500, 42, cst);
    const auto b = sample_atoms(cloud, 500, 42, cst);
    REQUIRE(a.size() == 500);
    REQUIRE(b.size() == 500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].p_par == b[i].p_par);
        CHECK(a[i].vx == b[i].vx);
        CHECK(a[i].vy == b[i].vy);
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
    }

    // A different seed must give a different stream
    const auto d = sample_atoms(cloud, 500, 43, cst);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) any_diff = any_diff || (a[i].p_par != d[i].p_par);
    CHECK(any_diff);
}

TEST_CASE("sample_atoms: zero-width cloud collapses to a single deterministic point") {
    SourceCloud cloud;  // all widths default to zero
    cloud.atom_number = 100;
    const auto atoms = sample_atoms(cloud, 64, 7, cst);
    REQUIRE(atoms.size() == 64);
    for (const auto& s : atoms) {
        CHECK(s.p_par == 0.0);
        CHECK(s.vx == 0.0);
        CHECK(s.vy == 0.0);
        CHECK(s.x == 0.0);
        CHECK(s.y == 0.0);
    }
}

TEST_CASE("sample_atoms: sample moments match the requested Gaussian widths") {
    SourceCloud cloud;
    cloud.atom_number = 1e6;
    cloud.dp_par = 0.14;       // hbar*k
    cloud.dp_perp = 0.256;     // hbar*k -> velocity sigma = 0.256 * v_r
    cloud.sigma_perp = 19.9e-6;  // m

    const int N = 40000;
    const auto atoms = sample_atoms(cloud, N, 12345, cst);

    double sp = 0, spp = 0, svx = 0, svxx = 0, sx = 0, sxx = 0;
    for (const auto& s : atoms) {
        sp += s.p_par;
        spp += s.p_par * s.p_par;
        svx += s.vx;
        svxx += s.vx * s.vx;
        sx += s.x;
        sxx += s.x * s.x;
    }
    const double mean_p = sp / N;
    const double sig_p = std::sqrt(spp / N - mean_p * mean_p);
    const double mean_vx = svx / N;
    const double sig_vx = std::sqrt(svxx / N - mean_vx * mean_vx);
    const double mean_x = sx / N;
    const double sig_x = std::sqrt(sxx / N - mean_x * mean_x);

    // Mean: zero within 4 standard errors; sigma: 3% (relative error of a
    // Gaussian sigma estimate is 1/sqrt(2N) = 0.35%, so 3% is ~8 sigma slack).
    CHECK(std::abs(mean_p) < 4.0 * cloud.dp_par / std::sqrt(double(N)));
    CHECK(sig_p == doctest::Approx(cloud.dp_par).epsilon(0.03));

    const double v_sigma = cloud.dp_perp * cst.recoil_velocity();
    CHECK(std::abs(mean_vx) < 4.0 * v_sigma / std::sqrt(double(N)));
    CHECK(sig_vx == doctest::Approx(v_sigma).epsilon(0.03));

    CHECK(std::abs(mean_x) < 4.0 * cloud.sigma_perp / std::sqrt(double(N)));
    CHECK(sig_x == doctest::Approx(cloud.sigma_perp).epsilon(0.03));
}

TEST_CASE("sample_atoms: transverse position and velocity are uncorrelated at release") {
    SourceCloud cloud;
    cloud.atom_number = 1e6;
    cloud.dp_perp = 0.5;
    cloud.sigma_perp = 20e-6;

    const int N = 40000;
    const auto atoms = sample_atoms(cloud, N, 99, cst);
    double sxy = 0, sxvx = 0;
    for (const auto& s : atoms) {
        sxy += s.x * s.y;
        sxvx += s.x * s.vx;
    }
    const double v_sigma = cloud.dp_perp * cst.recoil_velocity();
    // Correlation coefficients should vanish to ~1/sqrt(N)
    CHECK(std::abs(sxy / N) < 4.0 * cloud.sigma_perp * cloud.sigma_perp / std::sqrt(double(N)));
    CHECK(std::abs(sxvx / N) < 4.0 * cloud.sigma_perp * v_sigma / std::sqrt(double(N)));
}
