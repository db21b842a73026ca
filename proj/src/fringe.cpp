#include "atomgrav/fringe.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include "atomgrav/csv.hpp"
#include "atomgrav/rng.hpp"

namespace atomgrav {

namespace {

using cd = std::complex<double>;

// Per-momentum fringe ingredients. K are the incoherent path weights at the
// two ports; Z is the interference cross term at the diffracted port.
struct PortTerms {
    double k_diff = 0.0;   // sum |path|^2 arriving in |2n hbar k>
    double k_total = 0.0;  // same plus the undiffracted port (normalization)
    cd z{0.0, 0.0};        // conj(upper) * lower closed-diamond cross term
};

PortTerms port_terms(const Eigen::Matrix2cd& u1, const Eigen::Matrix2cd& u2,
                     const Eigen::Matrix2cd& u3) {
    // closed diamond: upper arm stays |0> through the splitter, lower arm is
    // diffracted; every other path exits displaced and adds incoherently
    const cd a_n = u1(0, 0) * u2(1, 0) * u3(1, 1);
    const cd b_n = u1(1, 0) * u2(0, 1) * u3(1, 0);
    const cd a_0 = u1(0, 0) * u2(1, 0) * u3(0, 1);
    const cd b_0 = u1(1, 0) * u2(0, 1) * u3(0, 0);
    const cd s1n = u1(0, 0) * u2(0, 0) * u3(1, 0);
    const cd s2n = u1(1, 0) * u2(1, 1) * u3(1, 1);
    const cd s10 = u1(0, 0) * u2(0, 0) * u3(0, 0);
    const cd s20 = u1(1, 0) * u2(1, 1) * u3(0, 1);
    PortTerms t;
    t.k_diff = std::norm(a_n) + std::norm(b_n) + std::norm(s1n) + std::norm(s2n);
    const double k_undiff = std::norm(a_0) + std::norm(b_0) + std::norm(s10) + std::norm(s20);
    t.k_total = t.k_diff + k_undiff;
    t.z = std::conj(a_n) * b_n;
    return t;
}

// centripetal-free uniform Catmull-Rom on a regular grid
double catmull_rom(const std::vector<double>& f, double u) {
    const int nmax = static_cast<int>(f.size()) - 1;
    const double uc = std::clamp(u, 0.0, double(nmax));
    int i = std::min(static_cast<int>(uc), nmax - 1);
    const double s = uc - i;
    const double f0 = f[std::max(i - 1, 0)], f1 = f[i], f2 = f[i + 1],
                 f3 = f[std::min(i + 2, nmax)];
    const double a = -0.5 * f0 + 1.5 * f1 - 1.5 * f2 + 0.5 * f3;
    const double b = f0 - 2.5 * f1 + 2.0 * f2 - 0.5 * f3;
    const double c = 0.5 * (f2 - f0);
    return ((a * s + b) * s + c) * s + f1;
}

void parallel_for(int count, const std::function<void(int)>& body) {
    const int threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads == 1 || count < 4) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mx;
    for (int t = 0; t < std::min(threads, count); ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lk(err_mx);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace

FringeScan simulate_fringe_scan(const PulseSequence& seq, const SourceCloud& cloud,
                                const std::vector<double>& alpha_grid,
                                const AberrationMap& aberration, long long detected_atoms_per_shot,
                                std::uint64_t seed, const ScanOptions& opt) {
    if (alpha_grid.empty()) throw std::invalid_argument("simulate_fringe_scan: empty alpha grid");
    if (detected_atoms_per_shot < 0)
        throw std::invalid_argument("simulate_fringe_scan: negative detected atom count");
    cloud.validate();
    const double n_eff = effective_order(seq);  // also asserts closure

    // pulse-transfer tables on a longitudinal-momentum grid (the chirp offset
    // is phase-only by design, so the tables are alpha-independent)
    const int grid_n = cloud.dp_par > 0 ? 257 : 1;
    const double p_span = 5.0 * cloud.dp_par;
    std::vector<double> tk_diff(grid_n), tk_total(grid_n), tz_re(grid_n), tz_im(grid_n);
    parallel_for(grid_n, [&](int i) {
        const double p = grid_n == 1 ? 0.0 : -p_span + 2 * p_span * i / (grid_n - 1);
        const auto u1 = port_matrix(seq.splitter, p, seq.cst);
        const auto u2 = port_matrix(seq.mirror, p, seq.cst);
        const auto u3 = port_matrix(seq.recombiner, p, seq.cst);
        const auto t = port_terms(u1, u2, u3);
        tk_diff[i] = t.k_diff;
        tk_total[i] = t.k_total;
        tz_re[i] = t.z.real();
        tz_im[i] = t.z.imag();
    });

    // one ensemble per scan: the fringe is a fixed function of alpha and the
    // counting noise on top is exactly binomial
    const int n_mc = std::max(1, opt.mc_atoms);
    const auto atoms = sample_atoms(cloud, n_mc, mix_seed(seed, 0x0a70u), seq.cst);
    double sum_k = 0.0, sum_ktot = 0.0;
    cd sum_z{0.0, 0.0};
    const double t2 = seq.T, t3 = 2 * seq.T;
    for (const auto& a : atoms) {
        double kd, kt, zr, zi;
        if (grid_n == 1) {
            kd = tk_diff[0];
            kt = tk_total[0];
            zr = tz_re[0];
            zi = tz_im[0];
        } else {
            const double u = (a.p_par + p_span) / (2 * p_span) * (grid_n - 1);
            kd = catmull_rom(tk_diff, u);
            kt = catmull_rom(tk_total, u);
            zr = catmull_rom(tz_re, u);
            zi = catmull_rom(tz_im, u);
        }
        // beam-fixed aberration sampled at the atom's transverse position at
        // each pulse; only the second difference of the profile survives
        const double chi =
            seq.n * (aberration.phi(a.x, a.y) - 2 * aberration.phi(a.x + a.vx * t2, a.y + a.vy * t2) +
                     aberration.phi(a.x + a.vx * t3, a.y + a.vy * t3));
        sum_k += kd;
        sum_ktot += kt;
        sum_z += cd(zr, zi) * std::polar(1.0, chi);
    }

    FringeScan scan;
    scan.alpha = alpha_grid;
    scan.population.resize(alpha_grid.size());
    scan.atoms.resize(alpha_grid.size());
    scan.point_seed.resize(alpha_grid.size());
    scan.n = seq.n;
    scan.T = seq.T;
    scan.n_eff = n_eff;
    scan.seed = seed;

    const double phase_scale =
        (2.0 * seq.cst.k() * opt.g * std::cos(opt.tilt)) * n_eff * seq.T * seq.T;
    const double alpha_scale = 2.0 * std::numbers::pi * n_eff * seq.T * seq.T;
    for (std::size_t j = 0; j < alpha_grid.size(); ++j) {
        const std::uint64_t sj = mix_seed(seed, 0x50000000u + static_cast<std::uint64_t>(j));
        scan.point_seed[j] = sj;
        auto rng = substream(sj, 0);
        double phi = phase_scale - alpha_scale * alpha_grid[j] + seq.phase_offset;
        if (opt.mirror_phase_jitter > 0) {
            std::normal_distribution<double> jitter(0.0, opt.mirror_phase_jitter);
            phi += -2.0 * seq.n * jitter(rng);
        }
        const double mean =
            (sum_k + 2.0 * (sum_z * std::polar(1.0, phi)).real()) / std::max(sum_ktot, 1e-300);
        const double p = std::clamp(mean, 0.0, 1.0);
        if (detected_atoms_per_shot == 0) {
            scan.population[j] = p;
            scan.atoms[j] = 0;
        } else {
            std::binomial_distribution<long long> counts(detected_atoms_per_shot, p);
            scan.population[j] =
                static_cast<double>(counts(rng)) / static_cast<double>(detected_atoms_per_shot);
            scan.atoms[j] = detected_atoms_per_shot;
        }
    }
    return scan;
}

void write_scan_csv(const FringeScan& scan, const std::string& path) {
    csv::Table t;
    t.header = {"alpha_hz_per_s", "population", "atoms", "seed"};
    t.rows.reserve(scan.size());
    for (std::size_t i = 0; i < scan.size(); ++i)
        t.rows.push_back({csv::format_double(scan.alpha[i]), csv::format_double(scan.population[i]),
                          std::to_string(scan.atoms[i]), std::to_string(scan.point_seed[i])});
    csv::write_file(path, t);
}

FringeScan read_scan_csv(const std::string& path) {
    const csv::Table t = csv::read_file(path);
    const int ia = t.column("alpha_hz_per_s");
    const int ip = t.column("population");
    const int in = t.column("atoms");
    const int is = t.column("seed");
    if (ia < 0 || ip < 0)
        throw std::runtime_error(path + ": missing required column alpha_hz_per_s or population");
    FringeScan scan;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        try {
            scan.alpha.push_back(std::stod(row.at(ia)));
            scan.population.push_back(std::stod(row.at(ip)));
            scan.atoms.push_back(in >= 0 ? std::stoll(row.at(in)) : 0);
            scan.point_seed.push_back(is >= 0 ? std::stoull(row.at(is)) : 0);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": malformed numeric field in data row " +
                                     std::to_string(r + 2));
        }
    }
    return scan;
}

}  // namespace atomgrav
