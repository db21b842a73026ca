#include "atomgrav/source.hpp"

#include <random>
#include <stdexcept>

#include "atomgrav/rng.hpp"

namespace atomgrav {

void SourceCloud::validate() const {
    if (!(atom_number >= 1.0)) throw std::invalid_argument("SourceCloud: atom_number must be >= 1");
    if (!(dp_par >= 0.0)) throw std::invalid_argument("SourceCloud: dp_par must be >= 0");
    if (!(dp_perp >= 0.0)) throw std::invalid_argument("SourceCloud: dp_perp must be >= 0");
    if (!(sigma_perp >= 0.0)) throw std::invalid_argument("SourceCloud: sigma_perp must be >= 0");
    if (kind == CloudKind::thermal && !(temperature > 0.0))
        throw std::invalid_argument("SourceCloud: thermal cloud needs temperature > 0");
}

std::vector<AtomSample> sample_atoms(const SourceCloud& cloud, int count, std::uint64_t seed,
                                     const Constants<double>& c) {
    if (count < 1) throw std::invalid_argument("sample_atoms: count must be >= 1");
    cloud.validate();
    const double v_rec = c.recoil_velocity();
    std::vector<AtomSample> out;
    out.reserve(count);
    // one substream per atom: stable under any batching of the caller
    for (int i = 0; i < count; ++i) {
        auto gen = substream(seed, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> g(0.0, 1.0);
        AtomSample s;
        s.p_par = cloud.dp_par * g(gen);
        double gx = g(gen), gy = g(gen);
        s.vx = cloud.dp_perp * v_rec * gx;
        s.vy = cloud.dp_perp * v_rec * gy;
        s.x = cloud.sigma_perp * g(gen);
        s.y = cloud.sigma_perp * g(gen);
        out.push_back(s);
    }
    return out;
}

}  // namespace atomgrav
