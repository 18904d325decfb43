#include "telecell/channel.hpp"

#include <cmath>

namespace telecell {

void channel_config::validate() const {
    if (!(drop_probability >= 0.0 && drop_probability <= 1.0)) {
        throw config_error("channel.drop_probability", "must lie in [0, 1]");
    }
    if (delay_steps > 1'000'000 || jitter_steps_max > 1'000'000) {
        throw config_error("channel.delay_steps", "delay/jitter above 10^6 ticks");
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

channel_rng::draw channel_rng::next(double drop_probability, std::uint64_t jitter_max) {
    const double u_drop = to_unit(m_engine());
    const double u_jitter = to_unit(m_engine());
    draw d;
    d.dropped = u_drop < drop_probability;
    d.jitter = std::min<std::uint64_t>(jitter_max,
                                       static_cast<std::uint64_t>(std::floor(u_jitter * static_cast<double>(jitter_max + 1))));
    return d;
}

} // namespace telecell
