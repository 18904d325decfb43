#ifndef TELECELL_CHANNEL_HPP
#define TELECELL_CHANNEL_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "telecell/sim_core.hpp"

namespace telecell {

struct channel_config {
    std::uint64_t delay_steps = 0;
    std::uint64_t jitter_steps_max = 0;
    double drop_probability = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    std::uint64_t capacity() const { return delay_steps + jitter_steps_max + 1; }
};

/// splitmix64 finalizer; maps (session seed, stream id) to an independent stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Per-sample random draws. Two 64-bit draws per pushed sample, always consumed
/// in the same order (drop decision, then jitter) so the stream stays aligned
/// whatever the outcome.
class channel_rng {
public:
    explicit channel_rng(std::uint64_t seed) : m_engine(seed) {}

    struct draw {
        bool dropped = false;
        std::uint64_t jitter = 0;
    };

    draw next(double drop_probability, std::uint64_t jitter_max);

    /// Uniform double in [0, 1) from the top 53 bits.
    static double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 m_engine;
};

/// One direction of the link: tick-quantized delay, bounded jitter, Bernoulli loss,
/// hold-last reconstruction. Delivered samples never go back in origin time.
template <class T>
class channel {
public:
    explicit channel(channel_config config, T initial = T{})
        : m_config(config), m_rng(config.seed), m_last(std::move(initial)) {
        m_config.validate();
        m_ring.resize(m_config.capacity());
    }

    /// Push the sample produced at the current tick and return the one delivered
    /// at this tick. Call exactly once per tick.
    const T &push_pop(const T &in) {
        const auto now = m_now;
        const auto d = m_rng.next(m_config.drop_probability, m_config.jitter_steps_max);
        const std::size_t cap = m_ring.size();
        if (!d.dropped) {
            slot &s = m_ring[static_cast<std::size_t>(now) % cap];
            s.value = in;
            s.origin = now;
            s.arrival = now + static_cast<std::int64_t>(m_config.delay_steps + d.jitter);
        }
        const std::int64_t oldest = std::max<std::int64_t>(m_last_origin + 1, now - static_cast<std::int64_t>(cap) + 1);
        for (std::int64_t o = now; o >= oldest; --o) {
            const slot &s = m_ring[static_cast<std::size_t>(o) % cap];
            if (s.origin == o && s.arrival <= now) {
                m_last = s.value;
                m_last_origin = o;
                break;
            }
        }
        ++m_now;
        return m_last;
    }

    /// Applies a new configuration from the next push on. Pending samples keep
    /// their scheduled arrival. The random stream continues.
    void reconfigure(const channel_config &config) {
        config.validate();
        const std::uint64_t cap = std::max<std::uint64_t>(config.capacity(), m_ring.size());
        std::vector<slot> ring(cap);
        for (const slot &s : m_ring) {
            if (s.origin >= 0) {
                ring[static_cast<std::size_t>(s.origin) % cap] = s;
            }
        }
        m_ring = std::move(ring);
        const auto seed = m_config.seed;
        m_config = config;
        m_config.seed = seed;
    }

    const T &last_delivered() const { return m_last; }
    /// Origin tick of the last delivered sample (-1 for the initial sample).
    std::int64_t last_origin() const { return m_last_origin; }
    /// Age of the sample most recently delivered, in ticks.
    std::int64_t age() const { return (m_now - 1) - m_last_origin; }
    const channel_config &config() const { return m_config; }

private:
    struct slot {
        T value{};
        std::int64_t origin = -1;
        std::int64_t arrival = 0;
    };

    channel_config m_config;
    channel_rng m_rng;
    std::vector<slot> m_ring;
    T m_last;
    std::int64_t m_last_origin = -1;
    std::int64_t m_now = 0;
};

} // namespace telecell

#endif // TELECELL_CHANNEL_HPP
