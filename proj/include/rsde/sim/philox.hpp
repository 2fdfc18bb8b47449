#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace rsde::sim {

/// Philox4x32-10 counter-based generator: a keyed bijection on 128-bit
/// counters, so any draw is addressable without stepping a stream.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMulA = 0xD2511F53u;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

    static constexpr Counter apply(Counter ctr, Key key) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeylA;
                key[1] += kWeylB;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }
};

/// Uniform in the open interval (0, 1) from 52 high bits.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    // 52 bits so the half-ulp offset stays exactly representable below 1
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Stream identity for one simulated path.
struct StreamId {
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
};

/// Two independent standard normals addressed by (seed, path, step, pair).
/// Box-Muller on one Philox block.
inline std::array<double, 2> normal_pair(StreamId id, std::uint32_t step, std::uint32_t pair) {
    const Philox4x32::Counter ctr{pair, step, static_cast<std::uint32_t>(id.path_index),
                                  static_cast<std::uint32_t>(id.path_index >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(id.master_seed),
                              static_cast<std::uint32_t>(id.master_seed >> 32)};
    const auto r = Philox4x32::apply(ctr, key);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Uniform (0,1) addressed the same way; used by bootstrap resampling.
inline double uniform_at(StreamId id, std::uint32_t step, std::uint32_t slot) {
    const Philox4x32::Counter ctr{slot, step, static_cast<std::uint32_t>(id.path_index),
                                  static_cast<std::uint32_t>(id.path_index >> 32) ^ 0x80000000u};
    const Philox4x32::Key key{static_cast<std::uint32_t>(id.master_seed),
                              static_cast<std::uint32_t>(id.master_seed >> 32)};
    const auto r = Philox4x32::apply(ctr, key);
    return to_open_unit(r[0], r[1]);
}

}  // namespace rsde::sim
