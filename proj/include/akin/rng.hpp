#pragma once

#include <array>
#include <cstdint>

namespace akin {

/// Counter-based random stream (Philox4x32-10).
///
/// The key is the master seed and the counter is (block index, stream id),
/// so a stream's draw sequence depends only on (master_seed, stream_id) and
/// never on which worker runs it or in which order. Each Monte Carlo path
/// owns one stream with stream_id equal to its path index.
///
/// A stream is a plain value: copy it to fork an identical replay, move it
/// between workers freely, but never draw from one object on two threads.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
        : seed_(master_seed), stream_(stream_id) {}

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }
    /// Number of 64-bit words consumed so far.
    std::uint64_t position() const noexcept { return position_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    void refill(std::uint64_t block) noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    // cached normal deviate from the polar method
    double spare_normal_ = 0.0;
    bool has_spare_ = false;

    friend double sample_normal(RngStream& stream) noexcept;
};

/// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

double sample_normal(RngStream& stream) noexcept;

/// Gamma(shape, scale); valid for every shape > 0, including shape < 1.
double sample_gamma(RngStream& stream, double shape, double scale);

std::uint64_t sample_poisson(RngStream& stream, double mean);

/// Noncentral chi-square through the Poisson-Gamma mixture:
/// N ~ Poisson(noncentrality / 2), then Gamma(dof / 2 + N, 2).
double sample_noncentral_chisq(RngStream& stream, double dof, double noncentrality);

}  // namespace akin
