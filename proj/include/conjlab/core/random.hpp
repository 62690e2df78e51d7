#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

namespace conjlab {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream.
///
/// The Philox key is the 64-bit master seed; the counter carries a 32-bit
/// block index, a 32-bit substream id and the 64-bit stream index. Streams are
/// therefore independent by construction and cost nothing to create, so every
/// replica (and every process inside a replica) can own one.
///
/// Satisfies UniformRandomBitGenerator with 32-bit output.
class RandomStream {
public:
    using result_type = std::uint32_t;

    RandomStream(std::uint64_t master_seed, std::uint64_t stream_index,
                 std::uint32_t substream = 0) noexcept;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on the open interval (0,1) with 53 random bits.
    double uniform();
    double normal();
    /// Unit-rate exponential.
    double exponential();

    /// Fresh independent stream sharing seed and stream index.
    RandomStream substream(std::uint32_t id) const noexcept {
        return RandomStream(master_seed_, stream_index_, id);
    }

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_index() const noexcept { return stream_index_; }
    std::uint32_t substream_id() const noexcept { return substream_; }

private:
    void refill();

    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::uint32_t substream_;
    static constexpr unsigned kBlocksPerRefill = 4;

    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4 * kBlocksPerRefill> buffer_{};
    unsigned pos_ = 4 * kBlocksPerRefill;
};

/// `count` streams with indices first_index, first_index+1, ...
/// Stream k depends only on (master_seed, first_index + k), so a prefix of a
/// longer request is identical to a shorter request.
std::vector<RandomStream> make_streams(std::uint64_t master_seed, std::size_t count,
                                       std::uint64_t first_index = 0);

/// A contiguous block of stream indices owned by one job.
struct StreamBlock {
    std::uint64_t master_seed = 0;
    std::uint64_t base = 0;

    RandomStream at(std::uint64_t replica) const noexcept {
        return RandomStream(master_seed, base + replica);
    }
    /// Sub-block for nested jobs; each job gets 2^40 indices.
    StreamBlock job(std::uint64_t job_id) const noexcept {
        return StreamBlock{master_seed, base + (job_id << 40)};
    }
};

} // namespace conjlab
