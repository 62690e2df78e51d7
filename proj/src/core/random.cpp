#include "conjlab/core/random.hpp"

#include "conjlab/core/error.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include <stdexcept>

namespace conjlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_index,
                           std::uint32_t substream) noexcept
    : master_seed_(master_seed), stream_index_(stream_index), substream_(substream) {}

void RandomStream::refill() {
    if (block_ > std::numeric_limits<std::uint32_t>::max() - kBlocksPerRefill)
        throw std::overflow_error("RandomStream: substream exhausted (2^32 blocks)");
    // Four consecutive counters evaluated lane-wise; the output order equals
    // calling philox4x32_10 on block_, block_+1, ... in turn.
    std::uint32_t c0[kBlocksPerRefill], c1[kBlocksPerRefill], c2[kBlocksPerRefill],
        c3[kBlocksPerRefill];
    const auto idx_lo = static_cast<std::uint32_t>(stream_index_);
    const auto idx_hi = static_cast<std::uint32_t>(stream_index_ >> 32);
    for (unsigned l = 0; l < kBlocksPerRefill; ++l) {
        c0[l] = block_ + l;
        c1[l] = substream_;
        c2[l] = idx_lo;
        c3[l] = idx_hi;
    }
    std::uint32_t k0 = static_cast<std::uint32_t>(master_seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(master_seed_ >> 32);
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        for (unsigned l = 0; l < kBlocksPerRefill; ++l) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0[l];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2[l];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            c0[l] = hi1 ^ c1[l] ^ k0;
            c1[l] = lo1;
            c2[l] = hi0 ^ c3[l] ^ k1;
            c3[l] = lo0;
        }
    }
    for (unsigned l = 0; l < kBlocksPerRefill; ++l) {
        buffer_[4 * l] = c0[l];
        buffer_[4 * l + 1] = c1[l];
        buffer_[4 * l + 2] = c2[l];
        buffer_[4 * l + 3] = c3[l];
    }
    block_ += kBlocksPerRefill;
    pos_ = 0;
}

RandomStream::result_type RandomStream::operator()() {
    if (pos_ == buffer_.size()) refill();
    return buffer_[pos_++];
}

double RandomStream::uniform() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    // (bits + 0.5) / 2^53 keeps the result strictly inside (0,1)
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    return boost::random::normal_distribution<double>{}(*this);
}

double RandomStream::exponential() {
    return boost::random::exponential_distribution<double>{}(*this);
}

std::vector<RandomStream> make_streams(std::uint64_t master_seed, std::size_t count,
                                       std::uint64_t first_index) {
    if (count == 0) throw DomainError("make_streams: count must be at least 1");
    std::vector<RandomStream> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.emplace_back(master_seed, first_index + k);
    return out;
}

} // namespace conjlab
