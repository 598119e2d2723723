#include "tracerlab/rng.hpp"

#include <cmath>

namespace trl {

namespace {

constexpr std::uint32_t kWeyl0 = 0x9E3779B9u; // golden ratio
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u; // sqrt(3)-1
constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

inline void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMul0, c[0], lo0, hi0);
    mulhilo(kMul1, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& ctr,
                                        const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> c = ctr;
    std::array<std::uint32_t, 2> k = key;
    for (int r = 0; r < 10; ++r) {
        round_once(c, k);
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

std::uint64_t stream_field_cell(std::uint32_t field, std::uint32_t octave, std::uint32_t cell) {
    return (static_cast<std::uint64_t>(StreamTag::field_modes) << 56) |
           (static_cast<std::uint64_t>(field & 0xFFFFu) << 40) |
           (static_cast<std::uint64_t>(octave & 0xFFu) << 32) | static_cast<std::uint64_t>(cell);
}

std::uint64_t stream_path(StreamTag tag, std::uint32_t field, std::uint64_t path) {
    return (static_cast<std::uint64_t>(tag) << 56) |
           (static_cast<std::uint64_t>(field & 0xFFFFu) << 40) | (path & 0xFFFFFFFFFFull);
}

std::uint64_t stream_index(StreamTag tag, std::uint64_t index) {
    return (static_cast<std::uint64_t>(tag) << 56) | (index & 0xFFFFFFFFFFFFFFull);
}

std::uint64_t stream_increment_cell(std::uint32_t realization, std::uint32_t level,
                                    std::uint32_t cell) {
    return (static_cast<std::uint64_t>(StreamTag::increment_modes) << 56) |
           (static_cast<std::uint64_t>(realization & 0xFFFFu) << 40) |
           (static_cast<std::uint64_t>(level & 0xFFu) << 32) | static_cast<std::uint64_t>(cell);
}

void Rng::refill() {
    std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(block_),
                                        static_cast<std::uint32_t>(block_ >> 32), id_lo_, id_hi_};
    auto out = philox4x32(ctr, key_);
    ++block_;
    buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    have_ = 2;
}

double Rng::gaussian() {
    if (have_gauss_) {
        have_gauss_ = false;
        return gauss_spare_;
    }
    double u1 = u01_pos();
    double u2 = u01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    gauss_spare_ = r * std::sin(a);
    have_gauss_ = true;
    return r * std::cos(a);
}

double Rng::rayleigh() { return std::sqrt(-2.0 * std::log(u01_pos())); }

} // namespace trl
