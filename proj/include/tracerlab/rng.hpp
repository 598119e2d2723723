#pragma once

#include <array>
#include <cstdint>

namespace trl {

// Philox4x32-10 block cipher (Salmon et al., SC'11). Counter-based: the
// output at any (key, counter) is independent of how other blocks are
// consumed, so every (seed, stream) pair owns a reproducible substream
// regardless of scheduling.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& ctr,
                                        const std::array<std::uint32_t, 2>& key);

// Stream tags keep logically distinct consumers on disjoint counters.
enum class StreamTag : std::uint64_t {
    field_modes = 1,     // per (field, octave, cell): mode synthesis draws
    path_noise = 2,      // per (field, path): Brownian increments
    init_pos = 3,        // per (field, path): initial positions
    mc_sample = 4,       // per (purpose-specific index): Monte Carlo draws
    scratch = 5,
    increment_modes = 6, // per (realization, level, cell): increment bands
};

// id layout for field-mode streams: [tag:8][field:16][octave:8][cell:32].
// Keying cells by their absolute (octave, cell) coordinates makes the
// realization for a narrower band an exact restriction of a wider one
// (same seed, same per-octave grid): spectral increments over disjoint
// annuli come from disjoint streams.
std::uint64_t stream_field_cell(std::uint32_t field, std::uint32_t octave, std::uint32_t cell);
// id layout for per-path streams: [tag:8][field:16][path:40].
std::uint64_t stream_path(StreamTag tag, std::uint32_t field, std::uint64_t path);
// id layout for generic sample streams: [tag:8][index:56].
std::uint64_t stream_index(StreamTag tag, std::uint64_t index);
// id layout for increment-band streams: [tag:8][realization:16][level:8][cell:32].
// Levels are part of the key, so spectral increments of a hierarchy are
// independent across levels even when their bands share an octave.
std::uint64_t stream_increment_cell(std::uint32_t realization, std::uint32_t level,
                                    std::uint32_t cell);

// One substream: key = seed, counter = (block, block_hi, id_lo, id_hi).
// Buffers one Philox block (two u64 = two uniform doubles) at a time.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          id_lo_(static_cast<std::uint32_t>(stream_id)),
          id_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    // Uniform on [0,1), 53-bit resolution.
    double u01() {
        if (have_ == 0) refill();
        return static_cast<double>(buf_[--have_] >> 11) * 0x1.0p-53;
    }
    // Uniform on (0,1] (safe for log()).
    double u01_pos() { return 1.0 - u01(); }

    // Standard normal, Box-Muller; pairs are consumed one at a time.
    double gaussian();
    // Rayleigh with unit scale: density r*exp(-r^2/2), E r^2 = 2.
    double rayleigh();

    std::uint64_t raw64() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

  private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint32_t id_lo_, id_hi_;
    std::uint64_t block_ = 0;
    std::uint64_t buf_[2] = {0, 0};
    int have_ = 0;
    double gauss_spare_ = 0.0;
    bool have_gauss_ = false;
};

} // namespace trl
