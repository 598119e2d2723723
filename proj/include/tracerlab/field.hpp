#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tracerlab/band.hpp"
#include "tracerlab/vec.hpp"

#include <json.hpp>

namespace trl {

enum class SamplingScheme {
    stratified_annulus, // default: one mode per (log-radius x angle) cell
    importance_modes,   // iid modes, density proportional to the spectrum
};

std::string to_string(SamplingScheme s);

// SoA mode storage, padded to a multiple of 4 with zero-amplitude entries.
// Derived coefficient columns are precomputed so every evaluation is a pure
// kernel call.
struct ModeSet {
    std::size_t count = 0; // real modes, excluding padding
    std::vector<double> kx, ky, a, theta;
    std::vector<double> akx, aky;      // a * k        (gradient / drift)
    std::vector<double> axx, axy, ayy; // a * k (x) k  (Hessian)

    std::size_t padded() const { return kx.size(); }
    void push(double kx_, double ky_, double a_, double theta_);
    void finalize(); // pad + fill derived columns
};

// A sampled band-limited Gaussian field psi(x) = sum_j a_j cos(k_j.x + th_j)
// with b = J grad(psi). Immutable after construction; evaluation is pure.
class FieldRealization {
  public:
    FieldRealization() = default; // empty field: psi == 0

    // Amplitudes are sqrt(cell mass) * Rayleigh, so each mode is exactly
    // Gaussian and the ensemble covariance equals the cell-averaged band
    // integral; the expected pointwise variance is exactly the band's
    // spectral mass (= ln L for a full band).
    //
    // increment_level < 0 keys RNG streams by absolute (octave, cell), which
    // makes a narrower band an exact restriction of a wider one under the
    // same seed. increment_level >= 0 keys by (field_index, level, cell)
    // instead: hierarchy increments stay independent across levels even when
    // their bands share an octave.
    static FieldRealization sample(const SpectralBand& band, std::size_t num_modes,
                                   std::uint64_t seed,
                                   SamplingScheme scheme = SamplingScheme::stratified_annulus,
                                   std::uint32_t field_index = 0, int increment_level = -1);

    // Explicit mode list (tests, periodized slices).
    static FieldRealization from_modes(const SpectralBand& band, std::vector<double> kx,
                                       std::vector<double> ky, std::vector<double> a,
                                       std::vector<double> theta);

    double psi(Vec2 x) const;
    Vec2 grad_psi(Vec2 x) const;
    Vec2 b(Vec2 x) const; // J grad(psi); divergence-free mode by mode
    Sym2 hessian_psi(Vec2 x) const;

    struct Eval {
        double psi = 0.0;
        Vec2 grad;
        Sym2 hess;
        Vec2 b() const { return rot90(grad); }
    };
    Eval eval_all(Vec2 x) const;

    const SpectralBand& band() const { return band_; }
    const ModeSet& modes() const { return modes_; }
    std::uint64_t seed() const { return seed_; }
    SamplingScheme scheme() const { return scheme_; }
    // Exact spectral mass represented by the mode set (sum of cell masses).
    double expected_mass() const { return expected_mass_; }

    nlohmann::json manifest() const;
    // Rows of (k_x, k_y, a, theta) as little-endian float64.
    void dump_modes_binary(const std::string& path) const;

  private:
    SpectralBand band_;
    ModeSet modes_;
    std::uint64_t seed_ = 0;
    SamplingScheme scheme_ = SamplingScheme::stratified_annulus;
    double expected_mass_ = 0.0;
};

// Per-octave stratification grid shared by every band at a given
// modes-per-octave budget; fixing it globally makes narrower bands exact
// restrictions of wider ones under the same seed.
struct OctaveGrid {
    int nu = 0;     // log-radius cells per octave
    int ntheta = 0; // angular cells
    static OctaveGrid for_modes_per_octave(std::size_t m);
};

} // namespace trl
